#pragma once

#include "prodembed/basket_ingest.hpp"
#include "prodembed/embedding_core.hpp"
#include "prodembed/embedding_io.hpp"
#include "prodembed/error.hpp"
#include "prodembed/eval_harness.hpp"
#include "prodembed/relation_miner.hpp"
#include "prodembed/report.hpp"
