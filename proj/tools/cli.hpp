#pragma once

// Command-line front end. `run` is kept separate from main() so tests can
// drive every subcommand in-process with captured streams.
//
// Exit codes: 0 ok, 1 internal error, 2 invalid input/parameters,
// 3 unknown entity, 4 data inconsistency.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prodembed/prodembed.hpp"

namespace prodembed::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kInvalid = 2,
  kUnknownEntity = 3,
  kInconsistent = 4,
};

struct EmbedArgs {
  std::string input;
  std::string output;
  std::string vocab_out;
  std::size_t dim = 1024;
  std::uint32_t iterations = kSubstituteIterations;
  std::uint32_t chunks = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct NeighborArgs {
  std::string input;
  std::string output;
  std::string query;
  bool all = false;
  std::size_t k = 2;
  std::string relation = "substitute";
  std::string candidates;
};

struct SynthArgs {
  std::string output;
  std::string truth;
  MarketParams params;
};

struct EvalArgs {
  std::string input;
  std::string truth;
  std::string output;
  BenchmarkConfig config;
};

namespace detail {

class DataInconsistency : public Error {
 public:
  using Error::Error;
};

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

inline void require_readable(const std::string& path, const char* what) {
  if (!std::filesystem::exists(path)) throw IoError(std::string(what) + " not found: " + path);
}

inline int cmd_embed(const EmbedArgs& a, std::ostream& err) {
  require_readable(a.input, "input basket file");
  const auto start = std::chrono::steady_clock::now();
  auto corpus = read_basket_file(a.input);
  const auto graph = expand_hyperedges(corpus);
  const auto isolated = isolated_products(graph);
  const auto t = train(graph, TrainOptions{a.dim, a.iterations, a.chunks, a.seed, a.threads});
  write_embedding_file(a.output, t);
  if (!a.vocab_out.empty()) {
    auto out = open_output(a.vocab_out);
    write_vocabulary(out, graph.vocabulary());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  err << "rows " << t.rows() << ", d " << t.dim << ", iterations " << t.iterations << ", chunks " << a.chunks
      << ", elapsed " << prodembed::detail::fixed(seconds, 2) << " s\n";
  err << "isolated products (not embedded): " << isolated.size() << '\n';
  if (t.zero_row_warnings > 0) err << "warning: " << t.zero_row_warnings << " zero rows kept their previous value\n";
  return kOk;
}

// `<code> [<category>]` per line. Without a category column every listed
// code is one candidate set.
inline std::map<std::string, std::string> read_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open candidate file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (prodembed::detail::is_comment_or_blank(line)) continue;
    const auto tokens = prodembed::detail::split_whitespace(line);
    if (tokens.size() > 2) throw MalformedInputError("expected `<code> [<category>]`", line_no);
    out[std::string(tokens[0])] = tokens.size() == 2 ? std::string(tokens[1]) : std::string();
  }
  return out;
}

inline int cmd_neighbors(const NeighborArgs& a, std::ostream& out, std::ostream& err) {
  if (a.all == !a.query.empty()) throw InvalidParameterError("give exactly one of --query or --all");
  RelationKind kind;
  if (a.relation == "substitute") {
    kind = RelationKind::substitute;
  } else if (a.relation == "complement") {
    kind = RelationKind::complement;
  } else {
    throw InvalidParameterError("--relation must be substitute or complement");
  }
  require_readable(a.input, "embedding file");
  const auto space = read_embedding_file(a.input);
  const NeighborIndex index(space);

  std::map<std::string, std::string> categories;
  if (!a.candidates.empty()) categories = read_candidates(a.candidates);
  std::vector<std::uint8_t> mask;
  auto mask_for = [&](std::size_t row) -> CandidateMask {
    if (categories.empty()) return {};
    auto it = categories.find(space.codes[row]);
    const std::string* category = it == categories.end() ? nullptr : &it->second;
    mask.assign(space.rows(), 0);
    for (std::size_t r = 0; r < space.rows(); ++r) {
      auto c = categories.find(space.codes[r]);
      if (c == categories.end()) continue;
      if (category == nullptr || c->second == *category) mask[r] = 1;
    }
    return mask;
  };

  std::ofstream file;
  std::ostream* sink = &out;
  if (!a.output.empty()) {
    file = open_output(a.output);
    sink = &file;
  }
  if (a.all) {
    for (std::size_t r = 0; r < space.rows(); ++r) write_neighbors_tsv(*sink, index.query(r, a.k, kind, mask_for(r)));
  } else {
    const auto row = require_row(space, a.query);
    write_neighbors_tsv(*sink, index.query(row, a.k, kind, mask_for(row)));
  }
  if (file.is_open()) {
    file.close();
    if (!file) throw IoError("failed writing output file: " + a.output);
  }
  err << "queries answered from " << space.rows() << " embedded products\n";
  return kOk;
}

inline int cmd_synth(const SynthArgs& a, std::ostream& err) {
  const auto market = generate_synthetic_market(a.params);
  const std::string truth_path = a.truth.empty() ? a.output + ".truth" : a.truth;
  {
    auto out = open_output(a.output);
    write_baskets(out, market.corpus);
  }
  {
    auto out = open_output(truth_path);
    write_truth(out, market);
  }
  err << "wrote " << market.corpus.baskets.size() << " baskets over " << market.corpus.vocabulary.size()
      << " products; truth in " << truth_path << '\n';
  return kOk;
}

inline int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  require_readable(a.input, "basket file");
  require_readable(a.truth, "truth file");
  auto corpus = read_basket_file(a.input);
  std::ifstream truth_in(a.truth);
  const auto truth = read_truth(truth_in);
  std::vector<std::string> mismatched;
  auto market = assemble_market(std::move(corpus), truth, mismatched);
  if (!mismatched.empty()) {
    std::string msg = "basket and truth vocabularies differ (" + std::to_string(mismatched.size()) + " codes):";
    for (std::size_t i = 0; i < mismatched.size() && i < 20; ++i) msg += " " + mismatched[i];
    throw DataInconsistency(msg);
  }
  market.params.seed = a.config.seed;
  const auto report = run_benchmark(market, a.config);
  const auto table = render_table(report);
  if (a.output.empty()) {
    out << to_json(report).dump(2) << '\n';
  } else {
    {
      auto json_out = open_output(a.output + ".json");
      json_out << to_json(report).dump(2) << '\n';
    }
    auto table_out = open_output(a.output + ".txt");
    table_out << table;
  }
  err << table;
  return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Product embeddings from transaction baskets; substitute and complement mining"};
  app.require_subcommand(1);

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "Train an embedding space from a basket file");
  embed_cmd->add_option("--input", embed.input, "Basket file (one basket per line)")->required();
  embed_cmd->add_option("--output", embed.output, "Embedding file to write")->required();
  embed_cmd->add_option("--dim", embed.dim, "Embedding dimensionality")->capture_default_str()->check(CLI::PositiveNumber);
  embed_cmd->add_option("--iterations", embed.iterations, "Power iterations (6: substitutes, 1: complements)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  embed_cmd->add_option("--chunks", embed.chunks, "Edge chunks")->capture_default_str()->check(CLI::PositiveNumber);
  embed_cmd->add_option("--seed", embed.seed, "Initialization seed")->capture_default_str();
  embed_cmd->add_option("--threads", embed.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  embed_cmd->add_option("--vocab-out", embed.vocab_out, "Optional vocabulary dump");

  NeighborArgs nb;
  auto* nb_cmd = app.add_subcommand("neighbors", "Rank nearest products in an embedding space");
  nb_cmd->add_option("--input", nb.input, "Embedding file")->required();
  nb_cmd->add_option("--output", nb.output, "TSV output (default: stdout)");
  nb_cmd->add_option("--query", nb.query, "Product code to query");
  nb_cmd->add_flag("--all", nb.all, "Query every product");
  nb_cmd->add_option("--k", nb.k, "Neighbors per query")->capture_default_str()->check(CLI::PositiveNumber);
  nb_cmd->add_option("--relation", nb.relation, "substitute or complement")->capture_default_str();
  nb_cmd->add_option("--candidates", nb.candidates, "File of `<code> [<category>]` restricting candidates");
  std::size_t nb_threads = 1;
  nb_cmd->add_option("--threads", nb_threads, "Accepted for symmetry; queries run single-threaded");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic market with planted ground truth");
  synth_cmd->add_option("--output", synth.output, "Basket file to write")->required();
  synth_cmd->add_option("--truth", synth.truth, "Truth file (default: <output>.truth)");
  synth_cmd->add_option("--themes", synth.params.themes)->capture_default_str();
  synth_cmd->add_option("--groups", synth.params.groups_per_theme, "Substitute groups per theme")->capture_default_str();
  synth_cmd->add_option("--group-size", synth.params.group_size)->capture_default_str();
  synth_cmd->add_option("--baskets", synth.params.baskets)->capture_default_str();
  synth_cmd->add_option("--pick-prob", synth.params.pick_prob, "Per-group inclusion probability")->capture_default_str();
  synth_cmd->add_option("--seed", synth.params.seed)->capture_default_str();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score recommenders on a basket file with planted truth");
  eval_cmd->add_option("--input", ev.input, "Basket file")->required();
  eval_cmd->add_option("--truth", ev.truth, "Truth file from `synth`")->required();
  eval_cmd->add_option("--output", ev.output, "Report prefix; writes <prefix>.json and <prefix>.txt");
  eval_cmd->add_option("--dim", ev.config.dim)->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--chunks", ev.config.chunks)->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", ev.config.seed)->capture_default_str();
  eval_cmd->add_option("--k", ev.config.k)->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--queries", ev.config.query_count, "Sampled queries")->capture_default_str();
  eval_cmd->add_option("--threads", ev.config.threads)->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*embed_cmd) return detail::cmd_embed(embed, err);
    if (*nb_cmd) return detail::cmd_neighbors(nb, out, err);
    if (*synth_cmd) return detail::cmd_synth(synth, err);
    if (*eval_cmd) return detail::cmd_eval(ev, out, err);
  } catch (const NotFoundError& e) {
    err << "error: " << e.what() << '\n';
    return kUnknownEntity;
  } catch (const detail::DataInconsistency& e) {
    err << "error: " << e.what() << '\n';
    return kInconsistent;
  } catch (const ConsistencyError& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("prodembed");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace prodembed::cli
