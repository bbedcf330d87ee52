#pragma once

// Dense brute-force version of single-chunk training. Test oracle only: it
// builds the full |V| x |V| transition matrix from pair lookups and shares
// nothing with the sparse path except the seeded initial draws.

#include <cmath>
#include <cstdint>
#include <vector>

#include "prodembed/basket_ingest.hpp"
#include "prodembed/embedding_core.hpp"
#include "prodembed/error.hpp"

namespace prodembed::testing {

inline constexpr std::size_t kDenseReferenceMaxNodes = 10000;

inline EmbeddingMatrix dense_reference_train(const CooccurrenceGraph& graph, std::size_t dim,
                                             std::uint32_t iterations, std::uint64_t seed) {
  if (graph.node_count() > kDenseReferenceMaxNodes) {
    throw InvalidParameterError("dense reference limited to " + std::to_string(kDenseReferenceMaxNodes) + " nodes");
  }
  if (dim == 0 || iterations == 0) throw InvalidParameterError("dimension and iterations must be positive");
  if (graph.edge_count() == 0) throw EmptyGraphError("graph has no edges");

  std::vector<ProductId> nodes;
  std::vector<std::string> codes;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    if (graph.degrees()[v] == 0) continue;
    nodes.push_back(product_at(v));
    codes.push_back(graph.vocabulary().codes()[v]);
  }
  const std::size_t n = nodes.size();

  std::vector<double> m(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    std::uint64_t deg = 0;
    for (std::size_t b = 0; b < n; ++b) deg += graph.weight(nodes[a], nodes[b]);
    for (std::size_t b = 0; b < n; ++b) {
      m[a * n + b] = static_cast<double>(graph.weight(nodes[a], nodes[b])) / static_cast<double>(deg);
    }
  }

  std::vector<double> t(n * dim);
  for (std::size_t a = 0; a < n; ++a) {
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      t[a * dim + j] = initial_entry(seed, codes[a], j);
      norm += t[a * dim + j] * t[a * dim + j];
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < dim; ++j) t[a * dim + j] /= norm;
  }

  std::size_t zero_rows = 0;
  std::vector<double> next(n * dim);
  for (std::uint32_t it = 0; it < iterations; ++it) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t j = 0; j < dim; ++j) {
        double acc = 0.0;
        for (std::size_t b = 0; b < n; ++b) acc += m[a * n + b] * t[b * dim + j];
        next[a * dim + j] = acc;
      }
      double norm = 0.0;
      for (std::size_t j = 0; j < dim; ++j) norm += next[a * dim + j] * next[a * dim + j];
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (std::size_t j = 0; j < dim; ++j) next[a * dim + j] /= norm;
      } else {
        for (std::size_t j = 0; j < dim; ++j) next[a * dim + j] = t[a * dim + j];
        ++zero_rows;
      }
    }
    t.swap(next);
  }

  EmbeddingMatrix out;
  out.nodes = std::move(nodes);
  out.codes = std::move(codes);
  out.dim = dim;
  out.values = std::move(t);
  out.iterations = iterations;
  out.seed = seed;
  out.zero_row_warnings = zero_rows;
  return out;
}

}  // namespace prodembed::testing
