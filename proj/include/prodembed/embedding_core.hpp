#pragma once

// Chunked random-walk power iteration over the co-occurrence graph:
// partition edges into chunks, build a row-stochastic transition matrix per
// chunk, start from uniform noise in (-1, 1), repeatedly multiply and
// L2-normalize rows, then merge chunk embeddings with per-node weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prodembed/basket_ingest.hpp"
#include "prodembed/error.hpp"
#include "prodembed/hashing.hpp"
#include "prodembed/parallel.hpp"

namespace prodembed {

/// Chunk index for every edge of a graph, parallel to `graph.edges()`.
struct ChunkAssignment {
  std::uint32_t chunk_count = 1;
  std::vector<std::uint32_t> edge_chunk;

  std::size_t edges_in(std::uint32_t chunk) const {
    return static_cast<std::size_t>(std::count(edge_chunk.begin(), edge_chunk.end(), chunk));
  }
};

/// Sparse row-stochastic matrix of one chunk in CSR form. Rows and columns are
/// chunk-local indices into `nodes`, which is ascending by ProductId; columns
/// within a row are ascending.
struct TransitionMatrix {
  std::uint32_t chunk = 0;
  std::vector<ProductId> nodes;
  std::vector<std::uint64_t> degrees;  // chunk-local weighted degree per node
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::uint32_t> columns;
  std::vector<double> values;

  std::size_t rows() const noexcept { return nodes.size(); }
  std::size_t nonzeros() const noexcept { return values.size(); }

  std::span<const std::uint32_t> row_columns(std::size_t r) const {
    return {columns.data() + row_offsets[r], row_offsets[r + 1] - row_offsets[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values.data() + row_offsets[r], row_offsets[r + 1] - row_offsets[r]};
  }
};

/// Row-major |nodes| x dim matrix of product vectors plus run metadata.
struct EmbeddingMatrix {
  std::vector<ProductId> nodes;
  std::vector<std::string> codes;
  std::size_t dim = 0;
  std::vector<double> values;
  std::uint32_t iterations = 0;  // 0 when unknown (e.g. read back from a file)
  std::uint64_t seed = 0;
  std::size_t zero_row_warnings = 0;

  std::size_t rows() const noexcept { return nodes.size(); }
  std::span<double> row(std::size_t r) { return {values.data() + r * dim, dim}; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * dim, dim}; }

  std::optional<std::size_t> find(std::string_view code) const {
    for (std::size_t r = 0; r < codes.size(); ++r) {
      if (codes[r] == code) return r;
    }
    return std::nullopt;
  }
};

struct ChunkEmbedding {
  std::uint32_t chunk = 0;
  EmbeddingMatrix matrix;
};

/// w(q, v) = deg_q(v) / deg(v): the share of v's edge endpoints that fall in
/// chunk q. Stored sparsely per node.
struct ChunkWeights {
  struct Entry {
    std::uint32_t chunk;
    double weight;
  };

  std::uint32_t chunk_count = 1;
  std::vector<std::size_t> offsets{0};  // per vocabulary node
  std::vector<Entry> entries;

  std::span<const Entry> of(ProductId v) const {
    const auto i = index_of(v);
    return {entries.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }

  double weight(std::uint32_t chunk, ProductId v) const {
    for (const auto& e : of(v)) {
      if (e.chunk == chunk) return e.weight;
    }
    return 0.0;
  }
};

struct TrainOptions {
  std::size_t dim = 1024;
  std::uint32_t iterations = 6;
  std::uint32_t chunks = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

inline constexpr std::uint32_t kSubstituteIterations = 6;
inline constexpr std::uint32_t kComplementIterations = 1;

namespace detail {

inline double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

// Returns false (and leaves v untouched) for a zero or non-finite norm.
inline bool normalize_in_place(std::span<double> v) {
  const double norm = l2_norm(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) return false;
  for (double& x : v) x /= norm;
  return true;
}

inline std::uint64_t edge_key_hash(std::string_view lhs, std::string_view rhs) {
  if (rhs < lhs) std::swap(lhs, rhs);
  std::uint64_t h = hashing::fnv1a(lhs);
  h = hashing::fnv1a(std::string_view("\0", 1), h);
  return hashing::fnv1a(rhs, h);
}

}  // namespace detail

/// Assigns each edge to chunk `hash(canonical code pair) mod Q`. The key uses
/// external codes, so the assignment does not depend on vocabulary order.
inline ChunkAssignment partition_chunks(const CooccurrenceGraph& graph, std::uint32_t chunk_count) {
  if (chunk_count == 0) throw InvalidParameterError("chunk count must be at least 1");
  ChunkAssignment out;
  out.chunk_count = chunk_count;
  out.edge_chunk.reserve(graph.edge_count());
  const auto& vocab = graph.vocabulary();
  for (const auto& e : graph.edges()) {
    if (chunk_count == 1) {
      out.edge_chunk.push_back(0);
      continue;
    }
    const auto h = hashing::splitmix64(detail::edge_key_hash(vocab.code(e.a), vocab.code(e.b)));
    out.edge_chunk.push_back(static_cast<std::uint32_t>(h % chunk_count));
  }
  return out;
}

/// m(a, b) = e_ab / deg_q(a) over the edges of chunk q.
inline TransitionMatrix build_transition(const CooccurrenceGraph& graph, const ChunkAssignment& assignment,
                                         std::uint32_t chunk) {
  if (chunk >= assignment.chunk_count) throw InvalidParameterError("chunk index out of range");
  if (assignment.edge_chunk.size() != graph.edge_count()) {
    throw ConsistencyError("chunk assignment does not match graph edge count");
  }
  const auto& edges = graph.edges();

  // Chunk-local node set.
  std::vector<std::int64_t> local(graph.node_count(), -1);
  std::vector<std::size_t> counts;
  TransitionMatrix m;
  m.chunk = chunk;
  std::vector<ProductId> touched;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (assignment.edge_chunk[i] != chunk) continue;
    for (auto v : {edges[i].a, edges[i].b}) {
      if (local[index_of(v)] < 0) {
        local[index_of(v)] = 0;
        touched.push_back(v);
      }
    }
  }
  std::sort(touched.begin(), touched.end());
  for (std::size_t r = 0; r < touched.size(); ++r) local[index_of(touched[r])] = static_cast<std::int64_t>(r);
  m.nodes = std::move(touched);
  m.degrees.assign(m.nodes.size(), 0);
  counts.assign(m.nodes.size(), 0);

  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (assignment.edge_chunk[i] != chunk) continue;
    const auto la = static_cast<std::size_t>(local[index_of(edges[i].a)]);
    const auto lb = static_cast<std::size_t>(local[index_of(edges[i].b)]);
    m.degrees[la] += edges[i].weight;
    m.degrees[lb] += edges[i].weight;
    ++counts[la];
    ++counts[lb];
  }

  m.row_offsets.assign(m.nodes.size() + 1, 0);
  for (std::size_t r = 0; r < counts.size(); ++r) m.row_offsets[r + 1] = m.row_offsets[r] + counts[r];
  m.columns.resize(m.row_offsets.back());
  m.values.resize(m.row_offsets.back());

  // Edges are sorted by (a, b) with a < b, so filling rows in edge order
  // does not yield sorted columns for the b side; sort each row afterwards.
  std::vector<std::size_t> cursor(m.row_offsets.begin(), m.row_offsets.end() - 1);
  std::vector<std::uint64_t> raw(m.values.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (assignment.edge_chunk[i] != chunk) continue;
    const auto la = static_cast<std::uint32_t>(local[index_of(edges[i].a)]);
    const auto lb = static_cast<std::uint32_t>(local[index_of(edges[i].b)]);
    m.columns[cursor[la]] = lb;
    raw[cursor[la]++] = edges[i].weight;
    m.columns[cursor[lb]] = la;
    raw[cursor[lb]++] = edges[i].weight;
  }
  std::vector<std::pair<std::uint32_t, std::uint64_t>> row;
  for (std::size_t r = 0; r < m.nodes.size(); ++r) {
    const auto begin = m.row_offsets[r];
    const auto end = m.row_offsets[r + 1];
    row.clear();
    for (auto k = begin; k < end; ++k) row.emplace_back(m.columns[k], raw[k]);
    std::sort(row.begin(), row.end());
    const double deg = static_cast<double>(m.degrees[r]);
    for (auto k = begin; k < end; ++k) {
      m.columns[k] = row[k - begin].first;
      m.values[k] = static_cast<double>(row[k - begin].second) / deg;
    }
  }
  return m;
}

/// Raw U(-1, 1) draw for coordinate `j` of the product with `code`. Depends
/// only on (seed, code, j).
inline double initial_entry(std::uint64_t seed, std::string_view code, std::size_t j) {
  const std::uint64_t row_key = hashing::combine(seed, hashing::fnv1a(code));
  return hashing::to_open_unit_interval(hashing::combine(row_key, static_cast<std::uint64_t>(j)));
}

/// Iteration-0 embedding: per-node, code-keyed uniform draws, rows normalized.
inline EmbeddingMatrix init_embedding(std::vector<ProductId> nodes, std::vector<std::string> codes, std::size_t dim,
                                      std::uint64_t seed) {
  if (dim == 0) throw InvalidParameterError("embedding dimension must be at least 1");
  if (nodes.size() != codes.size()) throw ConsistencyError("node and code lists differ in length");
  EmbeddingMatrix t;
  t.nodes = std::move(nodes);
  t.codes = std::move(codes);
  t.dim = dim;
  t.seed = seed;
  t.values.resize(t.nodes.size() * dim);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto row = t.row(r);
    for (std::size_t j = 0; j < dim; ++j) row[j] = initial_entry(seed, t.codes[r], j);
    // A row of exact zeros would need 2^53-scale coincidences; treat as a bug.
    if (!detail::normalize_in_place(row)) throw ConsistencyError("degenerate initial row for " + t.codes[r]);
  }
  return t;
}

inline EmbeddingMatrix init_embedding(const CooccurrenceGraph& graph, const std::vector<ProductId>& nodes,
                                      std::size_t dim, std::uint64_t seed) {
  std::vector<std::string> codes;
  codes.reserve(nodes.size());
  for (auto v : nodes) codes.push_back(graph.vocabulary().code(v));
  return init_embedding(nodes, std::move(codes), dim, seed);
}

/// One power-iteration step: row v becomes normalize(sum_b m(v,b) * prev[b]).
/// A row that comes out as zero keeps its previous value and bumps
/// `zero_row_warnings`.
inline EmbeddingMatrix iterate(const EmbeddingMatrix& prev, const TransitionMatrix& m, std::size_t threads = 1) {
  if (prev.nodes != m.nodes) throw ConsistencyError("embedding rows do not match transition matrix nodes");
  if (prev.values.size() != prev.rows() * prev.dim) throw ConsistencyError("embedding storage has wrong size");
  EmbeddingMatrix next;
  next.nodes = prev.nodes;
  next.codes = prev.codes;
  next.dim = prev.dim;
  next.seed = prev.seed;
  next.iterations = prev.iterations + 1;
  next.values.assign(prev.values.size(), 0.0);
  std::vector<std::uint8_t> zero_rows(prev.rows(), 0);

  parallel_for(prev.rows(), threads, [&](std::size_t r) {
    auto out = next.row(r);
    const auto cols = m.row_columns(r);
    const auto vals = m.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double w = vals[k];
      const auto src = prev.row(cols[k]);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += w * src[j];
    }
    if (!detail::normalize_in_place(out)) {
      const auto src = prev.row(r);
      std::copy(src.begin(), src.end(), out.begin());
      zero_rows[r] = 1;
    }
  });
  next.zero_row_warnings =
      prev.zero_row_warnings + static_cast<std::size_t>(std::count(zero_rows.begin(), zero_rows.end(), 1));
  return next;
}

inline ChunkWeights compute_chunk_weights(const CooccurrenceGraph& graph, const ChunkAssignment& assignment) {
  if (assignment.edge_chunk.size() != graph.edge_count()) {
    throw ConsistencyError("chunk assignment does not match graph edge count");
  }
  const std::size_t n = graph.node_count();
  const std::size_t q_count = assignment.chunk_count;
  // deg_q(v) accumulated per (node, chunk); nodes touch few chunks in
  // practice, but Q is small enough that a dense table is fine.
  std::vector<std::uint64_t> per_chunk(n * q_count, 0);
  const auto& edges = graph.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::size_t q = assignment.edge_chunk[i];
    per_chunk[index_of(edges[i].a) * q_count + q] += edges[i].weight;
    per_chunk[index_of(edges[i].b) * q_count + q] += edges[i].weight;
  }
  ChunkWeights w;
  w.chunk_count = assignment.chunk_count;
  w.offsets.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    std::uint64_t total = 0;
    for (std::size_t q = 0; q < q_count; ++q) total += per_chunk[v * q_count + q];
    for (std::size_t q = 0; q < q_count; ++q) {
      const auto c = per_chunk[v * q_count + q];
      if (c == 0) continue;
      w.entries.push_back({static_cast<std::uint32_t>(q), static_cast<double>(c) / static_cast<double>(total)});
    }
    w.offsets[v + 1] = w.entries.size();
  }
  return w;
}

/// Weighted sum of chunk rows per node, then L2-normalized. A node present in
/// a single chunk keeps that chunk's row unchanged.
inline EmbeddingMatrix merge_chunks(std::span<const ChunkEmbedding> chunks, const ChunkWeights& weights) {
  if (chunks.empty()) throw ConsistencyError("no chunk embeddings to merge");
  const std::size_t dim = chunks.front().matrix.dim;

  ProductId max_node{};
  for (const auto& c : chunks) {
    if (c.matrix.dim != dim) throw ConsistencyError("chunk embeddings differ in dimension");
    for (auto v : c.matrix.nodes) max_node = std::max(max_node, v);
  }
  const std::size_t span_size = static_cast<std::size_t>(index_of(max_node)) + 1;
  std::vector<std::int64_t> slot(span_size, -1);
  std::vector<std::string> code_of(span_size);
  for (const auto& c : chunks) {
    for (std::size_t r = 0; r < c.matrix.rows(); ++r) {
      slot[index_of(c.matrix.nodes[r])] = 0;
      code_of[index_of(c.matrix.nodes[r])] = c.matrix.codes[r];
    }
  }

  EmbeddingMatrix out;
  out.dim = dim;
  out.seed = chunks.front().matrix.seed;
  out.iterations = chunks.front().matrix.iterations;
  for (std::size_t i = 0; i < span_size; ++i) {
    if (slot[i] < 0) continue;
    slot[i] = static_cast<std::int64_t>(out.nodes.size());
    out.nodes.push_back(product_at(i));
    out.codes.push_back(std::move(code_of[i]));
  }
  out.values.assign(out.nodes.size() * dim, 0.0);
  std::vector<double> total_weight(out.nodes.size(), 0.0);
  std::vector<double> best_weight(out.nodes.size(), -1.0);
  std::vector<const double*> best_row(out.nodes.size(), nullptr);
  std::vector<std::uint32_t> contributions(out.nodes.size(), 0);

  // Chunk order is fixed by the caller, which makes the summation order
  // (and so the result) deterministic.
  for (const auto& c : chunks) {
    out.zero_row_warnings += c.matrix.zero_row_warnings;
    for (std::size_t r = 0; r < c.matrix.rows(); ++r) {
      const auto v = c.matrix.nodes[r];
      const auto dst_index = static_cast<std::size_t>(slot[index_of(v)]);
      const double w = index_of(v) + 1 < weights.offsets.size() ? weights.weight(c.chunk, v) : 0.0;
      const auto src = c.matrix.row(r);
      auto dst = out.row(dst_index);
      for (std::size_t j = 0; j < dim; ++j) dst[j] += w * src[j];
      total_weight[dst_index] += w;
      ++contributions[dst_index];
      if (w > best_weight[dst_index]) {
        best_weight[dst_index] = w;
        best_row[dst_index] = src.data();
      }
    }
  }

  for (std::size_t r = 0; r < out.rows(); ++r) {
    if (!(total_weight[r] > 0.0)) {
      throw ConsistencyError("node " + out.codes[r] + " has zero total chunk weight");
    }
    auto dst = out.row(r);
    if (contributions[r] == 1) {
      std::copy(best_row[r], best_row[r] + dim, dst.begin());
      continue;
    }
    if (!detail::normalize_in_place(dst)) {
      std::copy(best_row[r], best_row[r] + dim, dst.begin());
      ++out.zero_row_warnings;
    }
  }
  return out;
}

/// Full pipeline: partition, per-chunk transition + init + iterations, merge.
/// Output rows are the non-isolated products in vocabulary order.
inline EmbeddingMatrix train(const CooccurrenceGraph& graph, const TrainOptions& options) {
  if (options.dim == 0) throw InvalidParameterError("embedding dimension must be at least 1");
  if (options.iterations == 0) throw InvalidParameterError("iteration count must be at least 1");
  if (options.chunks == 0) throw InvalidParameterError("chunk count must be at least 1");
  if (graph.edge_count() == 0) throw EmptyGraphError("graph has no edges; nothing to embed");

  const auto assignment = partition_chunks(graph, options.chunks);
  const auto weights = compute_chunk_weights(graph, assignment);
  std::vector<ChunkEmbedding> chunk_embeddings;
  for (std::uint32_t q = 0; q < assignment.chunk_count; ++q) {
    if (assignment.chunk_count > 1 && assignment.edges_in(q) == 0) continue;
    const auto m = build_transition(graph, assignment, q);
    auto t = init_embedding(graph, m.nodes, options.dim, options.seed);
    for (std::uint32_t i = 0; i < options.iterations; ++i) t = iterate(t, m, options.threads);
    chunk_embeddings.push_back({q, std::move(t)});
  }
  return merge_chunks(chunk_embeddings, weights);
}

inline EmbeddingMatrix train(const CooccurrenceGraph& graph, std::size_t dim, std::uint32_t iterations,
                             std::uint32_t chunks, std::uint64_t seed, std::size_t threads = 1) {
  return train(graph, TrainOptions{dim, iterations, chunks, seed, threads});
}

}  // namespace prodembed
