#pragma once

// Exact cosine nearest neighbors over an embedding space, the substitute /
// complement wrappers, and the uniform random baseline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prodembed/basket_ingest.hpp"
#include "prodembed/embedding_core.hpp"
#include "prodembed/error.hpp"
#include "prodembed/hashing.hpp"

namespace prodembed {

enum class RelationKind { substitute, complement, random };

inline std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::substitute: return "substitute";
    case RelationKind::complement: return "complement";
    case RelationKind::random: return "random";
  }
  return "unknown";
}

struct Neighbor {
  ProductId product;
  std::string code;
  double similarity;
};

/// Ranked answers for one query; similarity is non-increasing.
struct NeighborList {
  ProductId query{};
  std::string query_code;
  RelationKind kind = RelationKind::substitute;
  std::vector<Neighbor> neighbors;
  std::vector<std::string> warnings;
};

namespace detail {

inline double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double clamp_cosine(double c) { return std::clamp(c, -1.0, 1.0); }

}  // namespace detail

inline double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InvalidInputError("cosine similarity of vectors with different lengths");
  const double nu = detail::l2_norm(u);
  const double nv = detail::l2_norm(v);
  if (!(nu > 0.0) || !(nv > 0.0)) throw InvalidInputError("cosine similarity of a zero vector");
  return detail::clamp_cosine(detail::dot(u, v) / (nu * nv));
}

/// Candidate restriction for a query. Empty means every other row.
using CandidateMask = std::span<const std::uint8_t>;

/// Brute-force cosine search with cached row norms. Safe to share across
/// threads once constructed.
class NeighborIndex {
 public:
  explicit NeighborIndex(const EmbeddingMatrix& space) : space_(&space), norms_(space.rows()) {
    for (std::size_t r = 0; r < space.rows(); ++r) {
      norms_[r] = detail::l2_norm(space.row(r));
      if (!(norms_[r] > 0.0)) throw InvalidInputError("zero embedding row for " + space.codes[r]);
    }
  }

  const EmbeddingMatrix& space() const noexcept { return *space_; }

  double similarity(std::size_t a, std::size_t b) const {
    return detail::clamp_cosine(detail::dot(space_->row(a), space_->row(b)) / (norms_[a] * norms_[b]));
  }

  /// Top-k rows by cosine, ties by ascending ProductId.
  NeighborList query(std::size_t row, std::size_t k, RelationKind kind = RelationKind::substitute,
                     CandidateMask candidates = {}) const {
    if (k == 0) throw InvalidParameterError("k must be at least 1");
    if (row >= space_->rows()) throw NotFoundError("query row out of range");
    if (!candidates.empty() && candidates.size() != space_->rows()) {
      throw InvalidInputError("candidate mask does not match embedding rows");
    }
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(space_->rows());
    for (std::size_t r = 0; r < space_->rows(); ++r) {
      if (r == row) continue;
      if (!candidates.empty() && !candidates[r]) continue;
      scored.emplace_back(similarity(row, r), r);
    }
    const auto& nodes = space_->nodes;
    auto better = [&](const auto& lhs, const auto& rhs) {
      if (lhs.first != rhs.first) return lhs.first > rhs.first;
      return nodes[lhs.second] < nodes[rhs.second];
    };
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);

    NeighborList out;
    out.query = nodes[row];
    out.query_code = space_->codes[row];
    out.kind = kind;
    out.neighbors.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
      const auto r = scored[i].second;
      out.neighbors.push_back({nodes[r], space_->codes[r], scored[i].first});
    }
    return out;
  }

 private:
  const EmbeddingMatrix* space_;
  std::vector<double> norms_;
};

namespace detail {

// Up to `limit` known codes sharing the longest prefix with `code`.
inline std::vector<std::string> closest_codes(const std::vector<std::string>& known, std::string_view code,
                                              std::size_t limit = 5) {
  std::vector<std::pair<std::size_t, const std::string*>> scored;
  for (const auto& k : known) {
    std::size_t p = 0;
    while (p < k.size() && p < code.size() && k[p] == code[p]) ++p;
    scored.emplace_back(p, &k);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < limit; ++i) out.push_back(*scored[i].second);
  return out;
}

}  // namespace detail

inline std::size_t require_row(const EmbeddingMatrix& space, std::string_view code) {
  if (auto r = space.find(code)) return *r;
  std::string msg = "unknown product code `" + std::string(code) + "`";
  const auto near = detail::closest_codes(space.codes, code);
  if (!near.empty()) {
    msg += "; closest known codes:";
    for (const auto& c : near) msg += " " + c;
  }
  throw NotFoundError(msg);
}

inline NeighborList top_k_neighbors(const EmbeddingMatrix& space, std::string_view query, std::size_t k,
                                    RelationKind kind = RelationKind::substitute, CandidateMask candidates = {}) {
  const auto row = require_row(space, query);
  return NeighborIndex(space).query(row, k, kind, candidates);
}

/// Nearest neighbors in the many-iteration space. Warns (does not fail) when
/// the space records fewer iterations than expected.
inline NeighborList recommend_substitutes(const EmbeddingMatrix& space, std::string_view query, std::size_t k = 2,
                                          std::uint32_t expected_iterations = kSubstituteIterations,
                                          CandidateMask candidates = {}) {
  auto out = top_k_neighbors(space, query, k, RelationKind::substitute, candidates);
  if (space.iterations != 0 && space.iterations < expected_iterations) {
    out.warnings.push_back("substitute space trained with " + std::to_string(space.iterations) +
                           " iterations; expected at least " + std::to_string(expected_iterations));
  }
  return out;
}

/// Nearest neighbors in the single-iteration space.
inline NeighborList recommend_complements(const EmbeddingMatrix& space, std::string_view query, std::size_t k = 2,
                                          std::uint32_t expected_iterations = kComplementIterations,
                                          CandidateMask candidates = {}) {
  auto out = top_k_neighbors(space, query, k, RelationKind::complement, candidates);
  if (space.iterations != 0 && space.iterations != expected_iterations) {
    out.warnings.push_back("complement space trained with " + std::to_string(space.iterations) +
                           " iterations; expected " + std::to_string(expected_iterations));
  }
  return out;
}

/// k distinct products drawn uniformly without replacement from the
/// vocabulary minus the query. Deterministic per (seed, query code).
inline NeighborList random_recommender(std::span<const std::string> vocabulary, ProductId query, std::size_t k,
                                       std::uint64_t seed) {
  const std::size_t n = vocabulary.size();
  if (index_of(query) >= n) throw NotFoundError("query outside vocabulary");
  if (n == 0 || k > n - 1) throw InvalidParameterError("k exceeds the number of other products");
  hashing::SplitMixStream rng(hashing::combine(seed, hashing::fnv1a(vocabulary[index_of(query)])));

  // Partial Fisher-Yates over the virtual array [0, n) with the query moved
  // to the end; swaps are recorded sparsely.
  const std::size_t pool = n - 1;
  auto at = [&](std::unordered_map<std::size_t, std::size_t>& swapped, std::size_t i) {
    auto it = swapped.find(i);
    if (it != swapped.end()) return it->second;
    if (i == index_of(query)) return pool;  // slot of the query holds the last element
    return i;
  };
  std::unordered_map<std::size_t, std::size_t> swapped;
  NeighborList out;
  out.query = query;
  out.query_code = vocabulary[index_of(query)];
  out.kind = RelationKind::random;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool - i));
    const std::size_t vi = at(swapped, i);
    const std::size_t vj = at(swapped, j);
    swapped[i] = vj;
    swapped[j] = vi;
    out.neighbors.push_back({product_at(vj), vocabulary[vj], 0.0});
  }
  return out;
}

/// `<query_code>\t<rank>\t<neighbor_code>\t<similarity>` lines, rank from 1.
inline void write_neighbors_tsv(std::ostream& out, const NeighborList& list) {
  std::size_t rank = 1;
  char buf[64];
  for (const auto& n : list.neighbors) {
    std::snprintf(buf, sizeof(buf), "%.9g", n.similarity);
    out << list.query_code << '\t' << rank++ << '\t' << n.code << '\t' << buf << '\n';
  }
}

}  // namespace prodembed
