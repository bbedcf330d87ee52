#pragma once

// Synthetic markets with planted substitute/complement structure and the
// metrics used to score recommenders against it: Hits@k, answer-weighted
// accuracy, pair order agreement and first-recommendation hit rate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prodembed/basket_ingest.hpp"
#include "prodembed/embedding_core.hpp"
#include "prodembed/error.hpp"
#include "prodembed/hashing.hpp"
#include "prodembed/relation_miner.hpp"

namespace prodembed {

struct MarketParams {
  std::size_t themes = 20;
  std::size_t groups_per_theme = 4;
  std::size_t group_size = 5;
  std::size_t baskets = 50000;
  double pick_prob = 0.5;
  std::uint64_t seed = 0;

  std::size_t product_count() const noexcept { return themes * groups_per_theme * group_size; }
};

/// Theme and (global) substitute-group of every product, indexed by ProductId
/// of the market's vocabulary.
struct PlantedTruth {
  std::vector<std::uint32_t> theme;
  std::vector<std::uint32_t> group;

  /// Same group, excluding v.
  std::vector<ProductId> substitutes_of(ProductId v) const {
    std::vector<ProductId> out;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (i != index_of(v) && group[i] == group[index_of(v)]) out.push_back(product_at(i));
    }
    return out;
  }

  /// Same theme, different group.
  std::vector<ProductId> complements_of(ProductId v) const {
    std::vector<ProductId> out;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (theme[i] == theme[index_of(v)] && group[i] != group[index_of(v)]) out.push_back(product_at(i));
    }
    return out;
  }
};

struct SyntheticMarket {
  MarketParams params;
  BasketCorpus corpus;
  PlantedTruth truth;
};

namespace detail {

inline std::string market_code(std::size_t theme, std::size_t group, std::size_t member) {
  return "t" + std::to_string(theme) + "-g" + std::to_string(group) + "-p" + std::to_string(member);
}

}  // namespace detail

inline void validate(const MarketParams& p) {
  if (p.themes < 1) throw InvalidParameterError("theme count must be at least 1");
  if (p.groups_per_theme < 2) throw InvalidParameterError("groups per theme must be at least 2");
  if (p.group_size < 2) throw InvalidParameterError("group size must be at least 2");
  if (p.baskets < 1) throw InvalidParameterError("basket count must be at least 1");
  if (!(p.pick_prob > 0.0 && p.pick_prob <= 1.0)) throw InvalidParameterError("pick probability must be in (0, 1]");
}

/// Each basket picks a theme uniformly, then includes one uniformly chosen
/// member of each of that theme's groups independently with probability p.
/// Draws that come out empty are redrawn, so exactly `baskets` baskets result.
inline SyntheticMarket generate_synthetic_market(const MarketParams& params) {
  validate(params);
  SyntheticMarket market;
  market.params = params;
  auto& vocab = market.corpus.vocabulary;
  for (std::size_t t = 0; t < params.themes; ++t) {
    for (std::size_t g = 0; g < params.groups_per_theme; ++g) {
      for (std::size_t m = 0; m < params.group_size; ++m) {
        vocab.intern(detail::market_code(t, g, m));
        market.truth.theme.push_back(static_cast<std::uint32_t>(t));
        market.truth.group.push_back(static_cast<std::uint32_t>(t * params.groups_per_theme + g));
      }
    }
  }

  hashing::SplitMixStream rng(hashing::combine(params.seed, 0x6d61726b6574ULL));
  market.corpus.baskets.reserve(params.baskets);
  std::vector<ProductId> items;
  while (market.corpus.baskets.size() < params.baskets) {
    const auto theme = rng.below(params.themes);
    items.clear();
    for (std::size_t g = 0; g < params.groups_per_theme; ++g) {
      if (rng.unit() >= params.pick_prob) continue;
      const auto member = rng.below(params.group_size);
      items.push_back(product_at((theme * params.groups_per_theme + g) * params.group_size + member));
    }
    if (items.empty()) continue;
    market.corpus.baskets.emplace_back(items);
  }
  return market;
}

inline SyntheticMarket generate_synthetic_market(MarketParams params, std::uint64_t seed) {
  params.seed = seed;
  return generate_synthetic_market(params);
}

/// Truth file: `<code> <theme> <group>` per product.
inline void write_truth(std::ostream& out, const SyntheticMarket& market) {
  out << "# code theme group\n";
  const auto& codes = market.corpus.vocabulary.codes();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    out << codes[i] << ' ' << market.truth.theme[i] << ' ' << market.truth.group[i] << '\n';
  }
}

struct TruthRecord {
  std::uint32_t theme;
  std::uint32_t group;
};

/// Reads a truth file into code -> (theme, group), preserving file order.
inline std::vector<std::pair<std::string, TruthRecord>> read_truth(std::istream& in) {
  std::vector<std::pair<std::string, TruthRecord>> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line)) continue;
    const auto tokens = detail::split_whitespace(line);
    if (tokens.size() != 3) throw MalformedInputError("expected `<code> <theme> <group>`", line_no);
    TruthRecord rec{};
    try {
      rec.theme = static_cast<std::uint32_t>(std::stoul(std::string(tokens[1])));
      rec.group = static_cast<std::uint32_t>(std::stoul(std::string(tokens[2])));
    } catch (const std::exception&) {
      throw MalformedInputError("theme and group must be non-negative integers", line_no);
    }
    if (!seen.emplace(std::string(tokens[0]), out.size()).second) {
      throw MalformedInputError("duplicate code " + std::string(tokens[0]), line_no);
    }
    out.emplace_back(std::string(tokens[0]), rec);
  }
  return out;
}

/// Pairs parsed baskets with a truth table. Every basket code must have a
/// truth row and every truth code must appear in some basket; otherwise the
/// offending codes are reported through `mismatched`.
inline SyntheticMarket assemble_market(BasketCorpus corpus, const std::vector<std::pair<std::string, TruthRecord>>& truth,
                                       std::vector<std::string>& mismatched) {
  mismatched.clear();
  std::unordered_map<std::string, TruthRecord> by_code(truth.begin(), truth.end());
  SyntheticMarket market;
  const auto& codes = corpus.vocabulary.codes();
  market.truth.theme.resize(codes.size());
  market.truth.group.resize(codes.size());
  std::map<std::uint32_t, std::map<std::uint32_t, std::size_t>> layout;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    auto it = by_code.find(codes[i]);
    if (it == by_code.end()) {
      mismatched.push_back(codes[i]);
      continue;
    }
    market.truth.theme[i] = it->second.theme;
    market.truth.group[i] = it->second.group;
  }
  for (const auto& [code, rec] : truth) {
    if (!corpus.vocabulary.find(code)) mismatched.push_back(code);
    ++layout[rec.theme][rec.group];
  }
  market.params.themes = layout.size();
  market.params.groups_per_theme = layout.empty() ? 0 : layout.begin()->second.size();
  market.params.group_size = layout.empty() || layout.begin()->second.empty() ? 0
                                                                            : layout.begin()->second.begin()->second;
  market.params.baskets = corpus.baskets.size();
  market.params.pick_prob = 0.0;  // unknown for externally supplied data
  market.corpus = std::move(corpus);
  return market;
}

/// 1 iff any of the first k recommendations is in `truth`.
inline int hits_at_k(const NeighborList& recommendations, std::span<const ProductId> truth, std::size_t k) {
  if (truth.empty()) throw InvalidInputError("hits@k needs a non-empty truth set");
  const std::size_t limit = std::min(k, recommendations.neighbors.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (std::find(truth.begin(), truth.end(), recommendations.neighbors[i].product) != truth.end()) return 1;
  }
  return 0;
}

struct CategoryAccuracy {
  std::string category;
  double accuracy = 0.0;
  std::size_t answers = 0;
};

/// acc = sum(acc_i * m_i) / sum(m_i).
inline double weighted_accuracy(std::span<const CategoryAccuracy> per_category) {
  if (per_category.empty()) throw InvalidInputError("weighted accuracy of an empty category list");
  double num = 0.0;
  double den = 0.0;
  for (const auto& c : per_category) {
    if (c.answers == 0) throw InvalidInputError("category " + c.category + " has no answers");
    if (!(c.accuracy >= 0.0 && c.accuracy <= 1.0)) {
      throw InvalidInputError("category " + c.category + " accuracy outside [0, 1]");
    }
    num += c.accuracy * static_cast<double>(c.answers);
    den += static_cast<double>(c.answers);
  }
  return num / den;
}

enum class OrderAgreement { correct, reversed, mismatch };

inline std::string_view to_string(OrderAgreement a) {
  switch (a) {
    case OrderAgreement::correct: return "correct";
    case OrderAgreement::reversed: return "reversed";
    case OrderAgreement::mismatch: return "mismatch";
  }
  return "unknown";
}

using OrderedPair = std::pair<ProductId, ProductId>;

inline OrderAgreement pair_order_agreement(const OrderedPair& algorithm, const OrderedPair& expert) {
  if (algorithm.first == algorithm.second || expert.first == expert.second) {
    throw InvalidInputError("ordered pair must contain two distinct products");
  }
  if (algorithm == expert) return OrderAgreement::correct;
  if (algorithm.first == expert.second && algorithm.second == expert.first) return OrderAgreement::reversed;
  return OrderAgreement::mismatch;
}

struct TruthQuery {
  ProductId query;
  std::vector<ProductId> truth;
};

/// Fraction of queries whose rank-1 recommendation is in the query's truth
/// set. `recommend` maps a ProductId to a NeighborList.
template <typename Recommender>
double first_recommendation_hit_rate(std::span<const TruthQuery> queries, Recommender&& recommend) {
  if (queries.empty()) throw InvalidInputError("first-recommendation hit rate needs at least one query");
  std::size_t hits = 0;
  for (const auto& q : queries) {
    const NeighborList list = recommend(q.query);
    if (list.neighbors.empty()) continue;
    const auto first = list.neighbors.front().product;
    if (std::find(q.truth.begin(), q.truth.end(), first) != q.truth.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

struct BenchmarkConfig {
  std::size_t dim = 128;
  std::uint32_t substitute_iterations = kSubstituteIterations;
  std::uint32_t complement_iterations = kComplementIterations;
  std::uint32_t chunks = 1;
  std::uint64_t seed = 0;
  std::size_t k = 2;
  std::size_t query_count = 200;
  std::size_t threads = 1;
};

/// Scores of one recommender, read in one space, against one kind of truth.
struct RecommenderScores {
  std::string recommender;  // "embedding" or "random"
  std::string space;        // "substitute", "complement" or "random"
  std::string relation;     // truth kind: "substitute" or "complement"
  std::size_t k = 2;
  double hits_at_k = 0.0;
  std::vector<CategoryAccuracy> per_category;
  double weighted_accuracy = 0.0;
  std::size_t answers = 0;
  std::size_t order_correct = 0;
  std::size_t order_reversed = 0;
  std::size_t order_evaluated = 0;
  double first_hit_rate = 0.0;
};

struct EvalReport {
  MarketParams market;
  BenchmarkConfig config;
  std::size_t products = 0;
  std::size_t embedded_products = 0;
  std::size_t queries = 0;
  std::vector<RecommenderScores> results;

  const RecommenderScores& find(std::string_view recommender, std::string_view space,
                                std::string_view relation) const {
    for (const auto& r : results) {
      if (r.recommender == recommender && r.space == space && r.relation == relation) return r;
    }
    throw NotFoundError("no result for " + std::string(recommender) + "/" + std::string(space) + "/" +
                        std::string(relation));
  }
};

namespace detail {

// Reference ("expert") ordering of a truth set derived from basket counts
// alone: complements by raw co-occurrence count, substitutes by the cosine of
// co-occurrence profiles. Ties by ascending ProductId.
inline std::vector<ProductId> reference_ranking(const CooccurrenceGraph& graph, ProductId query,
                                                std::vector<ProductId> truth, bool by_profile) {
  std::vector<double> score(truth.size(), 0.0);
  if (by_profile) {
    const std::size_t n = graph.node_count();
    auto profile = [&](ProductId v) {
      std::vector<double> row(n, 0.0);
      for (const auto& e : graph.edges()) {
        if (e.a == v) row[index_of(e.b)] = static_cast<double>(e.weight);
        if (e.b == v) row[index_of(e.a)] = static_cast<double>(e.weight);
      }
      return row;
    };
    const auto qp = profile(query);
    const double qn = l2_norm(qp);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto tp = profile(truth[i]);
      const double tn = l2_norm(tp);
      score[i] = (qn > 0.0 && tn > 0.0) ? dot(qp, tp) / (qn * tn) : 0.0;
    }
  } else {
    for (std::size_t i = 0; i < truth.size(); ++i) score[i] = static_cast<double>(graph.weight(query, truth[i]));
  }
  std::vector<std::size_t> order(truth.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return truth[a] < truth[b];
  });
  std::vector<ProductId> out;
  for (auto i : order) out.push_back(truth[i]);
  return out;
}

inline bool contains(std::span<const ProductId> set, ProductId v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

}  // namespace detail

/// Trains the substitute and complement spaces on the market, samples
/// queries, and scores the embedding recommender and the random baseline.
inline EvalReport run_benchmark(const SyntheticMarket& market, const BenchmarkConfig& config) {
  if (market.corpus.baskets.empty()) throw InvalidInputError("market has no baskets");
  if (config.k < 2) throw InvalidParameterError("benchmark needs k >= 2 for pair metrics");
  if (config.query_count == 0) throw InvalidParameterError("query count must be at least 1");

  const auto graph = expand_hyperedges(market.corpus);
  TrainOptions sub_opts{config.dim, config.substitute_iterations, config.chunks, config.seed, config.threads};
  TrainOptions comp_opts{config.dim, config.complement_iterations, config.chunks, config.seed, config.threads};
  const auto substitute_space = train(graph, sub_opts);
  const auto complement_space = train(graph, comp_opts);
  const NeighborIndex sub_index(substitute_space);
  const NeighborIndex comp_index(complement_space);

  // Both spaces cover the same (non-isolated) nodes in the same order.
  const std::size_t embedded = substitute_space.rows();

  std::vector<std::size_t> rows(embedded);
  for (std::size_t i = 0; i < embedded; ++i) rows[i] = i;
  hashing::SplitMixStream pick(hashing::combine(config.seed, 0x71756572ULL));
  const std::size_t query_count = std::min(config.query_count, embedded);
  for (std::size_t i = 0; i < query_count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(pick.below(embedded - i));
    std::swap(rows[i], rows[j]);
  }
  rows.resize(query_count);
  std::sort(rows.begin(), rows.end());

  struct Slot {
    RecommenderScores scores;
    std::map<std::uint32_t, std::pair<std::size_t, std::size_t>> category;  // theme -> (pair hits, answers)
    std::size_t hits = 0;
    std::size_t first_hits = 0;
  };
  auto make_slot = [&](std::string rec, std::string space, std::string relation) {
    Slot s;
    s.scores.recommender = std::move(rec);
    s.scores.space = std::move(space);
    s.scores.relation = std::move(relation);
    s.scores.k = config.k;
    return s;
  };
  std::vector<Slot> slots;
  slots.push_back(make_slot("embedding", "substitute", "substitute"));
  slots.push_back(make_slot("embedding", "complement", "complement"));
  slots.push_back(make_slot("random", "random", "substitute"));
  slots.push_back(make_slot("random", "random", "complement"));
  slots.push_back(make_slot("embedding", "complement", "substitute"));
  slots.push_back(make_slot("embedding", "substitute", "complement"));

  const auto& codes = market.corpus.vocabulary.codes();
  auto score = [&](Slot& slot, const NeighborList& list, ProductId query, const std::vector<ProductId>& truth,
                   const std::vector<ProductId>& reference) {
    slot.hits += static_cast<std::size_t>(hits_at_k(list, truth, config.k));
    const auto& n = list.neighbors;
    if (!n.empty() && detail::contains(truth, n.front().product)) ++slot.first_hits;
    const bool pair_hit = n.size() >= 2 && detail::contains(truth, n[0].product) && detail::contains(truth, n[1].product);
    auto& cat = slot.category[market.truth.theme[index_of(query)]];
    cat.first += pair_hit ? 1 : 0;
    cat.second += 1;
    if (n.size() >= 2 && reference.size() >= 2) {
      const auto agreement = pair_order_agreement({n[0].product, n[1].product}, {reference[0], reference[1]});
      if (agreement == OrderAgreement::correct) ++slot.scores.order_correct;
      if (agreement == OrderAgreement::reversed) ++slot.scores.order_reversed;
      ++slot.scores.order_evaluated;
    }
  };

  for (const auto row : rows) {
    const ProductId query = substitute_space.nodes[row];
    const auto sub_truth = market.truth.substitutes_of(query);
    const auto comp_truth = market.truth.complements_of(query);
    const auto sub_ref = detail::reference_ranking(graph, query, sub_truth, true);
    const auto comp_ref = detail::reference_ranking(graph, query, comp_truth, false);

    const auto sub_list = sub_index.query(row, config.k, RelationKind::substitute);
    const auto comp_list = comp_index.query(row, config.k, RelationKind::complement);
    const auto rand_sub = random_recommender(codes, query, config.k, hashing::combine(config.seed, 1));
    const auto rand_comp = random_recommender(codes, query, config.k, hashing::combine(config.seed, 2));

    score(slots[0], sub_list, query, sub_truth, sub_ref);
    score(slots[1], comp_list, query, comp_truth, comp_ref);
    score(slots[2], rand_sub, query, sub_truth, sub_ref);
    score(slots[3], rand_comp, query, comp_truth, comp_ref);
    score(slots[4], comp_list, query, sub_truth, sub_ref);
    score(slots[5], sub_list, query, comp_truth, comp_ref);
  }

  EvalReport report;
  report.market = market.params;
  report.config = config;
  report.products = market.corpus.vocabulary.size();
  report.embedded_products = embedded;
  report.queries = query_count;
  const double qn = static_cast<double>(query_count);
  for (auto& slot : slots) {
    auto& s = slot.scores;
    s.hits_at_k = static_cast<double>(slot.hits) / qn;
    s.first_hit_rate = static_cast<double>(slot.first_hits) / qn;
    for (const auto& [theme, counts] : slot.category) {
      s.per_category.push_back({"theme-" + std::to_string(theme),
                                static_cast<double>(counts.first) / static_cast<double>(counts.second),
                                counts.second});
      s.answers += counts.second;
    }
    s.weighted_accuracy = weighted_accuracy(s.per_category);
    report.results.push_back(std::move(s));
  }
  return report;
}

}  // namespace prodembed
