#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "prodembed/relation_miner.hpp"
#include "test_support.hpp"

using namespace prodembed;

namespace {

EmbeddingMatrix space_from(const std::vector<std::vector<double>>& rows, std::uint32_t iterations = 0) {
  EmbeddingMatrix t;
  t.dim = rows.front().size();
  t.iterations = iterations;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    t.nodes.push_back(product_at(r));
    t.codes.push_back("c" + std::to_string(r));
    t.values.insert(t.values.end(), rows[r].begin(), rows[r].end());
  }
  return t;
}

EmbeddingMatrix random_space(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& r : rows) {
    for (auto& x : r) x = gauss(rng);
  }
  return space_from(rows);
}

std::vector<std::string> codes_of(const NeighborList& l) {
  std::vector<std::string> out;
  for (const auto& n : l.neighbors) out.push_back(n.code);
  return out;
}

}  // namespace

TEST(CosineSimilarity, ClosedForms) {
  const std::vector<double> u{1.0, 0.0};
  const std::vector<double> v{1.0, 1.0};
  const std::vector<double> w{0.0, 2.0};
  EXPECT_DOUBLE_EQ(cosine_similarity(v, v), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(u, w), 0.0);
  EXPECT_NEAR(cosine_similarity(u, v), 0.7071068, 1e-7);
}

TEST(CosineSimilarity, Errors) {
  const std::vector<double> zero{0.0, 0.0};
  const std::vector<double> u{1.0, 0.0};
  const std::vector<double> longer{1.0, 0.0, 0.0};
  EXPECT_THROW(cosine_similarity(zero, u), InvalidInputError);
  EXPECT_THROW(cosine_similarity(u, longer), InvalidInputError);
}

TEST(CosineSimilarity, SymmetricAndClamped) {
  std::mt19937_64 rng(1);
  const auto s = random_space(rng, 50, 9);
  for (std::size_t a = 0; a < s.rows(); ++a) {
    for (std::size_t b = 0; b < s.rows(); ++b) {
      const double ab = cosine_similarity(s.row(a), s.row(b));
      EXPECT_EQ(ab, cosine_similarity(s.row(b), s.row(a)));
      EXPECT_LE(ab, 1.0);
      EXPECT_GE(ab, -1.0);
    }
  }
}

TEST(TopK, KnownRanking) {
  // c1 at 0 degrees from the query, c2 at 60, c3 at 120.
  const auto s = space_from({{1.0, 0.0}, {2.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}, {-0.5, std::sqrt(3.0) / 2.0}});
  const auto l = top_k_neighbors(s, "c0", 3);
  EXPECT_EQ(codes_of(l), (std::vector<std::string>{"c1", "c2", "c3"}));
  EXPECT_NEAR(l.neighbors[1].similarity, 0.5, 1e-12);
  EXPECT_NEAR(l.neighbors[2].similarity, -0.5, 1e-12);
}

TEST(TopK, TruncatesToAvailableProducts) {
  const auto s = space_from({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
  EXPECT_EQ(top_k_neighbors(s, "c1", 10).neighbors.size(), 2u);
}

TEST(TopK, TiesBrokenByProductId) {
  const auto s = space_from({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {0.0, 1.0}});
  for (int rep = 0; rep < 3; ++rep) {
    EXPECT_EQ(codes_of(top_k_neighbors(s, "c0", 4)), (std::vector<std::string>{"c2", "c3", "c1", "c4"}));
  }
}

TEST(TopK, UnknownQueryListsNearbyCodes) {
  const auto s = space_from({{1.0}, {1.0}, {1.0}});
  try {
    top_k_neighbors(s, "c9", 1);
    FAIL();
  } catch (const NotFoundError& e) {
    EXPECT_NE(std::string(e.what()).find("c0"), std::string::npos);
  }
  EXPECT_THROW(top_k_neighbors(s, "c0", 0), InvalidParameterError);
}

TEST(TopK, MatchesFullSortOnRandomSpaces) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_space(rng, 60, 6);
    const NeighborIndex index(s);
    for (std::size_t q = 0; q < s.rows(); ++q) {
      std::vector<std::pair<double, std::size_t>> all;
      for (std::size_t r = 0; r < s.rows(); ++r) {
        if (r != q) all.emplace_back(-cosine_similarity(s.row(q), s.row(r)), r);
      }
      std::sort(all.begin(), all.end());
      const auto l = index.query(q, 7);
      ASSERT_EQ(l.neighbors.size(), 7u);
      for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(index_of(l.neighbors[i].product), all[i].second);
      for (std::size_t i = 1; i < 7; ++i) EXPECT_GE(l.neighbors[i - 1].similarity, l.neighbors[i].similarity);
    }
  }
}

TEST(TopK, RankingInvariantUnderPositiveRowScaling) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_space(rng, 40, 5);
    auto scaled = s;
    for (std::size_t r = 0; r < scaled.rows(); ++r) {
      const double c = scale(rng);
      for (double& x : scaled.row(r)) x *= c;
    }
    for (const auto& code : s.codes) EXPECT_EQ(codes_of(top_k_neighbors(s, code, 5)), codes_of(top_k_neighbors(scaled, code, 5)));
  }
  // Exact ties survive power-of-two scaling.
  auto tied = space_from({{1.0, 0.0}, {1.0, 1.0}, {1.0, 1.0}, {0.0, 1.0}});
  auto tied_scaled = tied;
  const double factors[] = {0.5, 4.0, 0.25, 8.0};
  for (std::size_t r = 0; r < 4; ++r) {
    for (double& x : tied_scaled.row(r)) x *= factors[r];
  }
  EXPECT_EQ(codes_of(top_k_neighbors(tied, "c0", 3)), codes_of(top_k_neighbors(tied_scaled, "c0", 3)));
}

TEST(TopK, CandidateMaskRestrictsResults) {
  const auto s = space_from({{1.0, 0.0}, {1.0, 0.1}, {1.0, 0.2}, {1.0, 0.3}});
  const std::vector<std::uint8_t> mask{1, 0, 1, 1};
  EXPECT_EQ(codes_of(top_k_neighbors(s, "c0", 2, RelationKind::substitute, mask)),
            (std::vector<std::string>{"c2", "c3"}));
}

TEST(Recommend, SubstitutesWarnOnShallowSpace) {
  const auto s = space_from({{1.0, 0.0}, {0.9, 0.1}, {0.0, 1.0}}, 1);
  const auto l = recommend_substitutes(s, "c0");
  EXPECT_EQ(l.kind, RelationKind::substitute);
  EXPECT_EQ(l.neighbors.size(), 2u);
  ASSERT_EQ(l.warnings.size(), 1u);
  EXPECT_TRUE(recommend_substitutes(space_from({{1.0}, {1.0}, {1.0}}, 6), "c0").warnings.empty());
}

TEST(Recommend, ComplementsOnTwoProductGraph) {
  const auto t = train(expand_hyperedges(parse_baskets_text("a b\n")), 4, 1, 1, 0);
  EXPECT_EQ(codes_of(recommend_complements(t, "a")), std::vector<std::string>{"b"});
  EXPECT_EQ(codes_of(recommend_complements(t, "b")), std::vector<std::string>{"a"});
  EXPECT_TRUE(recommend_complements(t, "a").warnings.empty());
  const auto three = space_from({{1.0, 0.0}, {0.9, 0.1}, {0.0, 1.0}}, 6);
  const auto l = recommend_complements(three, "c0");
  EXPECT_EQ(l.neighbors.size(), 2u);
  EXPECT_EQ(l.warnings.size(), 1u);
}

TEST(RandomRecommender, OnlyOtherProduct) {
  const std::vector<std::string> vocab{"a", "b"};
  const auto l = random_recommender(vocab, product_at(0), 1, 3);
  ASSERT_EQ(l.neighbors.size(), 1u);
  EXPECT_EQ(l.neighbors[0].code, "b");
  EXPECT_EQ(l.neighbors[0].similarity, 0.0);
  EXPECT_THROW(random_recommender(vocab, product_at(0), 2, 3), InvalidParameterError);
}

TEST(RandomRecommender, DeterministicDistinctAndExcludesQuery) {
  std::vector<std::string> vocab;
  for (int i = 0; i < 30; ++i) vocab.push_back("v" + std::to_string(i));
  for (std::size_t q = 0; q < vocab.size(); ++q) {
    const auto a = random_recommender(vocab, product_at(q), 29, 77);
    const auto b = random_recommender(vocab, product_at(q), 29, 77);
    EXPECT_EQ(codes_of(a), codes_of(b));
    const auto codes = codes_of(a);
    std::set<std::string> seen(codes.begin(), codes.end());
    EXPECT_EQ(seen.size(), 29u);
    EXPECT_FALSE(seen.count(vocab[q]));
  }
}

TEST(RandomRecommender, UniformSelectionFrequencies) {
  // 1e5 draws of k=1 over 100 products (query excluded): each of the 99
  // others expected 1e5/99 times; chi-square with 98 dof, mean 98, sd 14.
  // The per-product bound is Bonferroni-adjusted for 99 simultaneous checks
  // (two-sided 3 sigma each would trip by chance about a quarter of the time).
  std::vector<std::string> vocab;
  for (int i = 0; i < 100; ++i) vocab.push_back("v" + std::to_string(i));
  std::vector<double> counts(100, 0.0);
  const std::size_t draws = 100000;
  for (std::size_t s = 0; s < draws; ++s) {
    const auto l = random_recommender(vocab, product_at(0), 1, s);
    counts[index_of(l.neighbors[0].product)] += 1.0;
  }
  EXPECT_EQ(counts[0], 0.0);
  const double expected = static_cast<double>(draws) / 99.0;
  double chi2 = 0.0;
  for (std::size_t i = 1; i < 100; ++i) {
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
    EXPECT_NEAR(counts[i], expected, 4.5 * std::sqrt(expected * (1.0 - 1.0 / 99.0))) << i;
  }
  EXPECT_LT(chi2, 98.0 + 3.0 * 14.0);
}

TEST(NeighborTsv, Layout) {
  NeighborList l;
  l.query_code = "q";
  l.neighbors = {{product_at(1), "a", 0.5}, {product_at(2), "b", 0.25}};
  std::ostringstream out;
  write_neighbors_tsv(out, l);
  EXPECT_EQ(out.str(), "q\t1\ta\t0.5\nq\t2\tb\t0.25\n");
}
