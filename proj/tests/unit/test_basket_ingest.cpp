#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "prodembed/basket_ingest.hpp"
#include "test_support.hpp"

using namespace prodembed;

namespace {

std::uint64_t weight_of(const CooccurrenceGraph& g, const std::string& a, const std::string& b) {
  return g.weight(*g.vocabulary().find(a), *g.vocabulary().find(b));
}

}  // namespace

TEST(ParseBaskets, ToyBasketsShapeYieldsThreeBasketsAndSixProducts) {
  const auto corpus = parse_baskets_text(test::kToyBaskets);
  ASSERT_EQ(corpus.baskets.size(), 3u);
  ASSERT_EQ(corpus.vocabulary.size(), 6u);
  const std::vector<std::string> expected{"p1", "p3", "p4", "p2", "p5", "p6"};
  EXPECT_EQ(corpus.vocabulary.codes(), expected);
}

TEST(ParseBaskets, SingleCodeIsSingletonBasket) {
  const auto corpus = parse_baskets_text("p1");
  ASSERT_EQ(corpus.baskets.size(), 1u);
  EXPECT_EQ(corpus.baskets[0].size(), 1u);
  EXPECT_EQ(corpus.vocabulary.size(), 1u);
}

TEST(ParseBaskets, ProductOrderIsIrrelevant) {
  const auto corpus = parse_baskets_text("p4 p1 p3\np1 p3 p4\n");
  EXPECT_EQ(corpus.baskets[0], corpus.baskets[1]);
}

TEST(ParseBaskets, SkipsCommentsBlankLinesAndCarriageReturns) {
  const auto corpus = parse_baskets_text("# header\n\n  \t\np1\tp2\r\n   # indented comment\np3\n");
  ASSERT_EQ(corpus.baskets.size(), 2u);
  EXPECT_EQ(corpus.vocabulary.codes(), (std::vector<std::string>{"p1", "p2", "p3"}));
}

TEST(ParseBaskets, OversizedBasketNamesLine) {
  ParseOptions opts;
  opts.max_distinct_products = 3;
  try {
    parse_baskets_text("a b\n# c\na b c d\n", opts);
    FAIL() << "expected MalformedInputError";
  } catch (const MalformedInputError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  // Duplicates do not count against the bound.
  EXPECT_NO_THROW(parse_baskets_text("a a a a b c\n", opts));
}

TEST(ParseBaskets, UnreadableStreamIsIoError) {
  std::istringstream in("p1");
  in.setstate(std::ios::badbit);
  EXPECT_THROW(parse_baskets(in), IoError);
  EXPECT_THROW(read_basket_file("/nonexistent/baskets.txt"), IoError);
}

TEST(ExpandHyperedges, ToyBasketsMatchesHandEnumeration) {
  const auto corpus = parse_baskets_text(test::kToyBaskets);
  const auto g = expand_hyperedges(corpus);
  ASSERT_EQ(g.edge_count(), 7u);
  EXPECT_EQ(weight_of(g, "p1", "p3"), 1u);
  EXPECT_EQ(weight_of(g, "p1", "p4"), 1u);
  EXPECT_EQ(weight_of(g, "p3", "p4"), 1u);
  EXPECT_EQ(weight_of(g, "p2", "p4"), 1u);
  EXPECT_EQ(weight_of(g, "p5", "p6"), 1u);
  EXPECT_EQ(weight_of(g, "p5", "p3"), 1u);
  EXPECT_EQ(weight_of(g, "p6", "p3"), 1u);
  EXPECT_EQ(weight_of(g, "p1", "p2"), 0u);

  const std::map<std::string, std::uint64_t> degrees{{"p1", 2}, {"p2", 1}, {"p3", 4}, {"p4", 3}, {"p5", 2}, {"p6", 2}};
  for (const auto& [code, deg] : degrees) EXPECT_EQ(g.degree(*g.vocabulary().find(code)), deg) << code;
}

TEST(ExpandHyperedges, DuplicatesCollapseWithoutSelfEdges) {
  const auto g = expand_hyperedges(parse_baskets_text("a a b\n"));
  ASSERT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(weight_of(g, "a", "b"), 1u);
  EXPECT_EQ(weight_of(g, "a", "a"), 0u);
}

TEST(ExpandHyperedges, RepeatedBasketsAddUp) {
  const auto g = expand_hyperedges(parse_baskets_text("a b\nb a\n"));
  EXPECT_EQ(weight_of(g, "a", "b"), 2u);
  EXPECT_EQ(weight_of(g, "b", "a"), 2u);
  EXPECT_EQ(g.degree(*g.vocabulary().find("a")), 2u);
  EXPECT_EQ(g.degree(*g.vocabulary().find("b")), 2u);
}

TEST(ExpandHyperedges, MatchesBruteForceOnRandomCorpora) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = test::random_corpus(rng, 30, 120);
    const auto g = expand_hyperedges(corpus);
    const auto expected = test::brute_force_pairs(corpus);
    ASSERT_EQ(g.edge_count(), expected.size());
    for (const auto& [pair, count] : expected) EXPECT_EQ(weight_of(g, pair.first, pair.second), count);
  }
}

TEST(ExpandHyperedges, HandshakeAndPairCountProperties) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = test::random_corpus(rng, 40, 200);
    const auto g = expand_hyperedges(corpus);
    std::uint64_t degree_sum = 0;
    for (auto d : g.degrees()) degree_sum += d;
    std::uint64_t weight_sum = 0;
    for (const auto& e : g.edges()) {
      EXPECT_LT(e.a, e.b);
      weight_sum += e.weight;
    }
    EXPECT_EQ(degree_sum, 2 * weight_sum);

    std::uint64_t increments = 0;
    for (const auto& b : corpus.baskets) {
      const auto k = b.distinct().size();
      increments += k * (k - 1) / 2;
    }
    EXPECT_EQ(weight_sum, increments);
  }
}

TEST(ExpandHyperedges, PermutationInvariant) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto corpus = test::random_corpus(rng, 25, 100);
    // Rebuild the corpus text with shuffled baskets and shuffled products,
    // but intern codes in the original order so ids line up.
    std::vector<std::vector<std::string>> lines;
    for (const auto& b : corpus.baskets) {
      std::vector<std::string> codes;
      for (auto id : b.products()) codes.push_back(corpus.vocabulary.code(id));
      std::shuffle(codes.begin(), codes.end(), rng);
      lines.push_back(codes);
    }
    std::shuffle(lines.begin(), lines.end(), rng);
    BasketCorpus shuffled;
    for (const auto& code : corpus.vocabulary.codes()) shuffled.vocabulary.intern(code);
    for (const auto& line : lines) {
      std::vector<ProductId> ids;
      for (const auto& c : line) ids.push_back(shuffled.vocabulary.intern(c));
      shuffled.baskets.emplace_back(ids);
    }
    EXPECT_EQ(expand_hyperedges(corpus), expand_hyperedges(shuffled));
  }
}

TEST(IsolatedProducts, ToyBasketsHasNone) {
  EXPECT_TRUE(isolated_products(expand_hyperedges(parse_baskets_text(test::kToyBaskets))).empty());
}

TEST(IsolatedProducts, SingletonBasketsOnly) {
  const auto g = expand_hyperedges(parse_baskets_text("a\nb\n"));
  EXPECT_EQ(isolated_products(g), (std::vector<ProductId>{product_at(0), product_at(1)}));
}

TEST(IsolatedProducts, MixedCorpus) {
  const auto g = expand_hyperedges(parse_baskets_text("a b\nc\n"));
  const auto iso = isolated_products(g);
  ASSERT_EQ(iso.size(), 1u);
  EXPECT_EQ(g.vocabulary().code(iso[0]), "c");
}

TEST(Vocabulary, DumpRoundTripsCodesByteExactly) {
  const auto corpus = parse_baskets_text("p\xc3\xa9 x-1\nSKU_0042 \xe2\x82\xac" "9\n");
  std::ostringstream out;
  write_vocabulary(out, corpus.vocabulary);
  EXPECT_EQ(out.str().substr(0, 6), "0 p\xc3\xa9\n");
  std::istringstream in(out.str());
  const auto back = read_vocabulary(in);
  EXPECT_EQ(back.codes(), corpus.vocabulary.codes());
}

TEST(Vocabulary, RejectsGapsAndDuplicates) {
  std::istringstream gap("0 a\n2 b\n");
  EXPECT_THROW(read_vocabulary(gap), MalformedInputError);
  std::istringstream dup("0 a\n1 a\n");
  EXPECT_THROW(read_vocabulary(dup), MalformedInputError);
}
