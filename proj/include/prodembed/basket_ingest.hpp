#pragma once

// Basket files, product vocabulary and the clique-expanded co-occurrence graph.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prodembed/error.hpp"

namespace prodembed {

/// Dense 0-based product index into a Vocabulary.
enum class ProductId : std::uint32_t {};

constexpr std::uint32_t index_of(ProductId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr ProductId product_at(std::size_t index) noexcept {
  return static_cast<ProductId>(static_cast<std::uint32_t>(index));
}

/// Bijection between external product codes and dense ProductIds, in
/// first-appearance order.
class Vocabulary {
 public:
  ProductId intern(std::string_view code) {
    auto [it, inserted] = index_.try_emplace(std::string(code), static_cast<std::uint32_t>(codes_.size()));
    if (inserted) codes_.emplace_back(code);
    return product_at(it->second);
  }

  std::optional<ProductId> find(std::string_view code) const {
    auto it = index_.find(std::string(code));
    if (it == index_.end()) return std::nullopt;
    return product_at(it->second);
  }

  const std::string& code(ProductId id) const { return codes_.at(index_of(id)); }
  const std::vector<std::string>& codes() const noexcept { return codes_; }
  std::size_t size() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }

 private:
  std::vector<std::string> codes_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// One transaction: an unordered multiset of products. Stored sorted so that
/// any permutation of the same products compares equal.
class Basket {
 public:
  Basket() = default;
  explicit Basket(std::vector<ProductId> products) : products_(std::move(products)) {
    std::sort(products_.begin(), products_.end());
  }

  const std::vector<ProductId>& products() const noexcept { return products_; }
  std::size_t size() const noexcept { return products_.size(); }

  /// Products with duplicates collapsed, ascending.
  std::vector<ProductId> distinct() const {
    std::vector<ProductId> out = products_;
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  friend bool operator==(const Basket&, const Basket&) = default;

 private:
  std::vector<ProductId> products_;
};

struct ParseOptions {
  // Lines with more distinct products than this are rejected; the clique
  // expansion of a basket is quadratic in its size.
  std::size_t max_distinct_products = 5000;
};

struct BasketCorpus {
  std::vector<Basket> baskets;
  Vocabulary vocabulary;
};

namespace detail {

inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

inline std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

inline bool is_comment_or_blank(std::string_view line) {
  for (char c : line) {
    if (is_space(c)) continue;
    return c == '#';
  }
  return true;
}

}  // namespace detail

/// Parses one basket per non-blank, non-`#` line of whitespace-separated codes.
inline BasketCorpus parse_baskets(std::istream& in, const ParseOptions& options = {}) {
  if (!in) throw IoError("basket stream is not readable");
  BasketCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  std::vector<ProductId> scratch;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line)) continue;
    const auto tokens = detail::split_whitespace(line);
    scratch.clear();
    scratch.reserve(tokens.size());
    for (auto token : tokens) scratch.push_back(corpus.vocabulary.intern(token));
    Basket basket(std::move(scratch));
    scratch = {};
    if (options.max_distinct_products > 0 && basket.distinct().size() > options.max_distinct_products) {
      throw MalformedInputError("basket has more than " + std::to_string(options.max_distinct_products) +
                                    " distinct products",
                                line_no);
    }
    corpus.baskets.push_back(std::move(basket));
  }
  if (in.bad()) throw IoError("read error in basket stream at line " + std::to_string(line_no + 1));
  return corpus;
}

inline BasketCorpus parse_baskets_text(std::string_view text, const ParseOptions& options = {}) {
  std::istringstream in{std::string(text)};
  return parse_baskets(in, options);
}

inline BasketCorpus read_basket_file(const std::filesystem::path& path, const ParseOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open basket file: " + path.string());
  return parse_baskets(in, options);
}

inline void write_baskets(std::ostream& out, const BasketCorpus& corpus) {
  for (const auto& basket : corpus.baskets) {
    bool first = true;
    for (auto id : basket.products()) {
      if (!first) out << ' ';
      out << corpus.vocabulary.code(id);
      first = false;
    }
    out << '\n';
  }
}

/// `<internal_index> <external_code>` per line.
inline void write_vocabulary(std::ostream& out, const Vocabulary& vocabulary) {
  for (std::size_t i = 0; i < vocabulary.size(); ++i) out << i << ' ' << vocabulary.codes()[i] << '\n';
}

inline Vocabulary read_vocabulary(std::istream& in) {
  Vocabulary vocabulary;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line)) continue;
    const auto tokens = detail::split_whitespace(line);
    if (tokens.size() != 2) throw MalformedInputError("expected `<index> <code>`", line_no);
    if (tokens[0] != std::to_string(vocabulary.size())) {
      throw MalformedInputError("vocabulary indices must be contiguous from 0", line_no);
    }
    const auto before = vocabulary.size();
    vocabulary.intern(tokens[1]);
    if (vocabulary.size() == before) throw MalformedInputError("duplicate code " + std::string(tokens[1]), line_no);
  }
  return vocabulary;
}

/// Undirected co-occurrence edge, `a < b`.
struct Edge {
  ProductId a;
  ProductId b;
  std::uint64_t weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted pairwise graph obtained from baskets by clique expansion.
/// Edges are sorted by (a, b); degrees are weighted sums of incident edges.
class CooccurrenceGraph {
 public:
  CooccurrenceGraph() = default;
  CooccurrenceGraph(Vocabulary vocabulary, std::vector<Edge> edges)
      : vocabulary_(std::move(vocabulary)), edges_(std::move(edges)), degrees_(vocabulary_.size(), 0) {
    for (const auto& e : edges_) {
      degrees_[index_of(e.a)] += e.weight;
      degrees_[index_of(e.b)] += e.weight;
    }
  }

  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::uint64_t>& degrees() const noexcept { return degrees_; }

  std::size_t node_count() const noexcept { return vocabulary_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::uint64_t degree(ProductId v) const { return degrees_.at(index_of(v)); }

  /// Co-occurrence count of {a, b}; 0 when absent or a == b.
  std::uint64_t weight(ProductId a, ProductId b) const {
    if (a == b) return 0;
    if (b < a) std::swap(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{a, b}, [](const Edge& e, const auto& key) {
      return std::pair{e.a, e.b} < key;
    });
    if (it == edges_.end() || it->a != a || it->b != b) return 0;
    return it->weight;
  }

  friend bool operator==(const CooccurrenceGraph& lhs, const CooccurrenceGraph& rhs) {
    return lhs.vocabulary_.codes() == rhs.vocabulary_.codes() && lhs.edges_ == rhs.edges_;
  }

 private:
  Vocabulary vocabulary_;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> degrees_;
};

/// Clique expansion: every unordered pair of distinct products in a basket
/// gains +1. Duplicates inside a basket are collapsed first.
inline CooccurrenceGraph expand_hyperedges(const std::vector<Basket>& baskets, Vocabulary vocabulary) {
  std::vector<std::uint64_t> keys;
  for (const auto& basket : baskets) {
    const auto items = basket.distinct();
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        keys.push_back((std::uint64_t{index_of(items[i])} << 32) | index_of(items[j]));
      }
    }
  }
  std::sort(keys.begin(), keys.end());
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    edges.push_back({static_cast<ProductId>(keys[i] >> 32), static_cast<ProductId>(keys[i] & 0xffffffffULL),
                     static_cast<std::uint64_t>(j - i)});
    i = j;
  }
  return CooccurrenceGraph(std::move(vocabulary), std::move(edges));
}

inline CooccurrenceGraph expand_hyperedges(const BasketCorpus& corpus) {
  return expand_hyperedges(corpus.baskets, corpus.vocabulary);
}

/// Products that never co-occur with another product, in vocabulary order.
inline std::vector<ProductId> isolated_products(const CooccurrenceGraph& graph) {
  std::vector<ProductId> out;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (graph.degrees()[i] == 0) out.push_back(product_at(i));
  }
  return out;
}

}  // namespace prodembed
