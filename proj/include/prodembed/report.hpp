#pragma once

// EvalReport serialization: a JSON document with fixed keys and an aligned
// text rendering grouped the same way as the accuracy / order / first-hit
// tables (recommenders as rows, categories as columns).

#include <cstdio>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "prodembed/eval_harness.hpp"

namespace prodembed {

inline nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["market"] = {
      {"themes", report.market.themes},
      {"groups_per_theme", report.market.groups_per_theme},
      {"group_size", report.market.group_size},
      {"baskets", report.market.baskets},
      {"pick_prob", report.market.pick_prob},
      {"seed", report.market.seed},
  };
  j["config"] = {
      {"dim", report.config.dim},
      {"substitute_iterations", report.config.substitute_iterations},
      {"complement_iterations", report.config.complement_iterations},
      {"chunks", report.config.chunks},
      {"seed", report.config.seed},
      {"k", report.config.k},
      {"query_count", report.config.query_count},
  };
  j["products"] = report.products;
  j["embedded_products"] = report.embedded_products;
  j["queries"] = report.queries;
  auto results = nlohmann::ordered_json::array();
  for (const auto& r : report.results) {
    nlohmann::ordered_json e;
    e["recommender"] = r.recommender;
    e["space"] = r.space;
    e["relation"] = r.relation;
    e["k"] = r.k;
    e["hits_at_k"] = r.hits_at_k;
    e["weighted_accuracy"] = r.weighted_accuracy;
    e["answers"] = r.answers;
    auto cats = nlohmann::ordered_json::array();
    for (const auto& c : r.per_category) {
      cats.push_back({{"category", c.category}, {"accuracy", c.accuracy}, {"answers", c.answers}});
    }
    e["per_category"] = std::move(cats);
    e["order"] = {{"correct", r.order_correct}, {"reversed", r.order_reversed}, {"evaluated", r.order_evaluated}};
    e["first_hit_rate"] = r.first_hit_rate;
    results.push_back(std::move(e));
  }
  j["results"] = std::move(results);
  return j;
}

namespace detail {

inline std::string fixed(double x, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

inline std::string render_table(const EvalReport& report) {
  std::ostringstream out;
  out << "products " << report.products << ", embedded " << report.embedded_products << ", queries "
      << report.queries << ", k " << report.config.k << ", d " << report.config.dim << "\n";

  for (const char* relation : {"substitute", "complement"}) {
    out << "\n== " << relation << "s ==\n";
    std::set<std::string> categories;
    for (const auto& r : report.results) {
      if (r.relation == relation) {
        for (const auto& c : r.per_category) categories.insert(c.category);
      }
    }
    constexpr std::size_t label_width = 24;
    constexpr std::size_t col = 10;
    out << detail::pad("accuracy", label_width);
    for (const auto& c : categories) out << detail::pad(c, col);
    out << detail::pad("weighted", col) << '\n';
    for (const auto& r : report.results) {
      if (r.relation != relation) continue;
      out << detail::pad(r.recommender + "/" + r.space, label_width);
      for (const auto& c : categories) {
        std::string cell = "-";
        for (const auto& pc : r.per_category) {
          if (pc.category == c) cell = detail::fixed(pc.accuracy);
        }
        out << detail::pad(cell, col);
      }
      out << detail::pad(detail::fixed(r.weighted_accuracy, 4), col) << '\n';
    }
    out << '\n'
        << detail::pad("recommender", label_width) << detail::pad("hits@k", col) << detail::pad("first", col)
        << detail::pad("correct", col) << detail::pad("reversed", col) << detail::pad("sum", col)
        << detail::pad("pairs", col) << '\n';
    for (const auto& r : report.results) {
      if (r.relation != relation) continue;
      out << detail::pad(r.recommender + "/" + r.space, label_width) << detail::pad(detail::fixed(r.hits_at_k), col)
          << detail::pad(detail::fixed(r.first_hit_rate), col) << detail::pad(std::to_string(r.order_correct), col)
          << detail::pad(std::to_string(r.order_reversed), col)
          << detail::pad(std::to_string(r.order_correct + r.order_reversed), col)
          << detail::pad(std::to_string(r.order_evaluated), col) << '\n';
    }
  }
  return out.str();
}

}  // namespace prodembed
