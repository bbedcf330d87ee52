// Embeds the three-basket toy corpus twice (one and six iterations) and
// prints the two nearest neighbors of every product in each space.

#include <iostream>

#include "prodembed/prodembed.hpp"

int main() {
  using namespace prodembed;
  const auto corpus = parse_baskets_text("p1 p3 p4\np2 p4\np5 p6 p3\n");
  const auto graph = expand_hyperedges(corpus);

  const auto substitutes = train(graph, TrainOptions{.dim = 16, .iterations = 6});
  const auto complements = train(graph, TrainOptions{.dim = 16, .iterations = 1});

  for (const auto& code : substitutes.codes) {
    std::cout << "substitutes\n";
    write_neighbors_tsv(std::cout, recommend_substitutes(substitutes, code));
    std::cout << "complements\n";
    write_neighbors_tsv(std::cout, recommend_complements(complements, code));
  }
}
