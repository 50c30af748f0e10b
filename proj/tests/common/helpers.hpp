#pragma once

#include <random>

#include "saomre/network.hpp"

namespace testutil {

inline saomre::Network from_edges(std::size_t n,
                                  std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
  saomre::Network x(n);
  for (auto [i, j] : edges) x.set_tie(i, j, true);
  return x;
}

inline saomre::Network random_network(std::size_t n, double density, std::mt19937_64& rng) {
  saomre::Network x(n);
  std::bernoulli_distribution coin(density);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && coin(rng)) x.set_tie(i, j, true);
  return x;
}

// digraph number `code` on 4 actors: bit k <-> k-th off-diagonal pair in row-major order
inline saomre::Network digraph4(unsigned code) {
  saomre::Network x(4);
  unsigned k = 0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) x.set_tie(i, j, (code >> k++) & 1u);
  return x;
}

}  // namespace testutil
