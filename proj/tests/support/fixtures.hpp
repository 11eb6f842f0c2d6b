#pragma once

#include <random>

#include "imethod/grid.hpp"

namespace fixture {

/// Independent standard normal real and imaginary parts per sample.
inline imethod::Field random_field(const imethod::Grid& g, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto f = imethod::Field::zeros(g);
  for (auto& v : f.values) v = imethod::complex(normal(rng), normal(rng));
  return f;
}

/// Sup-norm distance between two fields on the same grid.
inline double sup_distance(const imethod::Field& a, const imethod::Field& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  }
  return worst;
}

}  // namespace fixture
