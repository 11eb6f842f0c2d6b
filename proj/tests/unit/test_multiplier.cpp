#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "imethod/fft.hpp"
#include "imethod/multiplier.hpp"
#include "imethod/verification.hpp"

using namespace imethod;

namespace {

Field plane_wave(const Grid& g, complex amplitude, const std::vector<int>& k) {
  auto f = Field::zeros(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) phase += g.frequency_step() * k[a] * g.coordinate(idx[a]);
    f.values[i] = amplitude * std::polar(1.0, phase);
  }
  return f;
}

}  // namespace

TEST_CASE("cutoff profile values") {
  CHECK(cutoff_profile(0.25) == 1.0);
  CHECK(cutoff_profile(0.5) == 1.0);
  CHECK(cutoff_profile(1.5) == 0.0);
  CHECK(cutoff_profile(1.0) == 0.0);
  CHECK(cutoff_profile(0.75) == doctest::Approx(0.5).epsilon(1e-14));
  double previous = 1.0;
  for (double r = 0.5; r <= 1.0; r += 0.01) {
    const double v = cutoff_profile(r);
    CHECK(v <= previous);
    CHECK(v >= 0.0);
    previous = v;
  }
}

TEST_CASE("I-operator damps a plane wave at twice the threshold") {
  const auto g = Grid::make(3, 16, 2.0 * kPi);
  const double N = 2.0;
  const auto f = plane_wave(g, complex(0.3, -0.4), {4, 0, 0});
  const auto iu = apply_i_operator(f, N, 0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(iu.values[i] - f.values[i] / std::sqrt(2.0)) < 1e-12);
  }
}

TEST_CASE("I-operator is the identity below the threshold") {
  const auto g = Grid::make(2, 16, 2.0 * kPi);
  const auto f = fixture::random_field(g, 3);
  const auto iu = apply_i_operator(f, 2.0 * g.max_frequency(), 0.4);
  CHECK(fixture::sup_distance(f, iu) < 1e-12);
}

TEST_CASE("wide low-pass is the identity") {
  const auto g = Grid::make(3, 8, 1.0);
  const auto f = fixture::random_field(g, 4);
  const auto lp = apply_multiplier(f, MultiplierSpec::low_pass(2.0 * g.max_frequency()));
  CHECK(fixture::sup_distance(f, lp) < 1e-12);
}

TEST_CASE("low and high projections sum to the field") {
  const auto g = Grid::make(2, 32, 2.0 * kPi);
  const auto f = fixture::random_field(g, 8);
  for (double M : {1.0, 3.5, 10.0}) {
    const auto lo = apply_multiplier(f, MultiplierSpec::low_pass(M));
    const auto hi = apply_multiplier(f, MultiplierSpec::high_pass(M));
    auto sum = lo;
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += hi.values[i];
    CHECK(fixture::sup_distance(sum, f) < 1e-12);
  }
}

TEST_CASE("dyadic bands telescope") {
  const auto g = Grid::make(1, 64, 2.0 * kPi);
  const auto f = fixture::random_field(g, 12);
  const double top = 256.0;
  auto total = apply_multiplier(f, MultiplierSpec::low_pass(0.5));
  for (double M = 1.0; M <= top; M *= 2.0) {
    const auto band = apply_multiplier(f, MultiplierSpec::band(M));
    for (std::size_t i = 0; i < total.values.size(); ++i) total.values[i] += band.values[i];
  }
  CHECK(fixture::sup_distance(total, apply_multiplier(f, MultiplierSpec::low_pass(top))) < 1e-12);
}

TEST_CASE("Fourier multipliers commute") {
  const auto g = Grid::make(2, 16, 3.0);
  const auto f = fixture::random_field(g, 21);
  const auto a = apply_i_operator(apply_multiplier(f, MultiplierSpec::band(8.0)), 5.0, 0.6);
  const auto b = apply_multiplier(apply_i_operator(f, 5.0, 0.6), MultiplierSpec::band(8.0));
  CHECK(fixture::sup_distance(a, b) < 1e-12);
}

TEST_CASE("Sobolev norm of a plane wave") {
  const auto g = Grid::make(3, 16, 2.0 * kPi);
  const double a = 1.7;
  const auto f = plane_wave(g, a, {0, 2, 0});
  CHECK(sobolev_norm(f, 1.0, true) ==
        doctest::Approx(2.0 * a * std::pow(g.length(), 1.5)).epsilon(1e-12));
  CHECK(sobolev_norm(f, 0.0, false) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("Sobolev norms are monotone in s") {
  const auto g = Grid::make(2, 16, 2.0 * kPi);
  const auto f = fixture::random_field(g, 30);
  double previous = 0.0;
  for (double s = -2.0; s <= 2.0; s += 0.25) {
    const double v = sobolev_norm(f, s, false);
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("I-operator bound from H^s to H^1 on seeded fields") {
  const auto g = Grid::make(3, 16, 2.0 * kPi);
  for (unsigned seed = 0; seed < 100; ++seed) {
    const double N = 1.0 + (seed % 7);
    const double s = 0.3 + 0.07 * (seed % 10);
    const auto f = fixture::random_field(g, seed);
    const double lhs = sobolev_norm(apply_i_operator(f, N, s), 1.0, false);
    const double rhs =
        std::pow(N, 1.0 - s) * std::sqrt(1.0 + 1.0 / (N * N)) * sobolev_norm(f, s, false);
    CHECK(lhs <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("spectral derivative of a sine") {
  const auto g = Grid::make(1, 32, 2.0 * kPi);
  auto f = Field::zeros(g);
  for (int i = 0; i < 32; ++i) f.values[i] = std::sin(3.0 * g.coordinate(i));
  const auto d = partial_derivative(f, 0);
  for (int i = 0; i < 32; ++i) CHECK(std::abs(d.values[i] - 3.0 * std::cos(3.0 * g.coordinate(i))) < 1e-12);
  CHECK_THROWS_AS(partial_derivative(f, 1), std::invalid_argument);
}

TEST_CASE("multiplier parameter validation") {
  CHECK_THROWS_AS(MultiplierSpec::i_operator(0.0, 0.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(MultiplierSpec::i_operator(1.0, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(MultiplierSpec::i_operator(1.0, 1.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(MultiplierSpec::low_pass(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(MultiplierSpec::custom(nullptr).validate(), std::invalid_argument);
  CHECK_NOTHROW(MultiplierSpec::bracket_gradient(-1.0).validate());
  CHECK(to_string(MultiplierKind::band) == "band");
}

TEST_CASE("negative-order gradient needs a mean-zero field") {
  const auto g = Grid::make(1, 16, 2.0 * kPi);
  auto F = transform_forward(fixture::random_field(g, 2));
  CHECK_THROWS_AS(apply_symbol(F, MultiplierSpec::fractional_gradient(-1.0)), std::domain_error);
  F.coeffs[0] = 0.0;
  CHECK_NOTHROW(apply_symbol(F, MultiplierSpec::fractional_gradient(-1.0)));
}

TEST_CASE("Sobolev exponent range is enforced") {
  const auto g = Grid::make(1, 16, 1.0);
  const auto f = fixture::random_field(g, 1);
  CHECK_THROWS_AS(sobolev_norm(f, 2.5, true), std::invalid_argument);
  CHECK_THROWS_AS(sobolev_norm(f, -3.0, false), std::invalid_argument);
}
