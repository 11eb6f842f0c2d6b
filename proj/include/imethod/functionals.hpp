#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "imethod/dynamics.hpp"
#include "imethod/grid.hpp"

namespace imethod {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// dx^n sum |u|^2
double mass(const Field& f);

struct EnergyParts {
  double kinetic = 0.0;    // 1/2 int |grad u|^2, spectral
  double potential = 0.0;  // n / (2n + 4) int |u|^(2 + 4/n), pointwise quadrature
  double total() const { return kinetic + potential; }
};

EnergyParts energy(const Field& f, int dim);

/// energy(I_{N,s} f)
EnergyParts modified_energy(const Field& f, double threshold, double regularity, int dim);

/// (dx^n sum |u|^q)^(1/q); q = inf gives max |u|.
double lebesgue_norm(const Field& f, double q);

/// Nonnegative rational num/den in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// Exponent pair stored by reciprocals so the admissibility relation
/// 2/p = n (1/2 - 1/q) can be checked exactly. inv_p = 0 means p = inf.
struct AdmissiblePair {
  Rational inv_p;
  Rational inv_q;

  double p() const;
  double q() const;
  bool admissible(int dim) const;
};

/// (inf, 2), (2, 2n/(n-2)), (4(n-1)/n, 2(n-1)/(n-2)), plus (8/3, 4) for n = 3.
std::vector<AdmissiblePair> admissible_pairs(int dim);

struct SpacetimeNorm {
  double p = 2.0;
  double q = 2.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  double value = 0.0;
};

/// L_t^p over snapshot times inside [t_begin, t_end] of per-snapshot values,
/// trapezoid rule (max for p = inf). Throws when the interval leaves
/// [times.front(), times.back()] or holds fewer than one snapshot.
double time_norm(std::span<const double> times, std::span<const double> values, double p,
                 double t_begin, double t_end);

/// L_t^p L_x^q of a trajectory over [t_begin, t_end].
SpacetimeNorm spacetime_norm(const Trajectory& traj, double p, double q, double t_begin,
                             double t_end);
SpacetimeNorm spacetime_norm(const Trajectory& traj, double p, double q);

/// Im(conj(u) d_j u) per axis, spectral derivatives.
VectorField momentum_density(const Field& f);

/// -2 int p(x) . (K * rho)(x) dx with rho = |w|^2, p = Im(conj(w) grad w),
/// K(r) = r / |r|, K(0) = 0, evaluated by zero-padded FFT convolution.
/// Requires n = 3.
double interaction_action(const Field& w);

/// interaction_action(I_{N,s} f)
double morawetz_action(const Field& f, double threshold, double regularity);

/// d/dt E(Iu) along the flow, from Iu_t = i (Delta Iu - I(|u|^(4/n) u)):
/// Re int conj(Iu_t) (|Iu|^(4/n) Iu - I(|u|^(4/n) u)) dx.
double increment_rate(const Field& f, double threshold, double regularity, int dim);

}  // namespace imethod
