#pragma once

#include <functional>
#include <string>

#include "imethod/grid.hpp"

namespace imethod {

/// Smooth radial bump: 1 on [0, 1/2], 0 on [1, inf), C-infinity blend between.
double cutoff_profile(double r);

enum class MultiplierKind {
  i_operator,
  low_pass,
  high_pass,
  band,
  fractional_gradient,
  bracket_gradient,
  custom,
};

std::string to_string(MultiplierKind kind);

/// Radial Fourier multiplier m(|xi|).
///
/// i_operator:          1 for |xi| <= N, (N / |xi|)^(1 - s) above.
/// low_pass (P_<=M):    phi(|xi| / M)
/// high_pass (P_>M):    1 - phi(|xi| / M)
/// band (P_M):          phi(|xi| / M) - phi(2 |xi| / M)
/// fractional_gradient: |xi|^order, 0 at xi = 0
/// bracket_gradient:    (1 + |xi|^2)^(order / 2)
/// custom:              user callable
struct MultiplierSpec {
  MultiplierKind kind = MultiplierKind::low_pass;
  double threshold = 1.0;   // N
  double regularity = 1.0;  // s
  double scale = 1.0;       // M
  double order = 0.0;
  std::function<double(double)> symbol_fn;

  static MultiplierSpec i_operator(double threshold, double regularity);
  static MultiplierSpec low_pass(double scale);
  static MultiplierSpec high_pass(double scale);
  static MultiplierSpec band(double scale);
  static MultiplierSpec fractional_gradient(double order);
  static MultiplierSpec bracket_gradient(double order);
  static MultiplierSpec custom(std::function<double(double)> fn);

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;

  double symbol(double xi_abs) const;
};

/// Multiplies coefficients in place by spec.symbol(|xi|).
void apply_symbol(SpectralField& F, const MultiplierSpec& spec);

Field apply_multiplier(const Field& f, const MultiplierSpec& spec);

/// Convenience for the I-operator.
Field apply_i_operator(const Field& f, double threshold, double regularity);

/// Discrete L^2 norm: (dx^n sum |u|^2)^(1/2).
double l2_norm(const Field& f);

/// Homogeneous: (L^-n sum |xi|^(2s) |u_hat|^2)^(1/2), zero mode excluded.
/// Inhomogeneous: weight (1 + |xi|^2)^s. Requires s in [-2, 2].
double sobolev_norm(const Field& f, double s, bool homogeneous);
double sobolev_norm(const SpectralField& F, double s, bool homogeneous);

/// Spectral derivative d/dx_axis.
Field partial_derivative(const Field& f, int axis);

}  // namespace imethod
