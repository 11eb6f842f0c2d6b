#include "imethod/multiplier.hpp"

#include <cmath>
#include <stdexcept>

#include "imethod/fft.hpp"

namespace imethod {

namespace {

double bump_tail(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

double cutoff_profile(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  const double a = bump_tail(2.0 - 2.0 * r);
  const double b = bump_tail(2.0 * r - 1.0);
  return a / (a + b);
}

std::string to_string(MultiplierKind kind) {
  switch (kind) {
    case MultiplierKind::i_operator: return "i_operator";
    case MultiplierKind::low_pass: return "low_pass";
    case MultiplierKind::high_pass: return "high_pass";
    case MultiplierKind::band: return "band";
    case MultiplierKind::fractional_gradient: return "fractional_gradient";
    case MultiplierKind::bracket_gradient: return "bracket_gradient";
    case MultiplierKind::custom: return "custom";
  }
  return "unknown";
}

MultiplierSpec MultiplierSpec::i_operator(double threshold, double regularity) {
  MultiplierSpec m;
  m.kind = MultiplierKind::i_operator;
  m.threshold = threshold;
  m.regularity = regularity;
  return m;
}

MultiplierSpec MultiplierSpec::low_pass(double scale) {
  MultiplierSpec m;
  m.kind = MultiplierKind::low_pass;
  m.scale = scale;
  return m;
}

MultiplierSpec MultiplierSpec::high_pass(double scale) {
  MultiplierSpec m;
  m.kind = MultiplierKind::high_pass;
  m.scale = scale;
  return m;
}

MultiplierSpec MultiplierSpec::band(double scale) {
  MultiplierSpec m;
  m.kind = MultiplierKind::band;
  m.scale = scale;
  return m;
}

MultiplierSpec MultiplierSpec::fractional_gradient(double order) {
  MultiplierSpec m;
  m.kind = MultiplierKind::fractional_gradient;
  m.order = order;
  return m;
}

MultiplierSpec MultiplierSpec::bracket_gradient(double order) {
  MultiplierSpec m;
  m.kind = MultiplierKind::bracket_gradient;
  m.order = order;
  return m;
}

MultiplierSpec MultiplierSpec::custom(std::function<double(double)> fn) {
  MultiplierSpec m;
  m.kind = MultiplierKind::custom;
  m.symbol_fn = std::move(fn);
  return m;
}

void MultiplierSpec::validate() const {
  switch (kind) {
    case MultiplierKind::i_operator:
      if (!(threshold > 0.0)) throw std::invalid_argument("i_operator threshold N must be > 0");
      if (!(regularity > 0.0 && regularity <= 1.0)) {
        throw std::invalid_argument("i_operator regularity s must lie in (0, 1]");
      }
      break;
    case MultiplierKind::low_pass:
    case MultiplierKind::high_pass:
    case MultiplierKind::band:
      if (!(scale > 0.0)) throw std::invalid_argument("projector scale M must be > 0");
      break;
    case MultiplierKind::fractional_gradient:
    case MultiplierKind::bracket_gradient:
      if (!std::isfinite(order)) throw std::invalid_argument("multiplier order must be finite");
      break;
    case MultiplierKind::custom:
      if (!symbol_fn) throw std::invalid_argument("custom multiplier needs a symbol function");
      break;
  }
}

double MultiplierSpec::symbol(double xi) const {
  switch (kind) {
    case MultiplierKind::i_operator:
      return xi <= threshold ? 1.0 : std::pow(threshold / xi, 1.0 - regularity);
    case MultiplierKind::low_pass:
      return cutoff_profile(xi / scale);
    case MultiplierKind::high_pass:
      return 1.0 - cutoff_profile(xi / scale);
    case MultiplierKind::band:
      return cutoff_profile(xi / scale) - cutoff_profile(2.0 * xi / scale);
    case MultiplierKind::fractional_gradient:
      return xi == 0.0 ? 0.0 : std::pow(xi, order);
    case MultiplierKind::bracket_gradient:
      return std::pow(1.0 + xi * xi, 0.5 * order);
    case MultiplierKind::custom:
      return symbol_fn(xi);
  }
  return 0.0;
}

void apply_symbol(SpectralField& F, const MultiplierSpec& spec) {
  spec.validate();
  if (spec.kind == MultiplierKind::fractional_gradient && spec.order < 0.0 &&
      F.coeffs[0] != complex(0.0, 0.0)) {
    throw std::domain_error("negative-order fractional gradient is singular on a nonzero mean");
  }
  const auto xi = F.grid.radial_frequencies();
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) F.coeffs[i] *= spec.symbol(xi[i]);
}

Field apply_multiplier(const Field& f, const MultiplierSpec& spec) {
  auto F = transform_forward(f);
  apply_symbol(F, spec);
  return transform_inverse(F);
}

Field apply_i_operator(const Field& f, double threshold, double regularity) {
  return apply_multiplier(f, MultiplierSpec::i_operator(threshold, regularity));
}

double l2_norm(const Field& f) {
  double sum = 0.0;
  for (const auto& v : f.values) sum += std::norm(v);
  return std::sqrt(f.grid.cell_volume() * sum);
}

double sobolev_norm(const SpectralField& F, double s, bool homogeneous) {
  if (!(s >= -2.0 && s <= 2.0)) throw std::invalid_argument("sobolev exponent must lie in [-2, 2]");
  const auto xi = F.grid.radial_frequencies();
  double sum = 0.0;
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
    double w;
    if (homogeneous) {
      w = xi[i] == 0.0 ? 0.0 : std::pow(xi[i], 2.0 * s);
    } else {
      w = std::pow(1.0 + xi[i] * xi[i], s);
    }
    sum += w * std::norm(F.coeffs[i]);
  }
  return std::sqrt(sum / F.grid.box_volume());
}

double sobolev_norm(const Field& f, double s, bool homogeneous) {
  return sobolev_norm(transform_forward(f), s, homogeneous);
}

Field partial_derivative(const Field& f, int axis) {
  if (axis < 0 || axis >= f.grid.dim()) throw std::invalid_argument("derivative axis out of range");
  auto F = transform_forward(f);
  const auto xi = f.grid.derivative_frequencies(axis);
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) F.coeffs[i] *= complex(0.0, xi[i]);
  return transform_inverse(F);
}

}  // namespace imethod
