#include "imethod/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "imethod/fft.hpp"
#include "imethod/multiplier.hpp"

namespace imethod {

double mass(const Field& f) {
  double sum = 0.0;
  for (const auto& v : f.values) sum += std::norm(v);
  return f.grid.cell_volume() * sum;
}

namespace {

double kinetic_part(const SpectralField& F) {
  const auto xi = F.grid.radial_frequencies();
  double sum = 0.0;
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) sum += xi[i] * xi[i] * std::norm(F.coeffs[i]);
  return 0.5 * sum / F.grid.box_volume();
}

double potential_part(const Field& f, int dim) {
  const double half_power = 1.0 + 2.0 / dim;  // |u|^(2 + 4/n) = (|u|^2)^(1 + 2/n)
  double sum = 0.0;
  for (const auto& v : f.values) sum += std::pow(std::norm(v), half_power);
  return static_cast<double>(dim) / (2.0 * dim + 4.0) * f.grid.cell_volume() * sum;
}

}  // namespace

EnergyParts energy(const Field& f, int dim) {
  if (dim != f.grid.dim()) throw std::invalid_argument("energy dimension mismatch");
  return {kinetic_part(transform_forward(f)), potential_part(f, dim)};
}

EnergyParts modified_energy(const Field& f, double threshold, double regularity, int dim) {
  if (dim != f.grid.dim()) throw std::invalid_argument("energy dimension mismatch");
  auto F = transform_forward(f);
  apply_symbol(F, MultiplierSpec::i_operator(threshold, regularity));
  const double kinetic = kinetic_part(F);
  return {kinetic, potential_part(transform_inverse(F), dim)};
}

double lebesgue_norm(const Field& f, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(q >= 1.0)) throw std::invalid_argument("Lebesgue exponent must be >= 1");
  double sum = 0.0;
  for (const auto& v : f.values) sum += std::pow(std::abs(v), q);
  return std::pow(f.grid.cell_volume() * sum, 1.0 / q);
}

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) throw std::invalid_argument("rational must be nonnegative with den > 0");
  const auto g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

double AdmissiblePair::p() const { return inv_p.num == 0 ? kInfinity : 1.0 / inv_p.value(); }

double AdmissiblePair::q() const { return inv_q.num == 0 ? kInfinity : 1.0 / inv_q.value(); }

bool AdmissiblePair::admissible(int dim) const {
  // 2 inv_p == n (1/2 - inv_q)  <=>  4 a d == n (b d - 2 c b)  with inv_p = a/b, inv_q = c/d
  const auto a = inv_p.num, b = inv_p.den, c = inv_q.num, d = inv_q.den;
  const bool relation = 4 * a * d == dim * (b * d - 2 * c * b);
  const bool p_ok = 2 * a <= b;  // p >= 2
  return relation && p_ok;
}

std::vector<AdmissiblePair> admissible_pairs(int dim) {
  if (dim != 3 && dim != 4) throw std::invalid_argument("admissible pairs declared for n = 3, 4");
  const std::int64_t n = dim;
  std::vector<AdmissiblePair> pairs{
      {Rational::make(0, 1), Rational::make(1, 2)},
      {Rational::make(1, 2), Rational::make(n - 2, 2 * n)},
      {Rational::make(n, 4 * (n - 1)), Rational::make(n - 2, 2 * (n - 1))},
  };
  const AdmissiblePair eight_thirds{Rational::make(3, 8), Rational::make(1, 4)};
  if (dim == 3 && std::none_of(pairs.begin(), pairs.end(), [&](const AdmissiblePair& ap) {
        return ap.inv_p == eight_thirds.inv_p && ap.inv_q == eight_thirds.inv_q;
      })) {
    pairs.push_back(eight_thirds);
  }
  return pairs;
}

double time_norm(std::span<const double> times, std::span<const double> values, double p,
                 double t_begin, double t_end) {
  if (times.size() != values.size() || times.empty()) {
    throw std::invalid_argument("time_norm needs matching, nonempty samples");
  }
  const double slack = 1e-9 * std::max(1.0, std::abs(times.back()));
  if (t_begin > t_end || t_begin < times.front() - slack || t_end > times.back() + slack) {
    throw std::out_of_range("interval outside the trajectory time range");
  }
  std::vector<double> ts, vs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_begin - slack && times[i] <= t_end + slack) {
      ts.push_back(times[i]);
      vs.push_back(values[i]);
    }
  }
  if (ts.empty()) throw std::out_of_range("no snapshots inside the interval");
  if (std::isinf(p)) return *std::max_element(vs.begin(), vs.end());
  double sum = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    sum += 0.5 * (ts[i] - ts[i - 1]) * (std::pow(vs[i], p) + std::pow(vs[i - 1], p));
  }
  return std::pow(sum, 1.0 / p);
}

SpacetimeNorm spacetime_norm(const Trajectory& traj, double p, double q, double t_begin,
                             double t_end) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("spacetime exponents must be >= 1");
  std::vector<double> lq(traj.states.size());
  for (std::size_t i = 0; i < lq.size(); ++i) lq[i] = lebesgue_norm(traj.states[i], q);
  return {p, q, t_begin, t_end, time_norm(traj.times, lq, p, t_begin, t_end)};
}

SpacetimeNorm spacetime_norm(const Trajectory& traj, double p, double q) {
  if (traj.times.empty()) throw std::invalid_argument("empty trajectory");
  return spacetime_norm(traj, p, q, traj.times.front(), traj.times.back());
}

VectorField momentum_density(const Field& f) {
  const auto F = transform_forward(f);
  VectorField out{f.grid, {}};
  for (int a = 0; a < f.grid.dim(); ++a) {
    auto dF = F;
    const auto xi = f.grid.derivative_frequencies(a);
    for (std::size_t i = 0; i < dF.coeffs.size(); ++i) dF.coeffs[i] *= complex(0.0, xi[i]);
    const auto du = transform_inverse(dF);
    std::vector<double> comp(f.values.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
      comp[i] = (std::conj(f.values[i]) * du.values[i]).imag();
    }
    out.components.push_back(std::move(comp));
  }
  return out;
}

double interaction_action(const Field& w) {
  const Grid& g = w.grid;
  if (g.dim() != 3) throw std::invalid_argument("interaction Morawetz action is defined for n = 3");
  const int G = g.points();
  const int P = 2 * G;
  const std::size_t padded = static_cast<std::size_t>(P) * P * P;
  const double dx = g.dx();
  const auto pad_index = [P](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * P + j) * P + k;
  };

  std::vector<complex> rho(padded, 0.0);
  for (int i = 0; i < G; ++i) {
    for (int j = 0; j < G; ++j) {
      for (int k = 0; k < G; ++k) {
        rho[pad_index(i, j, k)] = std::norm(w.values[(static_cast<std::size_t>(i) * G + j) * G + k]);
      }
    }
  }
  fft::forward(3, P, rho);

  const auto momentum = momentum_density(w);
  const auto offset = [G, P, dx](int m) { return (m < G ? m : m - P) * dx; };
  const double scale = g.cell_volume() / static_cast<double>(padded);

  double action = 0.0;
  std::vector<complex> kernel(padded);
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < P; ++i) {
      for (int j = 0; j < P; ++j) {
        for (int k = 0; k < P; ++k) {
          const double d[3] = {offset(i), offset(j), offset(k)};
          const double r = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
          kernel[pad_index(i, j, k)] = r == 0.0 ? 0.0 : d[a] / r;
        }
      }
    }
    fft::forward(3, P, kernel);
    for (std::size_t i = 0; i < padded; ++i) kernel[i] *= rho[i];
    fft::backward(3, P, kernel);

    double sum = 0.0;
    for (int i = 0; i < G; ++i) {
      for (int j = 0; j < G; ++j) {
        for (int k = 0; k < G; ++k) {
          const auto flat = (static_cast<std::size_t>(i) * G + j) * G + k;
          sum += momentum.components[a][flat] * kernel[pad_index(i, j, k)].real();
        }
      }
    }
    action += sum * scale;
  }
  return -2.0 * g.cell_volume() * action;
}

double morawetz_action(const Field& f, double threshold, double regularity) {
  if (f.grid.dim() != 3) throw std::invalid_argument("interaction Morawetz action is defined for n = 3");
  return interaction_action(apply_i_operator(f, threshold, regularity));
}

double increment_rate(const Field& f, double threshold, double regularity, int dim) {
  if (dim != f.grid.dim()) throw std::invalid_argument("increment_rate dimension mismatch");
  const auto spec = MultiplierSpec::i_operator(threshold, regularity);

  auto U = transform_forward(f);
  apply_symbol(U, spec);
  const Field iu = transform_inverse(U);

  auto NL = transform_forward(nonlinearity(f, dim));
  apply_symbol(NL, spec);
  const Field i_nl = transform_inverse(NL);

  // Iu_t = i (Delta Iu - I(F(u)))
  const auto xi = f.grid.radial_frequencies();
  SpectralField dt_hat{f.grid, std::vector<complex>(U.coeffs.size())};
  for (std::size_t i = 0; i < U.coeffs.size(); ++i) {
    dt_hat.coeffs[i] = complex(0.0, 1.0) * (-xi[i] * xi[i] * U.coeffs[i] - NL.coeffs[i]);
  }
  const Field iu_t = transform_inverse(dt_hat);
  const Field nl_iu = nonlinearity(iu, dim);

  double sum = 0.0;
  for (std::size_t i = 0; i < iu.values.size(); ++i) {
    sum += (std::conj(iu_t.values[i]) * (nl_iu.values[i] - i_nl.values[i])).real();
  }
  return f.grid.cell_volume() * sum;
}

}  // namespace imethod
