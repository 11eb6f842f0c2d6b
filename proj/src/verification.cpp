#include "imethod/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "imethod/fft.hpp"
#include "imethod/multiplier.hpp"
#include "imethod/parallel.hpp"

namespace imethod {

namespace {

std::string key(const std::string& base, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s[%.6g]", base.c_str(), value);
  return buf;
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

double trapezoid(std::span<const double> t, std::span<const double> v) {
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) sum += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return sum;
}

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  LogLogFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog: nonpositive sample");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.conclusive = x.size() >= 3;
  return fit;
}

// ---------------------------------------------------------------------------
// Rough data

void RoughDataSpec::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("rough data delta must be > 0");
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("rough data s must lie in (0, 1]");
  if (!std::isfinite(s) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("rough data parameters must be finite");
  }
}

Field rough_field(const Grid& grid, const RoughDataSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const auto xi = grid.radial_frequencies();
  const double decay = -0.5 * (spec.s + 0.5 * grid.dim() + spec.delta);
  SpectralField F{grid, std::vector<complex>(grid.size())};
  for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
    // 53-bit uniform in [0, 1), independent of the standard library's distributions
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double magnitude = spec.amplitude * std::pow(1.0 + xi[i] * xi[i], decay);
    F.coeffs[i] = std::polar(magnitude, 2.0 * kPi * unit);
  }
  return transform_inverse(F);
}

// ---------------------------------------------------------------------------
// Frequency tail

double frequency_tail_budget(double regularity) {
  double sum = 1.0;
  for (int k = -5; k <= 5; ++k) sum += std::pow(2.0, -k * (1.0 - regularity));
  return sum;
}

CheckReport check_frequency_tail(const Field& u, double threshold, double regularity,
                                 double scale) {
  if (!(threshold > 0.0) || !(scale >= threshold)) {
    throw std::invalid_argument("frequency tail check needs M >= N > 0");
  }
  CheckReport r;
  r.name = "frequency_tail";
  r.inputs = {{"N", threshold}, {"s", regularity}, {"M", scale}};
  r.tolerance = 1e-10;
  const double budget = frequency_tail_budget(regularity);
  r.measured["budget"] = budget;

  const double weight = std::pow(threshold, 1.0 - regularity);
  const auto ratio_of = [&](const Field& g, double& lhs, double& rhs) {
    lhs = sobolev_norm(apply_multiplier(g, MultiplierSpec::high_pass(scale)), regularity, true) *
          weight;
    rhs = sobolev_norm(apply_i_operator(g, threshold, regularity), 1.0, true);
  };

  double lhs = 0.0, rhs = 0.0;
  ratio_of(u, lhs, rhs);
  r.bound_lhs = lhs;
  r.bound_rhs = rhs;
  if (rhs == 0.0) {
    r.verdict = Verdict::pass;
    r.notes.emplace_back("grad I u vanishes; trivially satisfied");
    return r;
  }
  r.ratio = lhs / rhs;
  r.measured["ratio"] = *r.ratio;
  r.measured["within_budget"] = *r.ratio <= budget ? 1.0 : 0.0;
  if (*r.ratio > budget) r.notes.emplace_back("general ratio exceeds the dyadic budget");

  const double band_edge = std::max(4.0 * threshold, scale);
  const auto high = apply_multiplier(
      u, MultiplierSpec::custom([band_edge](double xi) { return xi > band_edge ? 1.0 : 0.0; }));
  double hl = 0.0, hr = 0.0;
  ratio_of(high, hl, hr);
  if (hr == 0.0) {
    r.verdict = Verdict::pass;
    r.notes.emplace_back("no spectral content above max(4N, M); identity branch vacuous");
    return r;
  }
  const double high_ratio = hl / hr;
  r.measured["high_band_ratio"] = high_ratio;
  r.measured["high_band_deviation"] = std::abs(high_ratio - 1.0);
  r.verdict = std::abs(high_ratio - 1.0) <= r.tolerance ? Verdict::pass : Verdict::fail;
  return r;
}

CheckReport check_frequency_tail_ensemble(const Grid& grid, const RoughDataSpec& base, int count,
                                          double threshold, double scale) {
  if (count < 1) throw std::invalid_argument("frequency tail ensemble needs at least one field");
  CheckReport r;
  r.name = "frequency_tail";
  r.inputs = {{"N", threshold},
              {"s", base.s},
              {"M", scale},
              {"count", static_cast<double>(count)},
              {"seed", static_cast<double>(base.seed)}};
  r.tolerance = 1e-10;
  const double budget = frequency_tail_budget(base.s);
  r.measured["budget"] = budget;
  double worst_ratio = 0.0;
  double worst_deviation = 0.0;
  int over_budget = 0;
  bool hard = true;
  for (int k = 0; k < count; ++k) {
    RoughDataSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(k);
    const auto one = check_frequency_tail(rough_field(grid, spec), threshold, base.s, scale);
    if (one.failed()) hard = false;
    const double ratio = one.ratio.value_or(0.0);
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > budget) ++over_budget;
    if (auto it = one.measured.find("high_band_deviation"); it != one.measured.end()) {
      worst_deviation = std::max(worst_deviation, it->second);
    }
  }
  r.ratio = worst_ratio;
  r.bound_lhs = worst_ratio;
  r.bound_rhs = budget;
  r.measured["max_ratio"] = worst_ratio;
  r.measured["over_budget"] = over_budget;
  r.measured["max_high_band_deviation"] = worst_deviation;
  if (!hard) r.notes.emplace_back("high-band identity violated for at least one field");
  if (over_budget > 0) r.notes.emplace_back("general ratio exceeds the dyadic budget");
  r.verdict = hard && over_budget == 0 ? Verdict::pass : Verdict::fail;
  return r;
}

// ---------------------------------------------------------------------------
// Smoothness decay of |u|^(4/n)

CheckReport check_smoothness_decay(const Field& u, double threshold, double regularity,
                                   std::span<const double> scales) {
  const int n = u.grid.dim();
  if (n != 3 && n != 4) throw std::invalid_argument("smoothness decay check needs n = 3 or 4");
  CheckReport r;
  r.name = "smoothness_decay";
  r.inputs = {{"N", threshold}, {"s", regularity}};
  r.tolerance = 0.2;

  Field power = Field::zeros(u.grid);
  double peak = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    power.values[i] = std::pow(std::norm(u.values[i]), 2.0 / n);
    peak = std::max(peak, power.values[i].real());
  }
  if (peak == 0.0) throw std::invalid_argument("smoothness decay check on an all-zero field");

  const double bracket =
      sobolev_norm(apply_i_operator(u, threshold, regularity), 1.0, false);
  const double bracket_power = std::pow(bracket, 4.0 / n);

  std::vector<double> low_m, low_tail, high_m, high_tail;
  double max_normalized = 0.0;
  for (double M : sorted_copy(scales)) {
    const double tail =
        lebesgue_norm(apply_multiplier(power, MultiplierSpec::high_pass(M)), 0.5 * n);
    r.measured[key("tail", M)] = tail;
    if (M >= threshold) {
      const double normalized =
          tail * std::pow(M, regularity) * std::pow(threshold, 1.0 - regularity) / bracket_power;
      r.measured[key("normalized", M)] = normalized;
      max_normalized = std::max(max_normalized, normalized);
    }
    // Tails at roundoff level carry no slope information.
    if (tail <= 1e-13 * peak) continue;
    (M < threshold ? low_m : high_m).push_back(M);
    (M < threshold ? low_tail : high_tail).push_back(tail);
  }
  r.measured["max_normalized_ratio"] = max_normalized;
  r.ratio = max_normalized;

  const auto low = fit_loglog(low_m, low_tail);
  if (low.conclusive) r.measured["slope_below_N"] = low.slope;
  const auto high = fit_loglog(high_m, high_tail);
  if (!high.conclusive) {
    r.verdict = Verdict::inconclusive;
    r.notes.emplace_back("fewer than 3 resolvable scales at or above N");
    return r;
  }
  r.slope = high.slope;
  r.measured["slope_at_or_above_N"] = high.slope;
  r.bound_lhs = high.slope;
  r.bound_rhs = -regularity + r.tolerance;
  r.verdict = high.slope <= -regularity + r.tolerance ? Verdict::pass : Verdict::fail;
  return r;
}

// ---------------------------------------------------------------------------
// Scaling

Field scaling_map(const Field& u, int lambda) {
  if (!is_power_of_two(lambda)) throw std::invalid_argument("lambda must be a power of two");
  if (lambda == 1) return u;
  const Grid& g = u.grid;
  const int n = g.dim();
  const int G = g.points();
  const Grid fine = Grid::make(n, G * lambda, g.length() * lambda);
  const auto U = transform_forward(u);
  SpectralField V{fine, std::vector<complex>(fine.size())};
  const double amp = std::pow(static_cast<double>(lambda), 0.5 * n);
  const int FG = fine.points();
  for (std::size_t i = 0; i < U.coeffs.size(); ++i) {
    const auto idx = g.unflatten(i);
    std::size_t flat = 0;
    for (int a = 0; a < n; ++a) {
      const int k = g.wavenumber(idx[a]);
      flat = flat * FG + static_cast<std::size_t>(k >= 0 ? k : k + FG);
    }
    V.coeffs[flat] = amp * U.coeffs[i];
  }
  return transform_inverse(V);
}

CheckReport check_scaling(const Field& u0, int lambda, const StepConfig& cfg, int dim,
                          double tolerance, double mass_tolerance) {
  const auto pairs = admissible_pairs(dim);
  CheckReport r;
  r.name = "scaling";
  r.inputs = {{"lambda", static_cast<double>(lambda)}, {"dt", cfg.dt}, {"t_final", cfg.t_final}};
  r.tolerance = tolerance;

  const Field scaled = scaling_map(u0, lambda);
  const double m0 = mass(u0);
  const double m1 = mass(scaled);
  const double mass_dev = m0 == 0.0 ? std::abs(m1) : std::abs(m1 / m0 - 1.0);
  r.measured["mass_deviation"] = mass_dev;

  StepConfig scaled_cfg = cfg;
  const double l2 = static_cast<double>(lambda) * lambda;
  scaled_cfg.dt = cfg.dt * l2;
  scaled_cfg.t_final = cfg.t_final * l2;

  struct Series {
    std::vector<double> times;
    std::vector<std::vector<double>> lq;
  };
  const auto run = [&](const Field& init, const StepConfig& c) {
    Series s;
    s.lq.resize(pairs.size());
    evolve(init, c, dim, [&](double t, const Field& state) {
      s.times.push_back(t);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        s.lq[k].push_back(lebesgue_norm(state, pairs[k].q()));
      }
    });
    return s;
  };
  const Series base = run(u0, cfg);
  const Series other = run(scaled, scaled_cfg);

  double worst = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double p = pairs[k].p();
    const double a = time_norm(base.times, base.lq[k], p, 0.0, base.times.back());
    const double b = time_norm(other.times, other.lq[k], p, 0.0, other.times.back());
    const double dev = a == 0.0 ? std::abs(b) : std::abs(b / a - 1.0);
    char name[64];
    std::snprintf(name, sizeof name, "norm_deviation[p=%.6g,q=%.6g]", p, pairs[k].q());
    r.measured[name] = dev;
    worst = std::max(worst, dev);
  }
  r.measured["max_norm_deviation"] = worst;
  r.bound_lhs = worst;
  r.bound_rhs = tolerance;
  r.verdict = (worst <= tolerance && mass_dev <= mass_tolerance) ? Verdict::pass : Verdict::fail;
  if (mass_dev > mass_tolerance) r.notes.emplace_back("lattice dilation changed the mass");
  return r;
}

// ---------------------------------------------------------------------------
// Almost conservation sweep

SweepResult sweep_almost_conservation(const Field& u0, double regularity,
                                      std::span<const double> thresholds, const StepConfig& cfg,
                                      int dim, double max_slope, double consistency_tolerance) {
  const auto Ns = sorted_copy(thresholds);
  SweepResult out;
  out.points.resize(Ns.size());
  parallel_for(Ns.size(), [&](std::size_t i) {
    const double N = Ns[i];
    std::vector<double> times, energies, rates;
    evolve(u0, cfg, dim, [&](double t, const Field& state) {
      times.push_back(t);
      energies.push_back(modified_energy(state, N, regularity, dim).total());
      rates.push_back(increment_rate(state, N, regularity, dim));
    });
    SweepPoint& pt = out.points[i];
    pt.threshold = N;
    pt.control = N >= u0.grid.max_frequency();
    pt.initial_modified_energy = energies.front();
    for (double e : energies) pt.sup_increment = std::max(pt.sup_increment, std::abs(e - energies.front()));
    pt.endpoint_change = energies.back() - energies.front();
    pt.integrated_rate = trapezoid(times, rates);
    pt.consistency = pt.endpoint_change == 0.0
                         ? std::abs(pt.integrated_rate)
                         : std::abs(pt.integrated_rate - pt.endpoint_change) /
                               std::abs(pt.endpoint_change);
  });

  CheckReport& r = out.report;
  r.name = "almost_conservation";
  r.inputs = {{"s", regularity}, {"dt", cfg.dt}, {"t_final", cfg.t_final},
              {"n", static_cast<double>(dim)}};
  r.tolerance = consistency_tolerance;

  std::vector<double> fit_n, fit_d;
  bool consistent = true;
  bool decreasing = true;
  for (const auto& pt : out.points) {
    r.measured[key("sup_increment", pt.threshold)] = pt.sup_increment;
    r.measured[key("integrated_rate", pt.threshold)] = pt.integrated_rate;
    r.measured[key("endpoint_change", pt.threshold)] = pt.endpoint_change;
    if (pt.control) {
      r.measured[key("control_floor", pt.threshold)] = pt.sup_increment;
      continue;
    }
    r.measured[key("consistency", pt.threshold)] = pt.consistency;
    if (pt.consistency > consistency_tolerance) consistent = false;
    if (!fit_d.empty() && !(pt.sup_increment < fit_d.back())) decreasing = false;
    fit_n.push_back(pt.threshold);
    fit_d.push_back(pt.sup_increment);
  }
  r.measured["strictly_decreasing"] = decreasing ? 1.0 : 0.0;

  const bool positive = std::all_of(fit_d.begin(), fit_d.end(), [](double d) { return d > 0.0; });
  LogLogFit fit;
  if (positive) fit = fit_loglog(fit_n, fit_d);
  if (fit.conclusive) {
    r.slope = fit.slope;
    r.bound_lhs = fit.slope;
    r.bound_rhs = max_slope;
  }
  if (!consistent) {
    r.verdict = Verdict::fail;
    r.notes.emplace_back("integrated increment rate disagrees with the modified-energy change");
  } else if (!fit.conclusive) {
    r.verdict = Verdict::inconclusive;
    r.notes.emplace_back("slope fit needs at least 3 non-control thresholds");
  } else {
    r.verdict = (decreasing && fit.slope <= max_slope) ? Verdict::pass : Verdict::fail;
  }
  return out;
}

SweepResult sweep_almost_conservation(const Grid& grid, const RoughDataSpec& data,
                                      std::span<const double> thresholds, const StepConfig& cfg,
                                      double max_slope, double consistency_tolerance) {
  auto result = sweep_almost_conservation(rough_field(grid, data), data.s, thresholds, cfg,
                                          grid.dim(), max_slope, consistency_tolerance);
  result.report.inputs["seed"] = static_cast<double>(data.seed);
  result.report.inputs["delta"] = data.delta;
  result.report.inputs["amplitude"] = data.amplitude;
  return result;
}

CheckReport check_modified_energy_identity(const SweepResult& sweep, const Field& u0,
                                           double regularity, int dim, double tolerance,
                                           double rate_tolerance) {
  CheckReport r;
  r.name = "modified_energy_identity";
  r.inputs = {{"s", regularity}, {"n", static_cast<double>(dim)}};
  r.tolerance = tolerance;
  bool consistent = true;
  double worst = 0.0;
  for (const auto& pt : sweep.points) {
    if (pt.control) continue;
    r.measured[key("consistency", pt.threshold)] = pt.consistency;
    worst = std::max(worst, pt.consistency);
    if (pt.consistency > tolerance) consistent = false;
  }
  r.bound_lhs = worst;
  r.bound_rhs = tolerance;

  const double identity_threshold = 2.0 * u0.grid.max_frequency();
  const Field F = nonlinearity(u0, dim);
  const double f_norm = l2_norm(F);
  const double scale = (sobolev_norm(u0, 2.0, true) + f_norm) * f_norm;
  const double rate = increment_rate(u0, identity_threshold, regularity, dim);
  const double relative = scale == 0.0 ? std::abs(rate) : std::abs(rate) / scale;
  r.measured["control_rate"] = rate;
  r.measured["control_rate_relative"] = relative;
  const bool vanishes = relative <= rate_tolerance;
  if (!vanishes) r.notes.emplace_back("increment rate does not vanish when I is the identity");
  if (!consistent) r.notes.emplace_back("integrated rate disagrees with the energy change");
  r.verdict = consistent && vanishes ? Verdict::pass : Verdict::fail;
  return r;
}

// ---------------------------------------------------------------------------
// Interaction Morawetz

InteractionMorawetzProbe::InteractionMorawetzProbe(int dim, double budget)
    : dim_(dim), budget_(budget) {
  if (dim != 3 && dim != 4) throw std::invalid_argument("interaction Morawetz check needs n = 3 or 4");
  q_ = 2.0 * (dim - 1) / (dim - 2);
}

void InteractionMorawetzProbe::observe(double t, const Field& state) {
  if (times_.empty()) initial_l2_ = l2_norm(state);
  times_.push_back(t);
  lq_.push_back(lebesgue_norm(state, q_));
  max_half_derivative_ = std::max(max_half_derivative_, sobolev_norm(state, 0.5, true));
}

CheckReport InteractionMorawetzProbe::finish() const {
  CheckReport r;
  r.name = "interaction_morawetz";
  r.inputs = {{"n", static_cast<double>(dim_)}};
  r.tolerance = budget_;
  if (times_.empty()) throw std::logic_error("interaction Morawetz probe saw no snapshots");
  const double n = dim_;
  const double p = 2.0 * (n - 1.0);
  const double lhs = time_norm(times_, lq_, p, times_.front(), times_.back());
  const double rhs =
      std::sqrt(initial_l2_) * std::pow(max_half_derivative_, (n - 2.0) / (n - 1.0));
  r.bound_lhs = lhs;
  r.bound_rhs = rhs;
  r.measured["lhs"] = lhs;
  r.measured["rhs"] = rhs;
  if (rhs == 0.0) {
    r.verdict = Verdict::pass;
    r.notes.emplace_back("zero data; trivially satisfied");
    return r;
  }
  r.ratio = lhs / rhs;
  r.measured["ratio"] = *r.ratio;

  const double p_short = 4.0 * (n - 1.0) / n;
  const double span = times_.back() - times_.front();
  const double lhs_short = time_norm(times_, lq_, p_short, times_.front(), times_.back());
  const double rhs_short = std::pow(span, (n - 2.0) / (4.0 * (n - 1.0))) * rhs;
  r.measured["lhs_time_weighted"] = lhs_short;
  r.measured["rhs_time_weighted"] = rhs_short;
  if (rhs_short > 0.0) r.measured["ratio_time_weighted"] = lhs_short / rhs_short;
  r.verdict = *r.ratio <= budget_ ? Verdict::pass : Verdict::fail;
  return r;
}

CheckReport check_interaction_morawetz(const Trajectory& traj, double budget) {
  InteractionMorawetzProbe probe(traj.dim, budget);
  for (std::size_t i = 0; i < traj.states.size(); ++i) probe.observe(traj.times[i], traj.states[i]);
  return probe.finish();
}

CheckReport check_interaction_morawetz_scaling(const Field& u0, int lambda, const StepConfig& cfg,
                                               int dim, double budget, double tolerance) {
  const auto probe_run = [&](const Field& init, const StepConfig& c) {
    InteractionMorawetzProbe probe(dim, budget);
    evolve(init, c, dim, [&](double t, const Field& state) { probe.observe(t, state); });
    return probe.finish();
  };
  StepConfig scaled_cfg = cfg;
  const double l2 = static_cast<double>(lambda) * lambda;
  scaled_cfg.dt = cfg.dt * l2;
  scaled_cfg.t_final = cfg.t_final * l2;
  const auto base = probe_run(u0, cfg);
  const auto other = probe_run(scaling_map(u0, lambda), scaled_cfg);

  CheckReport r = base;
  r.inputs["lambda"] = lambda;
  r.inputs["dt"] = cfg.dt;
  r.inputs["t_final"] = cfg.t_final;
  const double a = base.ratio.value_or(0.0);
  const double b = other.ratio.value_or(0.0);
  const double drift = a == 0.0 ? std::abs(b) : std::abs(b / a - 1.0);
  r.measured["scaled_ratio"] = b;
  r.measured["ratio_drift"] = drift;
  r.measured["invariance_tolerance"] = tolerance;
  r.verdict = base.passed() && other.passed() && drift <= tolerance ? Verdict::pass : Verdict::fail;
  if (drift > tolerance) r.notes.emplace_back("ratio changed under lattice rescaling");
  return r;
}

// ---------------------------------------------------------------------------
// Almost Morawetz

AlmostMorawetzProbe::AlmostMorawetzProbe(double threshold, double regularity, double defect_budget)
    : threshold_(threshold), regularity_(regularity), defect_budget_(defect_budget) {}

namespace {

double action_cap(const Field& w) {
  const double l2 = l2_norm(w);
  return 2.0 * std::sqrt(2.0) * l2 * l2 * l2 * sobolev_norm(w, 1.0, true);
}

}  // namespace

void AlmostMorawetzProbe::observe(double t, const Field& state) {
  if (state.grid.dim() != 3) throw std::invalid_argument("almost Morawetz check needs n = 3");
  const Field w = apply_i_operator(state, threshold_, regularity_);
  const double l4 = lebesgue_norm(w, 4.0);
  if (times_.empty()) {
    action_first_ = interaction_action(w);
    cap_first_ = action_cap(w);
  }
  times_.push_back(t);
  quartic_.push_back(l4 * l4 * l4 * l4);
  last_state_ = state;
}

CheckReport AlmostMorawetzProbe::finish() const {
  if (!last_state_) throw std::logic_error("almost Morawetz probe saw no snapshots");
  CheckReport r;
  r.name = "almost_morawetz";
  r.inputs = {{"N", threshold_}, {"s", regularity_}};
  r.tolerance = defect_budget_;

  const Field w = apply_i_operator(*last_state_, threshold_, regularity_);
  const double action_last = interaction_action(w);
  const double cap_last = action_cap(w);
  const double A = trapezoid(times_, quartic_);
  const double B = std::abs(action_last - action_first_);
  const double D = A - B;
  r.measured["quartic_integral"] = A;
  r.measured["action_change"] = B;
  r.measured["defect"] = D;
  r.measured["action_initial"] = action_first_;
  r.measured["action_final"] = action_last;
  r.measured["action_cap"] = std::max(cap_first_, cap_last);
  const bool capped = std::abs(action_first_) <= cap_first_ && std::abs(action_last) <= cap_last;
  r.measured["action_within_cap"] = capped ? 1.0 : 0.0;
  r.bound_lhs = A;
  r.bound_rhs = B + defect_budget_;
  if (B > 0.0) r.ratio = A / B;
  r.verdict = (A <= B + defect_budget_ && capped) ? Verdict::pass : Verdict::fail;
  if (!capped) r.notes.emplace_back("Morawetz action exceeds its Cauchy-Schwarz cap");
  return r;
}

CheckReport check_almost_morawetz(const Trajectory& traj, double threshold, double regularity,
                                  double defect_budget) {
  AlmostMorawetzProbe probe(threshold, regularity, defect_budget);
  for (std::size_t i = 0; i < traj.states.size(); ++i) probe.observe(traj.times[i], traj.states[i]);
  return probe.finish();
}

MorawetzSweepResult sweep_almost_morawetz(const Field& u0, double regularity,
                                          std::span<const double> thresholds,
                                          const StepConfig& cfg) {
  if (u0.grid.dim() != 3) throw std::invalid_argument("almost Morawetz sweep needs n = 3");
  auto Ns = sorted_copy(thresholds);
  const double top = u0.grid.max_frequency();
  if (Ns.empty() || Ns.back() < top) Ns.push_back(2.0 * top);

  MorawetzSweepResult out;
  out.points.resize(Ns.size());
  std::vector<CheckReport> reports(Ns.size());
  parallel_for(Ns.size(), [&](std::size_t i) {
    AlmostMorawetzProbe probe(Ns[i], regularity);
    evolve(u0, cfg, 3, [&](double t, const Field& state) { probe.observe(t, state); });
    reports[i] = probe.finish();
    auto& pt = out.points[i];
    pt.threshold = Ns[i];
    pt.control = Ns[i] >= top;
    pt.quartic = reports[i].measured.at("quartic_integral");
    pt.action_change = reports[i].measured.at("action_change");
    pt.defect = reports[i].measured.at("defect");
  });

  CheckReport& r = out.report;
  r.name = "almost_morawetz_sweep";
  r.inputs = {{"s", regularity}, {"dt", cfg.dt}, {"t_final", cfg.t_final}};
  bool monotone = true;
  bool balance = true;
  bool capped = true;
  std::optional<double> previous;
  std::size_t swept = 0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const auto& pt = out.points[i];
    r.measured[key("quartic_integral", pt.threshold)] = pt.quartic;
    r.measured[key("action_change", pt.threshold)] = pt.action_change;
    r.measured[key("defect", pt.threshold)] = pt.defect;
    if (reports[i].measured.at("action_within_cap") == 0.0) capped = false;
    if (pt.control) {
      r.measured["defect_floor"] = pt.defect;
      continue;
    }
    ++swept;
    if (reports[i].failed()) balance = false;
    if (previous && pt.defect > *previous) monotone = false;
    previous = pt.defect;
  }
  r.measured["monotone_nonincreasing"] = monotone ? 1.0 : 0.0;
  r.measured["balance_holds"] = balance ? 1.0 : 0.0;
  if (swept < 2) {
    r.verdict = Verdict::inconclusive;
    r.notes.emplace_back("defect trend needs at least 2 non-control thresholds");
  } else {
    r.verdict = (monotone && capped) ? Verdict::pass : Verdict::fail;
  }
  if (!balance) r.notes.emplace_back("A <= B failed for at least one threshold");
  return out;
}

// ---------------------------------------------------------------------------
// Partitioning

Partition partition_by_norm(std::span<const double> times, std::span<const double> lq, double p,
                            double epsilon, double lambda) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (times.size() != lq.size() || times.empty()) {
    throw std::invalid_argument("partition needs matching, nonempty samples");
  }
  Partition out;
  const std::size_t last = times.size() - 1;
  if (std::isinf(p)) {
    if (*std::max_element(lq.begin(), lq.end()) > epsilon) {
      throw std::domain_error("epsilon below the single-snapshot norm floor; cannot partition");
    }
    out.intervals.push_back({times.front(), times.back(),
                             *std::max_element(lq.begin(), lq.end())});
  } else {
    const double bound = std::pow(epsilon, p);
    std::size_t a = 0;
    while (a < last) {
      double sum = 0.0;
      std::size_t b = a;
      while (b < last) {
        const double piece =
            0.5 * (times[b + 1] - times[b]) * (std::pow(lq[b], p) + std::pow(lq[b + 1], p));
        if (sum + piece > bound) break;
        sum += piece;
        ++b;
      }
      if (b == a) {
        throw std::domain_error("epsilon below the single-step norm floor; cannot partition");
      }
      out.intervals.push_back({times[a], times[b], std::pow(sum, 1.0 / p)});
      a = b;
    }
    if (out.intervals.empty()) out.intervals.push_back({times.front(), times.back(), 0.0});
  }

  CheckReport& r = out.report;
  r.name = "partition";
  r.inputs = {{"p", p}, {"epsilon", epsilon}, {"lambda", lambda}};
  r.tolerance = epsilon;
  const double count = static_cast<double>(out.intervals.size());
  const double horizon = times.back() - times.front();
  const double scale = std::pow(lambda, 2.0 / 3.0) * std::cbrt(horizon);
  r.measured["intervals"] = count;
  r.measured["bookkeeping_scale"] = scale;
  r.measured["total_norm"] = time_norm(times, lq, p, times.front(), times.back());
  if (scale > 0.0) r.ratio = count / scale;
  r.verdict = Verdict::pass;
  return out;
}

Partition partition_by_norm(const Trajectory& traj, double p, double q, double epsilon,
                            double lambda) {
  std::vector<double> lq(traj.states.size());
  for (std::size_t i = 0; i < lq.size(); ++i) lq[i] = lebesgue_norm(traj.states[i], q);
  auto out = partition_by_norm(traj.times, lq, p, epsilon, lambda);
  out.report.inputs["q"] = q;
  return out;
}

// ---------------------------------------------------------------------------
// lambda selection

double rescaled_modified_energy(const Field& u0, double lambda, double threshold,
                                double regularity, std::size_t max_points) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("lambda must be >= 1");
  const int n = u0.grid.dim();
  const double rounded = std::round(lambda);
  const bool dyadic = rounded == lambda && rounded <= (1 << 20) &&
                      is_power_of_two(static_cast<int>(rounded));
  if (dyadic && u0.grid.size() * std::pow(rounded, n) <= static_cast<double>(max_points)) {
    return modified_energy(scaling_map(u0, static_cast<int>(rounded)), threshold, regularity, n)
        .total();
  }
  return modified_energy(u0, lambda * threshold, regularity, n).total() / (lambda * lambda);
}

RescaleResult rescale_experiment(const Field& u0, double regularity,
                                 std::span<const double> thresholds, double horizon,
                                 double target, int lambda_cap, double slope_tolerance) {
  if (!(regularity > 0.0 && regularity <= 1.0)) {
    throw std::invalid_argument("rescale experiment needs s in (0, 1]");
  }
  const int n = u0.grid.dim();
  RescaleResult out;
  CheckReport& r = out.report;
  r.name = "lambda_selection";
  r.inputs = {{"s", regularity}, {"target", target}, {"T0", horizon}};
  r.tolerance = slope_tolerance;

  const auto identity_energy = [&](double lambda, double N) {
    return modified_energy(u0, lambda * N, regularity, n).total() / (lambda * lambda);
  };

  bool found_all = true;
  for (double N : sorted_copy(thresholds)) {
    RescalePoint pt;
    pt.threshold = N;
    int lambda = 1;
    double e = rescaled_modified_energy(u0, 1.0, N, regularity);
    while (e > target && lambda < lambda_cap) {
      lambda *= 2;
      e = rescaled_modified_energy(u0, lambda, N, regularity);
    }
    if (e > target) {
      found_all = false;
      r.notes.push_back(key("no admissible lambda below the cap for N", N));
      continue;
    }
    pt.lambda = lambda;
    pt.energy_at_lambda = e;
    pt.horizon = static_cast<double>(lambda) * lambda * horizon;

    double hi = lambda;
    double lo = std::max(1.0, lambda / 2.0);
    if (lambda == 1 || identity_energy(lo, N) <= target) {
      pt.refined_lambda = lo;
    } else {
      for (int it = 0; it < 60 && hi - lo > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (identity_energy(mid, N) > target ? lo : hi) = mid;
      }
      pt.refined_lambda = hi;
    }
    r.measured[key("lambda", N)] = lambda;
    r.measured[key("refined_lambda", N)] = pt.refined_lambda;
    r.measured[key("horizon", N)] = pt.horizon;
    out.points.push_back(pt);
  }

  const double expected = (1.0 - regularity) / regularity;
  r.measured["expected_exponent"] = expected;
  std::vector<double> ns, lams, dyadic;
  for (const auto& pt : out.points) {
    ns.push_back(pt.threshold);
    lams.push_back(pt.refined_lambda);
    dyadic.push_back(pt.lambda);
  }
  const auto fit = fit_loglog(ns, lams);
  const auto dyadic_fit = fit_loglog(ns, dyadic);
  if (dyadic_fit.conclusive) r.measured["dyadic_exponent"] = dyadic_fit.slope;
  if (!found_all) {
    r.verdict = Verdict::fail;
  } else if (!fit.conclusive) {
    r.verdict = Verdict::inconclusive;
    r.notes.emplace_back("exponent fit needs at least 3 thresholds");
  } else {
    r.slope = fit.slope;
    r.bound_lhs = std::abs(fit.slope - expected);
    r.bound_rhs = slope_tolerance;
    r.verdict = std::abs(fit.slope - expected) <= slope_tolerance ? Verdict::pass : Verdict::fail;
  }
  return out;
}

}  // namespace imethod
