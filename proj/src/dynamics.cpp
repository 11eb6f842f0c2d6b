#include "imethod/dynamics.hpp"

#include <cmath>

#include "imethod/fft.hpp"
#include "imethod/multiplier.hpp"

namespace imethod {

void StepConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("t_final must be positive");
  }
  if (dt > t_final) throw std::invalid_argument("dt must not exceed t_final");
  if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
  const double ratio = t_final / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("t_final / dt must be an integer step count");
  }
  if (!(blowup_factor > 1.0)) throw std::invalid_argument("blowup_factor must exceed 1");
}

long StepConfig::step_count() const { return std::lround(t_final / dt); }

Field nonlinearity(const Field& f, int dim) {
  if (dim != f.grid.dim()) throw std::invalid_argument("nonlinearity dimension mismatch");
  Field out = f;
  const double half_power = 2.0 / dim;  // |u|^(4/n) = (|u|^2)^(2/n)
  for (auto& v : out.values) {
    const double sq = std::norm(v);
    v *= sq == 0.0 ? 0.0 : std::pow(sq, half_power);
  }
  return out;
}

SplitStepSolver::SplitStepSolver(const Grid& grid, int dim, double dt, bool dealias)
    : grid_(grid), dim_(dim), dt_(dt), dealias_(dealias) {
  if (dim != grid.dim()) throw std::invalid_argument("solver dimension mismatch");
  if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("solver dt must be nonzero");
  const auto xi = grid.radial_frequencies();
  const double inv_size = 1.0 / static_cast<double>(grid.size());
  propagator_.resize(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    propagator_[i] = std::polar(inv_size, -xi[i] * xi[i] * dt);
  }
  if (dealias_) {
    const auto lp = MultiplierSpec::low_pass(2.0 / 3.0 * grid.nyquist());
    filter_.resize(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) filter_[i] = lp.symbol(xi[i]) * inv_size;
  }
}

void SplitStepSolver::nonlinear_phase(Field& f, double tau) const {
  const double half_power = 2.0 / dim_;
  for (auto& v : f.values) {
    const double sq = std::norm(v);
    if (sq == 0.0) continue;
    v *= std::polar(1.0, -tau * std::pow(sq, half_power));
  }
  if (dealias_) {
    fft::forward(dim_, grid_.points(), f.values);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= filter_[i];
    fft::backward(dim_, grid_.points(), f.values);
  }
}

void SplitStepSolver::linear_step(Field& f) const {
  fft::forward(dim_, grid_.points(), f.values);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= propagator_[i];
  fft::backward(dim_, grid_.points(), f.values);
}

void SplitStepSolver::step(Field& f) const {
  nonlinear_phase(f, 0.5 * dt_);
  linear_step(f);
  nonlinear_phase(f, 0.5 * dt_);
}

Field strang_step(const Field& f, double dt, int dim, bool dealias) {
  SplitStepSolver solver(f.grid, dim, dt, dealias);
  Field out = f;
  solver.step(out);
  return out;
}

namespace {

double h1_norm(const Field& f) { return sobolev_norm(f, 1.0, false); }

void check_state(const Field& f, double t, double h1_limit) {
  double sum = 0.0;
  for (const auto& v : f.values) sum += std::norm(v);
  if (!std::isfinite(sum)) {
    throw SolverAbort("non-finite state at t = " + std::to_string(t) +
                      " (dt too large for this grid?)");
  }
  if (h1_limit > 0.0 && h1_norm(f) > h1_limit) {
    throw SolverAbort("H^1 norm growth past blow-up threshold at t = " + std::to_string(t));
  }
}

}  // namespace

void evolve(const Field& u0, const StepConfig& cfg, int dim, const SnapshotObserver& observer) {
  cfg.validate();
  if (dim != u0.grid.dim()) throw std::invalid_argument("evolve dimension mismatch");
  if (!u0.all_finite()) throw std::invalid_argument("initial data must be finite");

  const SplitStepSolver solver(u0.grid, dim, cfg.dt, cfg.dealias);
  const long steps = cfg.step_count();
  const double h0 = h1_norm(u0);
  const double h1_limit = h0 > 0.0 ? cfg.blowup_factor * h0 : 0.0;
  const bool fuse = cfg.fuse_phases && !cfg.dealias;
  const auto is_snapshot = [&](long k) { return k % cfg.snapshot_stride == 0 || k == steps; };

  Field u = u0;
  observer(0.0, u);
  bool phase_pending = false;  // leading half phase already applied by fusion
  for (long k = 1; k <= steps; ++k) {
    if (!phase_pending) solver.nonlinear_phase(u, 0.5 * cfg.dt);
    solver.linear_step(u);
    if (fuse && !is_snapshot(k) && k < steps) {
      solver.nonlinear_phase(u, cfg.dt);
      phase_pending = true;
      continue;
    }
    solver.nonlinear_phase(u, 0.5 * cfg.dt);
    phase_pending = false;
    if (is_snapshot(k)) {
      const double t = k == steps ? cfg.t_final : static_cast<double>(k) * cfg.dt;
      check_state(u, t, h1_limit);
      observer(t, u);
    }
  }
}

Trajectory evolve(const Field& u0, const StepConfig& cfg, int dim) {
  Trajectory traj{u0.grid, dim, cfg, {}, {}};
  evolve(u0, cfg, dim, [&](double t, const Field& state) {
    traj.times.push_back(t);
    traj.states.push_back(state);
  });
  return traj;
}

}  // namespace imethod
