#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "imethod/grid.hpp"

namespace imethod {

/// Raised when an evolution leaves the finite, bounded regime.
class SolverAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  int snapshot_stride = 1;
  bool dealias = false;
  /// Merge the trailing half phase of a step with the leading half phase of
  /// the next one whenever no snapshot falls in between.
  bool fuse_phases = true;
  /// Abort when the H^1 norm exceeds this multiple of its initial value.
  double blowup_factor = 1e6;

  /// Throws std::invalid_argument when dt, t_final or stride are unusable.
  void validate() const;
  /// round(t_final / dt); validate() checks it is an integer within 1e-9.
  long step_count() const;
};

struct Trajectory {
  Grid grid;
  int dim = 0;
  StepConfig config;
  std::vector<double> times;
  std::vector<Field> states;
};

/// Pointwise |u|^(4/n) u.
Field nonlinearity(const Field& f, int dim);

/// Strang splitting of i u_t + Delta u = |u|^(4/n) u with precomputed
/// propagators. A negative dt runs the flow backwards.
class SplitStepSolver {
 public:
  SplitStepSolver(const Grid& grid, int dim, double dt, bool dealias = false);

  double dt() const { return dt_; }

  /// u <- exp(-i tau |u|^(4/n)) u, followed by the 2/3 filter if enabled.
  void nonlinear_phase(Field& f, double tau) const;
  /// u <- exp(i dt Delta) u
  void linear_step(Field& f) const;
  /// half phase, linear, half phase
  void step(Field& f) const;

 private:
  Grid grid_;
  int dim_;
  double dt_;
  bool dealias_;
  std::vector<complex> propagator_;  // exp(-i |xi|^2 dt) / G^n
  std::vector<double> filter_;       // phi(|xi| / M) / G^n, M = 2/3 nyquist
};

Field strang_step(const Field& f, double dt, int dim, bool dealias = false);

using SnapshotObserver = std::function<void(double t, const Field& state)>;

/// Streams snapshots (t = 0 first, t_final last) to the observer.
/// Throws SolverAbort on non-finite states or H^1 growth past blowup_factor.
void evolve(const Field& u0, const StepConfig& cfg, int dim, const SnapshotObserver& observer);

Trajectory evolve(const Field& u0, const StepConfig& cfg, int dim);

}  // namespace imethod
