#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imethod/dynamics.hpp"
#include "imethod/functionals.hpp"
#include "imethod/grid.hpp"

namespace imethod {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);

/// Outcome of one numerical check. The verdict depends only on the measured
/// values and the declared tolerance.
struct CheckReport {
  std::string name;
  std::map<std::string, double> inputs;
  std::map<std::string, double> measured;
  std::optional<double> bound_lhs;
  std::optional<double> bound_rhs;
  std::optional<double> ratio;
  std::optional<double> slope;
  double tolerance = 0.0;
  Verdict verdict = Verdict::fail;
  std::vector<std::string> notes;

  bool passed() const { return verdict == Verdict::pass; }
  /// Only an explicit fail counts against a run; inconclusive does not.
  bool failed() const { return verdict == Verdict::fail; }
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
  bool conclusive = false;  // false when fewer than 3 points
};

/// Least squares of log y against log x. Requires positive samples.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Power-law spectrum |u_hat| = amplitude (1 + |xi|^2)^(-(s + n/2 + delta)/2)
/// with independent uniform phases drawn from mt19937_64(seed).
struct RoughDataSpec {
  double s = 0.6;
  double delta = 0.05;
  double amplitude = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

Field rough_field(const Grid& grid, const RoughDataSpec& spec);

/// Ratio ||P_{>M} u||_{H^s dot} N^(1-s) / ||grad I u||. The part of u above
/// max(4N, M) must give exactly 1 (hard); the full ratio is compared with
/// the dyadic budget 1 + sum_{k=-5..5} 2^(-k(1-s)) and only reported.
CheckReport check_frequency_tail(const Field& u, double threshold, double regularity,
                                 double scale);

/// Budget used by check_frequency_tail.
double frequency_tail_budget(double regularity);

/// check_frequency_tail over `count` rough fields with seeds base.seed,
/// base.seed + 1, ...; every general ratio must also stay within the budget.
CheckReport check_frequency_tail_ensemble(const Grid& grid, const RoughDataSpec& base, int count,
                                          double threshold, double scale);

/// Decay of ||P_{>M} |u|^(4/n)||_{L^(n/2)} over the dyadic scales M, with
/// separate log-log slopes below and at/above N.
CheckReport check_smoothness_decay(const Field& u, double threshold, double regularity,
                                   std::span<const double> scales);

/// u_lambda(x) = lambda^(-n/2) u(x / lambda) on the (lambda G, lambda L) grid,
/// realized exactly in Fourier space. lambda must be a power of two.
Field scaling_map(const Field& u, int lambda);

/// Evolves u0 and scaling_map(u0, lambda) over [0, T] and [0, lambda^2 T] and
/// compares mass and every declared admissible-pair norm (n = 3, 4).
CheckReport check_scaling(const Field& u0, int lambda, const StepConfig& cfg, int dim,
                          double tolerance = 1e-6, double mass_tolerance = 1e-12);

struct SweepPoint {
  double threshold = 0.0;
  bool control = false;  // I is the identity on this grid
  double sup_increment = 0.0;
  double endpoint_change = 0.0;
  double integrated_rate = 0.0;
  double consistency = 0.0;  // |integrated_rate - endpoint_change| / |endpoint_change|
  double initial_modified_energy = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  CheckReport report;
};

/// One evolution per threshold; sup_t |E(Iu(t)) - E(Iu(0))| against N.
/// Pass: strictly decreasing over the non-control points, fitted slope at
/// most max_slope, and rate/energy consistency within consistency_tolerance.
SweepResult sweep_almost_conservation(const Field& u0, double regularity,
                                      std::span<const double> thresholds, const StepConfig& cfg,
                                      int dim, double max_slope = -0.5,
                                      double consistency_tolerance = 0.05);

SweepResult sweep_almost_conservation(const Grid& grid, const RoughDataSpec& data,
                                      std::span<const double> thresholds, const StepConfig& cfg,
                                      double max_slope = -0.5,
                                      double consistency_tolerance = 0.05);

/// Rate/energy identity over a finished sweep: every non-control point must
/// satisfy |int rate dt - [E(Iu(T)) - E(Iu(0))]| <= tolerance |E(Iu(T)) - E(Iu(0))|,
/// and the rate at u0 with I the identity must vanish to rate_tolerance
/// relative to (||Delta u|| + ||F(u)||) ||F(u)||.
CheckReport check_modified_energy_identity(const SweepResult& sweep, const Field& u0,
                                           double regularity, int dim, double tolerance = 0.05,
                                           double rate_tolerance = 1e-10);

/// Accumulates the interaction Morawetz sides snapshot by snapshot.
class InteractionMorawetzProbe {
 public:
  explicit InteractionMorawetzProbe(int dim, double budget = 10.0);
  void observe(double t, const Field& state);
  CheckReport finish() const;

 private:
  int dim_;
  double budget_;
  double q_;
  std::vector<double> times_;
  std::vector<double> lq_;
  double initial_l2_ = 0.0;
  double max_half_derivative_ = 0.0;
};

/// ||u||_{L_t^{2(n-1)} L_x^{2(n-1)/(n-2)}} against
/// ||u0||^(1/2) sup_t ||u||_{H^(1/2) dot}^((n-2)/(n-1)); pass if ratio <= budget.
CheckReport check_interaction_morawetz(const Trajectory& traj, double budget = 10.0);

/// Interaction Morawetz ratio of u0 and of scaling_map(u0, lambda) evolved
/// over the matched horizon; both within budget and relative drift <= tolerance.
CheckReport check_interaction_morawetz_scaling(const Field& u0, int lambda, const StepConfig& cfg,
                                               int dim, double budget = 10.0,
                                               double tolerance = 1e-3);

/// Accumulates the almost-Morawetz balance for I u (n = 3).
class AlmostMorawetzProbe {
 public:
  AlmostMorawetzProbe(double threshold, double regularity, double defect_budget = 0.0);
  void observe(double t, const Field& state);
  CheckReport finish() const;

 private:
  double threshold_;
  double regularity_;
  double defect_budget_;
  std::vector<double> times_;
  std::vector<double> quartic_;  // int |Iu|^4 dx per snapshot
  double action_first_ = 0.0;
  double cap_first_ = 0.0;
  std::optional<Field> last_state_;  // the action is evaluated at both ends only
};

/// A = int int |Iu|^4, B = |M_a(T) - M_a(0)|, D = A - B. Pass when
/// A <= B + defect_budget and the action bound holds at both ends.
CheckReport check_almost_morawetz(const Trajectory& traj, double threshold, double regularity,
                                  double defect_budget = 0.0);

struct MorawetzSweepPoint {
  double threshold = 0.0;
  bool control = false;
  double quartic = 0.0;  // A
  double action_change = 0.0;  // B
  double defect = 0.0;  // D
};

struct MorawetzSweepResult {
  std::vector<MorawetzSweepPoint> points;
  CheckReport report;
};

/// One evolution per threshold plus reporting of the N >= max-frequency
/// control. Pass: D(N) nonincreasing across the non-control thresholds.
MorawetzSweepResult sweep_almost_morawetz(const Field& u0, double regularity,
                                          std::span<const double> thresholds,
                                          const StepConfig& cfg);

struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
  double norm = 0.0;
};

struct Partition {
  std::vector<TimeInterval> intervals;
  CheckReport report;
};

/// Greedy left-to-right split of [0, T] into maximal snapshot-aligned
/// intervals whose L_t^p L_x^q norm stays <= epsilon. Throws
/// std::domain_error when a single snapshot step already exceeds epsilon.
/// The count is compared with lambda^(2/3) T^(1/3).
Partition partition_by_norm(const Trajectory& traj, double p, double q, double epsilon,
                            double lambda = 1.0);

/// Same on precomputed per-snapshot L_x^q norms.
Partition partition_by_norm(std::span<const double> times, std::span<const double> lq,
                            double p, double epsilon, double lambda = 1.0);

struct RescalePoint {
  double threshold = 0.0;
  int lambda = 1;               // smallest power of two meeting the target
  double refined_lambda = 1.0;  // continuous root of lambda^-2 E(I_{lambda N} u0) = target
  double energy_at_lambda = 0.0;
  double horizon = 0.0;         // lambda^2 T0
};

struct RescaleResult {
  std::vector<RescalePoint> points;
  CheckReport report;
};

/// E(I_N u_lambda) evaluated through scaling_map when the target grid holds
/// at most max_points samples, through the Fourier dilation identity
/// lambda^-2 E(I_{lambda N} u) otherwise.
double rescaled_modified_energy(const Field& u0, double lambda, double threshold,
                                double regularity, std::size_t max_points = std::size_t{1} << 22);

/// Smallest power-of-two lambda with E(I_N u_lambda) <= target per N, plus the
/// continuous root, and a log-log fit of the root against N compared with
/// (1 - s) / s within slope_tolerance.
RescaleResult rescale_experiment(const Field& u0, double regularity,
                                 std::span<const double> thresholds, double horizon,
                                 double target = 0.5, int lambda_cap = 1 << 12,
                                 double slope_tolerance = 0.3);

}  // namespace imethod
