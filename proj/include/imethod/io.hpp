#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "imethod/dynamics.hpp"
#include "imethod/grid.hpp"
#include "imethod/verification.hpp"

namespace imethod {

/// Config document problems; the message names the offending line or field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitialDataKind { gaussian, plane_wave, rough };

struct InitialDataSpec {
  InitialDataKind kind = InitialDataKind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;                  // gaussian
  std::optional<std::vector<double>> center;  // gaussian, defaults to the box center
  std::vector<int> wavevector;         // plane_wave, lattice indices
  double delta = 0.05;                 // rough
  std::uint64_t seed = 0;              // rough
};

struct CheckSpec {
  std::string name;
  std::map<std::string, double> params;  // budgets, tolerances, exponents
};

struct RunConfig {
  int dimension = 3;
  int grid_points = 32;
  double box_length = 2.0 * kPi;
  double dt = 1e-3;
  double t_final = 1.0;
  int snapshot_stride = 1;
  bool dealias = false;
  double s = 1.0;
  std::vector<double> thresholds;  // "N" (single) or "N_list"
  std::optional<int> lambda;
  InitialDataSpec initial_data;
  std::vector<CheckSpec> checks;
  std::string output_dir;
  std::optional<std::string> checkpoint;  // input state for `norms`

  Grid grid() const;
  StepConfig step_config() const;
  /// Throws ConfigError when a physical parameter is out of range.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types raise ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical document (sorted keys, every field present).
nlohmann::json to_json(const RunConfig& cfg);
/// 16 hex digits of FNV-1a over the canonical dump without output_dir.
std::string config_hash(const RunConfig& cfg);

/// gaussian: a exp(-|x - x0|^2 / w^2); plane_wave: a exp(i k . x) with k on
/// the lattice; rough: rough_field with s from the run. Deterministic.
Field synthesize_initial_data(const Grid& grid, const InitialDataSpec& spec, double regularity);

// ---------------------------------------------------------------------------
// Checkpoints: "NLSF" | u32 version = 1 | u32 n | u32 G x n | f64 L | f64 t |
// G^n (re, im) f64 pairs, all little-endian, row-major, last axis fastest.

enum class CheckpointErrorKind { io, bad_magic, version_mismatch, bad_header, truncated_payload };

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Field field;
  double time = 0.0;
};

std::vector<std::uint8_t> encode_checkpoint(const Field& f, double t);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const Field& f, double t, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reports

nlohmann::json to_json(const CheckReport& report);
/// Fixed-width summary table, one line per report.
std::string summary_table(const std::vector<CheckReport>& reports);
/// %.17g, the CSV number format.
std::string format_number(double v);

}  // namespace imethod
