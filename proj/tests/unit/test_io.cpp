#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "imethod/functionals.hpp"
#include "imethod/io.hpp"
#include "oracles.hpp"

using namespace imethod;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const char* env = std::getenv("IMETHOD_TEST_TMP");
  fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "imethod_tests";
  fs::path dir = base / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kMinimal = R"({
  "dimension": 2, "grid_points": 16, "box_length": 6.283185307179586,
  "dt": 0.001, "t_final": 0.01, "s": 0.6, "N": 4,
  "initial_data": {"kind": "rough", "amplitude": 1.0, "seed": 11},
  "checks": ["mass_conservation", {"name": "reversibility", "tolerance": 1e-9}],
  "output_dir": "runs"
})";

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

void expect_config_error(const std::string& text, const std::string& fragment) {
  try {
    parse_config_text(text);
    FAIL("no ConfigError for: " << fragment);
  } catch (const ConfigError& e) {
    CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
  }
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

double read_f64(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[at + i];
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

CheckpointErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  FAIL("decode accepted a malformed checkpoint");
  return CheckpointErrorKind::io;
}

}  // namespace

TEST_CASE("config parses and reports its fields") {
  const auto cfg = parse_config_text(kMinimal);
  CHECK(cfg.dimension == 2);
  CHECK(cfg.grid_points == 16);
  CHECK(cfg.thresholds == std::vector<double>{4.0});
  CHECK(cfg.initial_data.kind == InitialDataKind::rough);
  CHECK(cfg.initial_data.seed == 11);
  REQUIRE(cfg.checks.size() == 2);
  CHECK(cfg.checks[0].name == "mass_conservation");
  CHECK(cfg.checks[1].params.at("tolerance") == 1e-9);
  CHECK(cfg.output_dir == "runs");
}

TEST_CASE("config rejects malformed documents with field diagnostics") {
  expect_config_error(replaced(kMinimal, "\"s\": 0.6", "\"s\": 0.6, \"colour\": 1"), "colour");
  expect_config_error(replaced(kMinimal, "\"output_dir\": \"runs\"", "\"dealias\": false"),
                      "output_dir");
  expect_config_error(replaced(kMinimal, "\"grid_points\": 16", "\"grid_points\": \"16\""),
                      "grid_points");
  expect_config_error(replaced(kMinimal, "\"dt\": 0.001", "\"dt\": -0.001"), "time stepping");
  expect_config_error(replaced(kMinimal, "\"s\": 0.6", "\"s\": 1.5"), "s:");
  expect_config_error(replaced(kMinimal, "\"N\": 4", "\"N\": 4, \"N_list\": [4, 8]"), "N_list");
  expect_config_error(replaced(kMinimal, "\"rough\"", "\"sawtooth\""), "kind");
  expect_config_error(replaced(kMinimal, "\"seed\": 11", "\"seed\": 11, \"sharpness\": 2"),
                      "sharpness");
  expect_config_error(replaced(kMinimal, "\"dimension\": 2,", "\"dimension\": 2"), "line");
}

TEST_CASE("canonical JSON round trips and the hash ignores output_dir") {
  const auto cfg = parse_config_text(kMinimal);
  const auto doc = to_json(cfg);
  const auto again = parse_config(doc);
  CHECK(to_json(again).dump() == doc.dump());
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);

  auto moved = cfg;
  moved.output_dir = "elsewhere";
  CHECK(config_hash(moved) == config_hash(cfg));
  auto reseeded = cfg;
  reseeded.initial_data.seed = 12;
  CHECK(config_hash(reseeded) != config_hash(cfg));
}

TEST_CASE("gaussian data has the closed-form mass on a large box") {
  InitialDataSpec spec;
  spec.kind = InitialDataKind::gaussian;
  spec.amplitude = 1.0;
  spec.width = 1.0;
  const auto g = Grid::make(3, 128, 16.0 * kPi);
  const auto u = synthesize_initial_data(g, spec, 1.0);
  CHECK(mass(u) == doctest::Approx(oracle::gaussian_mass(3, 1.0, 1.0)).epsilon(1e-10));
  CHECK(fixture::sup_distance(u, oracle::gaussian(g, 1.0, 1.0)) == 0.0);
}

TEST_CASE("plane wave data has mass L^n and lattice checks") {
  InitialDataSpec spec;
  spec.kind = InitialDataKind::plane_wave;
  spec.amplitude = 1.0;
  spec.wavevector = {3, -2};
  const double L = 5.0;
  const auto g = Grid::make(2, 16, L);
  const auto u = synthesize_initial_data(g, spec, 1.0);
  CHECK(mass(u) == doctest::Approx(L * L).epsilon(1e-13));
  CHECK(fixture::sup_distance(u, oracle::plane_wave(g, 1.0, {3, -2}, 0.0, 2)) < 1e-13);
  spec.wavevector = {8, 0};
  CHECK_THROWS_AS(synthesize_initial_data(g, spec, 1.0), std::invalid_argument);
}

TEST_CASE("rough data is bit-identical per seed") {
  InitialDataSpec spec;
  spec.kind = InitialDataKind::rough;
  spec.seed = 42;
  const auto g = Grid::make(3, 8, 2.0 * kPi);
  const auto a = synthesize_initial_data(g, spec, 0.6);
  const auto b = synthesize_initial_data(g, spec, 0.6);
  CHECK(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(complex)) == 0);
  spec.seed = 43;
  const auto c = synthesize_initial_data(g, spec, 0.6);
  CHECK(fixture::sup_distance(a, c) > 0.0);
}

TEST_CASE("checkpoint layout matches the byte format") {
  const auto g = Grid::make(2, 8, 3.5);
  const auto f = fixture::random_field(g, 5);
  const auto bytes = encode_checkpoint(f, 0.25);
  REQUIRE(bytes.size() == 4 + 4 + 4 + 2 * 4 + 8 + 8 + 64 * 16);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "NLSF");
  CHECK(read_u32(bytes, 4) == 1);
  CHECK(read_u32(bytes, 8) == 2);
  CHECK(read_u32(bytes, 12) == 8);
  CHECK(read_u32(bytes, 16) == 8);
  CHECK(read_f64(bytes, 20) == 3.5);
  CHECK(read_f64(bytes, 28) == 0.25);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(read_f64(bytes, 36 + 16 * i) == f.values[i].real());
    CHECK(read_f64(bytes, 44 + 16 * i) == f.values[i].imag());
  }
}

TEST_CASE("checkpoint round trip is bit-exact through a file") {
  const auto dir = scratch_dir("checkpoint_round_trip");
  for (int n = 1; n <= 3; ++n) {
    const auto g = Grid::make(n, 8, 1.0 + n);
    const auto f = fixture::random_field(g, 100 + n);
    const auto path = dir / ("f" + std::to_string(n) + ".nlsf");
    save_checkpoint(f, 0.1 * n, path);
    const auto back = load_checkpoint(path);
    CHECK(back.time == 0.1 * n);
    CHECK(back.field.grid.dim() == n);
    CHECK(back.field.grid.points() == 8);
    CHECK(back.field.grid.length() == 1.0 + n);
    CHECK(std::memcmp(back.field.values.data(), f.values.data(),
                      f.values.size() * sizeof(complex)) == 0);
    CHECK(encode_checkpoint(back.field, back.time) == encode_checkpoint(f, 0.1 * n));
  }
}

TEST_CASE("checkpoint decode errors are distinct") {
  const auto f = fixture::random_field(Grid::make(2, 8, 1.0), 9);
  const auto good = encode_checkpoint(f, 0.0);

  auto magic = good;
  magic[0] = 'X';
  CHECK(decode_error(magic) == CheckpointErrorKind::bad_magic);

  auto version = good;
  version[4] = 2;
  CHECK(decode_error(version) == CheckpointErrorKind::version_mismatch);

  auto truncated = good;
  truncated.resize(good.size() - 5);
  CHECK(decode_error(truncated) == CheckpointErrorKind::truncated_payload);

  auto header_only = good;
  header_only.resize(10);
  CHECK(decode_error(header_only) != CheckpointErrorKind::bad_magic);

  auto non_cubic = good;
  non_cubic[16] = 16;
  CHECK(decode_error(non_cubic) == CheckpointErrorKind::bad_header);

  auto trailing = good;
  trailing.push_back(0);
  CHECK(decode_error(trailing) == CheckpointErrorKind::bad_header);

  CHECK_THROWS_AS(load_checkpoint(scratch_dir("missing") / "none.nlsf"), CheckpointError);
}

TEST_CASE("report JSON and CSV numbers are stable") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CheckReport r;
  r.name = "demo";
  r.verdict = Verdict::pass;
  r.tolerance = 1e-6;
  r.measured["x"] = 1.5;
  const auto doc = to_json(r);
  CHECK(doc.at("name") == "demo");
  CHECK(doc.at("ratio").is_null());
  CHECK(to_json(r).dump() == doc.dump());
  CHECK(summary_table({r}).find("demo") != std::string::npos);
}
