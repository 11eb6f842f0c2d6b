#include "imethod/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace imethod {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.contains(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
T field(const json& obj, const std::string& name, const std::string& where) {
  try {
    return obj.at(name).get<T>();
  } catch (const json::out_of_range&) {
    throw ConfigError(where + ": missing required field '" + name + "'");
  } catch (const json::type_error& e) {
    throw ConfigError(where + ": field '" + name + "' has the wrong type (" + e.what() + ")");
  }
}

template <typename T>
T field_or(const json& obj, const std::string& name, T fallback, const std::string& where) {
  if (!obj.contains(name)) return fallback;
  return field<T>(obj, name, where);
}

std::string kind_name(InitialDataKind k) {
  switch (k) {
    case InitialDataKind::gaussian: return "gaussian";
    case InitialDataKind::plane_wave: return "plane_wave";
    case InitialDataKind::rough: return "rough";
  }
  return "unknown";
}

InitialDataSpec parse_initial_data(const json& doc) {
  const std::string where = "initial_data";
  require_keys(doc, {"kind", "amplitude", "width", "center", "wavevector", "delta", "seed"}, where);
  InitialDataSpec spec;
  const auto kind = field<std::string>(doc, "kind", where);
  if (kind == "gaussian") {
    spec.kind = InitialDataKind::gaussian;
  } else if (kind == "plane_wave") {
    spec.kind = InitialDataKind::plane_wave;
  } else if (kind == "rough") {
    spec.kind = InitialDataKind::rough;
  } else {
    throw ConfigError(where + ".kind: expected gaussian | plane_wave | rough, got '" + kind + "'");
  }
  spec.amplitude = field_or(doc, "amplitude", 1.0, where);
  spec.width = field_or(doc, "width", 1.0, where);
  if (doc.contains("center")) spec.center = field<std::vector<double>>(doc, "center", where);
  spec.wavevector = field_or(doc, "wavevector", std::vector<int>{}, where);
  spec.delta = field_or(doc, "delta", 0.05, where);
  spec.seed = field_or<std::uint64_t>(doc, "seed", 0, where);
  if (!(spec.width > 0.0)) throw ConfigError(where + ".width: must be positive");
  if (!(spec.delta > 0.0)) throw ConfigError(where + ".delta: must be positive");
  if (!std::isfinite(spec.amplitude)) throw ConfigError(where + ".amplitude: must be finite");
  return spec;
}

CheckSpec parse_check(const json& doc, std::size_t index) {
  const std::string where = "checks[" + std::to_string(index) + "]";
  if (doc.is_string()) return {doc.get<std::string>(), {}};
  if (!doc.is_object()) throw ConfigError(where + ": expected a name or an object");
  CheckSpec spec;
  for (const auto& [k, v] : doc.items()) {
    if (k == "name") {
      if (!v.is_string()) throw ConfigError(where + ".name: expected a string");
      spec.name = v.get<std::string>();
    } else if (v.is_number()) {
      spec.params[k] = v.get<double>();
    } else {
      throw ConfigError(where + "." + k + ": check parameters must be numbers");
    }
  }
  if (spec.name.empty()) throw ConfigError(where + ": missing required field 'name'");
  return spec;
}

}  // namespace

Grid RunConfig::grid() const {
  try {
    return Grid::make(dimension, grid_points, box_length);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

StepConfig RunConfig::step_config() const {
  StepConfig c;
  c.dt = dt;
  c.t_final = t_final;
  c.snapshot_stride = snapshot_stride;
  c.dealias = dealias;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("time stepping: ") + e.what());
  }
  return c;
}

void RunConfig::validate() const {
  (void)grid();
  (void)step_config();
  if (!(s > 0.0 && s <= 1.0)) throw ConfigError("s: must lie in (0, 1]");
  for (double N : thresholds) {
    if (!(N > 0.0)) throw ConfigError("N_list: thresholds must be positive");
  }
  if (lambda && (*lambda < 1 || (*lambda & (*lambda - 1)) != 0)) {
    throw ConfigError("lambda: must be a positive power of two");
  }
  if (initial_data.kind == InitialDataKind::plane_wave &&
      static_cast<int>(initial_data.wavevector.size()) != dimension) {
    throw ConfigError("initial_data.wavevector: needs one integer per dimension");
  }
  if (initial_data.center && static_cast<int>(initial_data.center->size()) != dimension) {
    throw ConfigError("initial_data.center: needs one coordinate per dimension");
  }
  if (output_dir.empty()) throw ConfigError("output_dir: missing required field");
}

RunConfig parse_config(const json& doc) {
  const std::string where = "config";
  require_keys(doc,
               {"dimension", "grid_points", "box_length", "dt", "t_final", "snapshot_stride",
                "dealias", "s", "N", "N_list", "lambda", "initial_data", "checks", "output_dir",
                "checkpoint"},
               where);
  RunConfig cfg;
  cfg.dimension = field<int>(doc, "dimension", where);
  cfg.grid_points = field<int>(doc, "grid_points", where);
  cfg.box_length = field<double>(doc, "box_length", where);
  cfg.dt = field<double>(doc, "dt", where);
  cfg.t_final = field<double>(doc, "t_final", where);
  cfg.snapshot_stride = field_or(doc, "snapshot_stride", 1, where);
  cfg.dealias = field_or(doc, "dealias", false, where);
  cfg.s = field_or(doc, "s", 1.0, where);
  if (doc.contains("N") && doc.contains("N_list")) {
    throw ConfigError(where + ": give either 'N' or 'N_list', not both");
  }
  if (doc.contains("N")) cfg.thresholds = {field<double>(doc, "N", where)};
  if (doc.contains("N_list")) cfg.thresholds = field<std::vector<double>>(doc, "N_list", where);
  if (doc.contains("lambda")) cfg.lambda = field<int>(doc, "lambda", where);
  cfg.initial_data = parse_initial_data(doc.contains("initial_data") ? doc.at("initial_data")
                                                                      : json{{"kind", "gaussian"}});
  if (doc.contains("checks")) {
    const auto& checks = doc.at("checks");
    if (!checks.is_array()) throw ConfigError(where + ".checks: expected an array");
    for (std::size_t i = 0; i < checks.size(); ++i) cfg.checks.push_back(parse_check(checks[i], i));
  }
  if (!doc.contains("output_dir")) throw ConfigError(where + ": missing required field 'output_dir'");
  cfg.output_dir = field<std::string>(doc, "output_dir", where);
  if (doc.contains("checkpoint")) cfg.checkpoint = field<std::string>(doc, "checkpoint", where);
  cfg.validate();
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

json to_json(const RunConfig& cfg) {
  json data{{"kind", kind_name(cfg.initial_data.kind)},
            {"amplitude", cfg.initial_data.amplitude},
            {"width", cfg.initial_data.width},
            {"wavevector", cfg.initial_data.wavevector},
            {"delta", cfg.initial_data.delta},
            {"seed", cfg.initial_data.seed}};
  if (cfg.initial_data.center) data["center"] = *cfg.initial_data.center;
  json checks = json::array();
  for (const auto& c : cfg.checks) {
    json item{{"name", c.name}};
    for (const auto& [k, v] : c.params) item[k] = v;
    checks.push_back(item);
  }
  json doc{{"dimension", cfg.dimension},     {"grid_points", cfg.grid_points},
           {"box_length", cfg.box_length},   {"dt", cfg.dt},
           {"t_final", cfg.t_final},         {"snapshot_stride", cfg.snapshot_stride},
           {"dealias", cfg.dealias},         {"s", cfg.s},
           {"N_list", cfg.thresholds},       {"initial_data", data},
           {"checks", checks},               {"output_dir", cfg.output_dir}};
  if (cfg.lambda) doc["lambda"] = *cfg.lambda;
  if (cfg.checkpoint) doc["checkpoint"] = *cfg.checkpoint;
  return doc;
}

std::string config_hash(const RunConfig& cfg) {
  auto doc = to_json(cfg);
  doc.erase("output_dir");
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Field synthesize_initial_data(const Grid& grid, const InitialDataSpec& spec, double regularity) {
  Field f = Field::zeros(grid);
  const int n = grid.dim();
  switch (spec.kind) {
    case InitialDataKind::gaussian: {
      std::vector<double> center(n, 0.5 * grid.length());
      if (spec.center) center = *spec.center;
      if (static_cast<int>(center.size()) != n) throw std::invalid_argument("gaussian center size");
      const double w2 = spec.width * spec.width;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unflatten(i);
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) {
          const double d = grid.coordinate(idx[a]) - center[a];
          r2 += d * d;
        }
        f.values[i] = spec.amplitude * std::exp(-r2 / w2);
      }
      break;
    }
    case InitialDataKind::plane_wave: {
      if (static_cast<int>(spec.wavevector.size()) != n) {
        throw std::invalid_argument("plane wave needs one lattice index per dimension");
      }
      for (int k : spec.wavevector) {
        if (k < -grid.points() / 2 || k >= grid.points() / 2) {
          throw std::invalid_argument("plane wave vector is off the frequency lattice");
        }
      }
      const double step = grid.frequency_step();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unflatten(i);
        double phase = 0.0;
        for (int a = 0; a < n; ++a) phase += step * spec.wavevector[a] * grid.coordinate(idx[a]);
        f.values[i] = std::polar(spec.amplitude, phase);
      }
      break;
    }
    case InitialDataKind::rough: {
      RoughDataSpec rough;
      rough.s = regularity;
      rough.delta = spec.delta;
      rough.amplitude = spec.amplitude;
      rough.seed = spec.seed;
      f = rough_field(grid, rough);
      break;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[4] = {'N', 'L', 'S', 'F'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t count, CheckpointErrorKind kind, const char* what) const {
    if (remaining() < count) throw CheckpointError(kind, what);
  }

  std::uint32_t u32() {
    need(4, CheckpointErrorKind::bad_header, "checkpoint header truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }

  double f64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }

  std::size_t pos_ = 0;

 private:
  const std::vector<std::uint8_t>& bytes_;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Field& f, double t) {
  const Grid& g = f.grid;
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * g.dim() + 16 + 16 * g.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put_u32(out, static_cast<std::uint32_t>(g.points()));
  put_f64(out, g.length());
  put_f64(out, t);
  for (const auto& v : f.values) {
    put_f64(out, v.real());
    put_f64(out, v.imag());
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(CheckpointErrorKind::bad_magic, "bad magic: not an NLSF checkpoint");
  }
  Reader r(bytes);
  r.pos_ = 4;
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::version_mismatch,
                          "version mismatch: expected " + std::to_string(kCheckpointVersion) +
                              ", found " + std::to_string(version));
  }
  const auto dim = r.u32();
  if (dim < 1 || dim > 4) {
    throw CheckpointError(CheckpointErrorKind::bad_header, "bad header: dimension out of range");
  }
  std::vector<std::uint32_t> shape(dim);
  for (auto& s : shape) s = r.u32();
  if (!std::all_of(shape.begin(), shape.end(), [&](std::uint32_t s) { return s == shape[0]; })) {
    throw CheckpointError(CheckpointErrorKind::bad_header, "bad header: non-cubic grid");
  }
  r.need(16, CheckpointErrorKind::bad_header, "checkpoint header truncated");
  const double length = r.f64();
  const double time = r.f64();

  Grid grid = [&] {
    try {
      return Grid::make(static_cast<int>(dim), static_cast<int>(shape[0]), length);
    } catch (const std::invalid_argument& e) {
      throw CheckpointError(CheckpointErrorKind::bad_header, std::string("bad header: ") + e.what());
    }
  }();
  // Size arithmetic before touching the payload.
  const std::size_t payload = grid.size() * 16;
  if (r.remaining() < payload) {
    throw CheckpointError(CheckpointErrorKind::truncated_payload,
                          "truncated payload: expected " + std::to_string(payload) +
                              " bytes, found " + std::to_string(r.remaining()));
  }
  if (r.remaining() > payload) {
    throw CheckpointError(CheckpointErrorKind::bad_header, "bad header: trailing bytes after payload");
  }
  Field f = Field::zeros(grid);
  for (auto& v : f.values) {
    const double re = r.f64();
    const double im = r.f64();
    v = complex(re, im);
  }
  return {std::move(f), time};
}

void save_checkpoint(const Field& f, double t, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(f, t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointErrorKind::io, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::io, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

// ---------------------------------------------------------------------------
// Reports

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const CheckReport& report) {
  json doc{{"name", report.name},
           {"inputs", report.inputs},
           {"measured", report.measured},
           {"tolerance", report.tolerance},
           {"verdict", to_string(report.verdict)},
           {"pass", report.passed()},
           {"notes", report.notes}};
  const auto opt = [&](const char* key, const std::optional<double>& v) {
    doc[key] = v ? json(*v) : json(nullptr);
  };
  opt("bound_lhs", report.bound_lhs);
  opt("bound_rhs", report.bound_rhs);
  opt("ratio", report.ratio);
  opt("slope", report.slope);
  return doc;
}

std::string summary_table(const std::vector<CheckReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(28) << "check" << std::setw(14) << "verdict" << std::setw(16)
      << "ratio" << "slope\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(28) << r.name << std::setw(14) << to_string(r.verdict)
        << std::setw(16) << (r.ratio ? format_number(*r.ratio).substr(0, 14) : "-")
        << (r.slope ? format_number(*r.slope).substr(0, 14) : "-") << "\n";
  }
  return out.str();
}

}  // namespace imethod
