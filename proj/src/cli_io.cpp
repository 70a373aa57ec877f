#include "cslab/cli_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cslab/error.hpp"

namespace cslab {

using json = nlohmann::ordered_json;

// ------------------------------------------------------------------ config

namespace {

// Walks one JSON object, remembering which keys were read so that the rest
// can be rejected by path.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  Node child(const std::string& key) {
    seen_.insert(key);
    return Node(j_.at(key), at(key));
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ConfigError(at(key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(at(key) + " must be finite");
    return d;
  }
  double positive(const std::string& key) {
    const double d = number(key);
    if (!(d > 0.0)) throw ConfigError(at(key) + " must be positive");
    return d;
  }
  long integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + " must be an integer");
    return v.get<long>();
  }
  bool boolean(const std::string& key) {
    const json& v = get(key);
    if (!v.is_boolean()) throw ConfigError(at(key) + " must be a boolean");
    return v.get<bool>();
  }
  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(at(key) + " must be a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(at(key) + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "] must be a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  std::array<double, 3> vec3(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 3) throw ConfigError(path + " must be an array of 3 numbers");
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "] must be a number");
      out[i] = v[i].get<double>();
    }
    return out;
  }
  std::vector<std::array<double, 3>> vec3s(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(at(key) + " must be an array");
    std::vector<std::array<double, 3>> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(vec3(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }
  const json& raw(const std::string& key) { return get(key); }

  /// Rejects every key that was never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + at(it.key()));
  }

 private:
  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing key " + at(key));
    return j_.at(key);
  }
  std::string where() const { return path_.empty() ? "document" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

KineticSign parse_kinetic(const std::string& s, const std::string& path) {
  if (s == "minus_laplacian") return KineticSign::minus_laplacian;
  if (s == "plus_laplacian") return KineticSign::plus_laplacian;
  throw ConfigError(path + " must be minus_laplacian or plus_laplacian");
}

NonlinearitySign parse_nonlinearity(const std::string& s, const std::string& path) {
  if (s == "none") return NonlinearitySign::none;
  if (s == "focusing") return NonlinearitySign::focusing;
  if (s == "defocusing") return NonlinearitySign::defocusing;
  throw ConfigError(path + " must be none, focusing or defocusing");
}

void parse_equation(Node n, EquationSpec& spec) {
  if (n.has("kinetic_sign")) spec.kinetic_sign = parse_kinetic(n.string("kinetic_sign"), n.at("kinetic_sign"));
  if (n.has("nonlinearity"))
    spec.nonlinearity = parse_nonlinearity(n.string("nonlinearity"), n.at("nonlinearity"));
  if (n.has("lambda")) spec.coupling = n.number("lambda");
  else spec.coupling = spec.is_linear() ? 0.0 : (spec.coupling > 0.0 ? spec.coupling : 1.0);
  if (n.has("potential")) {
    Node p = n.child("potential");
    const std::string kind = p.string("kind");
    const double eps = p.has("epsilon") ? p.positive("epsilon") : 0.0;
    if (kind == "none") {
      spec.potential.reset();
    } else if (kind == "constant") {
      spec.potential = AngularPotential::constant(p.number("c"), eps);
    } else if (kind == "axial") {
      spec.potential = AngularPotential::axial(p.number("a"), p.number("b"), eps);
    } else {
      throw ConfigError(p.at("kind") + " must be none, constant or axial");
    }
    p.finish();
  }
  n.finish();
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what());
  }
}

void parse_numerics(Node n, Numerics& num) {
  if (n.has("L")) num.box_half_width = n.positive("L");
  if (n.has("N")) {
    const long N = n.integer("N");
    if (N <= 0) throw ConfigError("numerics.N must be positive");
    if (N % 2 != 0) throw ConfigError("numerics.N must be even");
    num.points_per_axis = static_cast<int>(N);
  }
  if (n.has("dt")) num.dt = n.positive("dt");
  if (n.has("T")) num.horizon = n.positive("T");
  if (n.has("snapshots")) {
    const long k = n.integer("snapshots");
    if (k < 2) throw ConfigError("numerics.snapshots must be at least 2");
    num.snapshots = static_cast<int>(k);
  }
  if (n.has("radii")) {
    num.radii = n.numbers("radii");
    if (num.radii.empty()) throw ConfigError("numerics.radii must not be empty");
    for (std::size_t i = 0; i < num.radii.size(); ++i) {
      if (!(num.radii[i] > 0.0)) throw ConfigError("numerics.radii must be positive");
      if (i > 0 && !(num.radii[i] > num.radii[i - 1])) throw ConfigError("numerics.radii must be increasing");
    }
  }
  if (n.has("deltas")) {
    num.deltas = n.numbers("deltas");
    if (num.deltas.empty()) throw ConfigError("numerics.deltas must not be empty");
    for (std::size_t i = 0; i < num.deltas.size(); ++i) {
      if (!(num.deltas[i] > 0.0 && num.deltas[i] < 1.0)) throw ConfigError("numerics.deltas must lie in (0, 1)");
      if (i > 0 && !(num.deltas[i] < num.deltas[i - 1])) throw ConfigError("numerics.deltas must be decreasing");
    }
  }
  if (n.has("epsilon")) num.epsilon = n.positive("epsilon");
  if (n.has("scale_with_width")) num.scale_with_width = n.boolean("scale_with_width");
  if (n.has("refine")) num.refine = n.boolean("refine");
  if (n.has("clamp_study")) num.clamp_study = n.boolean("clamp_study");
  n.finish();
  if (num.points_per_axis < 4) throw ConfigError("numerics.N must be at least 4");
  if (num.dt > num.horizon) throw ConfigError("numerics.dt must not exceed numerics.T");
}

GaussianMember parse_member(Node n) {
  GaussianMember m;
  m.width = n.positive("width");
  if (n.has("momentum")) m.momentum = n.vec3(n.raw("momentum"), n.at("momentum"));
  if (n.has("offset")) m.offset = n.vec3(n.raw("offset"), n.at("offset"));
  n.finish();
  return m;
}

void parse_family(Node n, Scenario& s, const std::filesystem::path& base_dir) {
  DataFamily& df = s.family;
  const std::string kind = n.has("kind") ? n.string("kind") : "gaussian_sweep";
  if (kind == "gaussian_sweep") {
    df.kind = DataFamily::Kind::gaussian_sweep;
    const bool product = n.has("widths");
    const bool listed = n.has("members");
    if (product && listed) throw ConfigError("family: give either widths or members, not both");
    if (product) {
      const auto widths = n.numbers("widths");
      if (widths.empty()) throw ConfigError("family.widths must not be empty");
      for (double w : widths)
        if (!(w > 0.0)) throw ConfigError("family.widths must be positive");
      const auto momenta = n.has("momenta") ? n.vec3s("momenta") : std::vector<std::array<double, 3>>{{0, 0, 0}};
      const auto offsets = n.has("offsets") ? n.vec3s("offsets") : std::vector<std::array<double, 3>>{{0, 0, 0}};
      df.members = DataFamily::sweep(widths, momenta, offsets).members;
    } else if (listed) {
      const json& arr = n.raw("members");
      if (!arr.is_array() || arr.empty()) throw ConfigError("family.members must be a non-empty array");
      df.members.clear();
      for (std::size_t i = 0; i < arr.size(); ++i)
        df.members.push_back(parse_member(Node(arr[i], "family.members[" + std::to_string(i) + "]")));
    } else {
      n.has("momenta");
      n.has("offsets");
    }
  } else if (kind == "single") {
    df.kind = DataFamily::Kind::single;
    std::filesystem::path p = n.string("snapshot");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    df.single = read_snapshot(p);
  } else {
    throw ConfigError("family.kind must be gaussian_sweep or single");
  }
  if (n.has("random_phase")) df.random_phase = n.boolean("random_phase");
  if (n.has("mass_budget")) s.mass_budget = n.positive("mass_budget");
  n.finish();
}

}  // namespace

RunConfig parse_config(std::string_view document, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Node root(j, "");
  const std::string name = root.string("scenario");
  const auto parsed = parse_scenario_name(name);
  if (!parsed) throw ConfigError("scenario: unknown name " + name);

  RunConfig cfg;
  cfg.scenario = default_scenario(*parsed);
  if (root.has("equation")) parse_equation(root.child("equation"), cfg.scenario.spec);
  if (root.has("numerics")) parse_numerics(root.child("numerics"), cfg.scenario.numerics);
  if (root.has("family")) parse_family(root.child("family"), cfg.scenario, base_dir);
  if (root.has("seed")) {
    const long seed = root.integer("seed");
    if (seed < 0) throw ConfigError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  cfg.scenario.family.seed = cfg.seed;
  if (root.has("output_dir")) cfg.output_dir = root.string("output_dir");
  root.finish();

  const auto& f = cfg.scenario.family;
  if (f.kind == DataFamily::Kind::single) {
    const Grid& g = f.single->grid();
    const Numerics& n = cfg.scenario.numerics;
    if (g.points_per_axis != n.points_per_axis || g.box_half_width != n.box_half_width)
      throw ConfigError("family.snapshot grid does not match numerics.L and numerics.N");
  }
  if (!cfg.scenario.spec.is_linear() && f.kind == DataFamily::Kind::gaussian_sweep && cfg.scenario.mass_budget <= 0.0)
    throw ConfigError("family.mass_budget is required for a nonlinear equation");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

// ------------------------------------------------------------------ report

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string sweep_file_name(const std::string& scenario, const SweepTable& table) {
  std::string name = scenario + "_" + table.name;
  for (char& c : name)
    if (c == '/' || c == ' ') c = '_';
  return name + ".csv";
}

std::string report_json(const ScenarioReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["valid"] = r.valid;
  j["all_passed"] = r.all_passed();
  j["invalid_reasons"] = r.invalid_reasons;
  json asserts = json::array();
  for (const auto& a : r.assertions)
    asserts.push_back({{"name", a.name},
                       {"passed", a.passed},
                       {"measured", number(a.measured)},
                       {"tolerance", number(a.tolerance)},
                       {"detail", a.detail}});
  j["assertions"] = asserts;
  json meas = json::object();
  for (const auto& [k, v] : r.measurements) meas[k] = number(v);
  j["measurements"] = meas;
  json sweeps = json::array();
  for (const auto& t : r.sweeps)
    sweeps.push_back({{"name", t.name}, {"rows", t.rows.size()}, {"file", sweep_file_name(r.scenario, t)}});
  j["sweeps"] = sweeps;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::string sweep_csv(const std::string& scenario, const SweepTable& table) {
  std::string out = "scenario,member_id,R_or_t,value,reference_norm,ratio,resolution_tag\n";
  for (const auto& row : table.rows) {
    out += csv_field(scenario) + "," + std::to_string(row.member_id) + "," + csv_number(row.R_or_t) + "," +
           csv_number(row.value) + "," + csv_number(row.reference_norm) + "," + csv_number(row.ratio) + "," +
           csv_field(row.resolution_tag) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_report(const ScenarioReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("write failed for " + p.string());
    written.push_back(p);
  };
  put(dir / "report.json", report_json(report));
  for (const auto& t : report.sweeps) put(dir / sweep_file_name(report.scenario, t), sweep_csv(report.scenario, t));
  return written;
}

std::string property_report_json(const PropertyReport& r) {
  json j;
  j["profile"] = r.profile;
  j["dim"] = r.dim;
  j["all_passed"] = r.all_passed();
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"measured", number(c.measured)}, {"detail", c.detail}});
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- snapshot

namespace {

constexpr char magic[4] = {'C', 'S', 'L', 'F'};
constexpr std::size_t header_bytes = 4 + 4 + 4 + 4 + 8 + 8;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}
double get_f64(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

std::string encode_snapshot(const Field& field) {
  if (field.domain() != Domain::space) throw FormatError("snapshots hold fields in physical space");
  const Grid& g = field.grid();
  std::string out;
  out.reserve(header_bytes + 16 * field.size());
  out.append(magic, 4);
  put_u32(out, snapshot_version);
  put_u32(out, static_cast<std::uint32_t>(g.dim));
  put_u32(out, static_cast<std::uint32_t>(g.points_per_axis));
  put_f64(out, g.box_half_width);
  put_f64(out, field.time());
  for (const Complex& z : field.values()) {
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
  return out;
}

Field decode_snapshot(std::string_view in) {
  if (in.size() < header_bytes) throw FormatError("snapshot truncated: header needs 32 bytes, got " + std::to_string(in.size()));
  if (in.substr(0, 4) != std::string_view(magic, 4)) throw FormatError("bad snapshot magic, expected CSLF");
  const std::uint32_t version = get_u32(in, 4);
  if (version != snapshot_version)
    throw FormatError("snapshot version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(snapshot_version) + ")");
  const std::uint32_t dim = get_u32(in, 8);
  const std::uint32_t n = get_u32(in, 12);
  if (dim != 3) throw FormatError("snapshot dim " + std::to_string(dim) + " is not supported (expected 3)");
  if (n == 0 || n > 4096) throw FormatError("snapshot N " + std::to_string(n) + " is out of range");
  const double L = get_f64(in, 16);
  const double t = get_f64(in, 24);
  const std::size_t count = std::size_t(n) * n * n;
  const std::size_t expect = header_bytes + 16 * count;
  if (in.size() != expect)
    throw FormatError("snapshot payload " + std::string(in.size() < expect ? "truncated" : "has trailing bytes") +
                      ": expected " + std::to_string(expect) + " bytes, got " + std::to_string(in.size()));
  Grid grid;
  try {
    grid = make_grid(3, L, static_cast<int>(n));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("snapshot header: ") + e.what());
  }
  Field f(grid, t);
  auto values = f.values();
  for (std::size_t i = 0; i < count; ++i)
    values[i] = Complex(get_f64(in, header_bytes + 16 * i), get_f64(in, header_bytes + 16 * i + 8));
  return f;
}

void write_snapshot(const Field& field, const std::filesystem::path& path) {
  const std::string bytes = encode_snapshot(field);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Field read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str());
}

}  // namespace cslab
