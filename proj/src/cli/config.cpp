#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kcosym/cli.hpp"

namespace kcosym::cli {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": not finite");
  return x;
}

int get_int(const json& obj, const std::string& key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

Vec parse_vector(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(where + ": expected numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  if (!out.allFinite()) throw ConfigError(where + ": entries must be finite");
  return out;
}

Mat parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!v[r].is_array()) throw ConfigError(where + ": expected an array of rows");
    if (r == 0) cols = v[r].size();
    if (v[r].size() != cols || cols == 0) throw ConfigError(where + ": ragged or empty rows");
  }
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    m.row(static_cast<Eigen::Index>(r)) = parse_vector(v[r], where).transpose();
  }
  return m;
}

Boundary parse_boundary(const std::string& s, const std::string& where) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "dirichlet") return Boundary::dirichlet;
  throw ConfigError(where + ": boundary must be 'periodic' or 'dirichlet'");
}

AxisSpec parse_axis(const json& obj, const std::string& where, AxisSpec fallback) {
  require_keys(obj, where, {"start", "stop", "nodes", "boundary"});
  AxisSpec a = fallback;
  a.start = get_number(obj, "start", where, a.start);
  a.stop = get_number(obj, "stop", where, a.stop);
  a.nodes = get_int(obj, "nodes", where, a.nodes);
  if (obj.contains("boundary")) a.boundary = parse_boundary(get_string(obj, "boundary", where, ""), where);
  if (!(a.stop > a.start)) throw ConfigError(where + ": stop must exceed start");
  return a;
}

AxisSpec default_space_axis() {
  return {0.0, 2.0 * std::numbers::pi, 64, Boundary::periodic};
}

void parse_wave(const json& obj, WaveSystem& w) {
  require_keys(obj, "system", {"type", "sigma", "tau", "spatial_dims", "profile"});
  w.sigma = get_number(obj, "sigma", "system", w.sigma);
  w.tau = get_number(obj, "tau", "system", w.tau);
  w.spatial_dims = get_int(obj, "spatial_dims", "system", w.spatial_dims);
  if (obj.contains("profile")) {
    const json& p = obj.at("profile");
    require_keys(p, "system.profile", {"name", "amplitude", "wavenumber", "width", "center"});
    w.profile = get_string(p, "name", "system.profile", w.profile);
    w.amplitude = get_number(p, "amplitude", "system.profile", w.amplitude);
    w.wavenumber = get_number(p, "wavenumber", "system.profile", w.wavenumber);
    w.width = get_number(p, "width", "system.profile", w.width);
    if (p.contains("center")) {
      const Vec c = parse_vector(p.at("center"), "system.profile.center");
      w.center.assign(c.data(), c.data() + c.size());
    }
  }
}

void parse_quadratic(const json& obj, QuadraticSystem& s) {
  require_keys(obj, "system", {"type", "metrics", "potential", "initial"});
  if (obj.contains("metrics")) {
    const json& ms = obj.at("metrics");
    if (!ms.is_array() || ms.empty()) throw ConfigError("system.metrics: expected a non-empty array of matrices");
    s.metrics.clear();
    for (std::size_t a = 0; a < ms.size(); ++a) {
      s.metrics.push_back(parse_matrix(ms[a], "system.metrics[" + std::to_string(a) + "]"));
    }
  }
  const Eigen::Index n = s.metrics.front().rows();
  for (const Mat& g : s.metrics) {
    if (g.rows() != n || g.cols() != n) throw ConfigError("system.metrics: all metrics must be n x n");
  }
  if (obj.contains("potential")) {
    const json& p = obj.at("potential");
    require_keys(p, "system.potential", {"type", "stiffness"});
    const std::string type = get_string(p, "type", "system.potential", "zero");
    if (type == "zero") {
      s.stiffness = Mat::Zero(n, n);
    } else if (type == "harmonic") {
      if (!p.contains("stiffness")) throw ConfigError("system.potential: harmonic requires 'stiffness'");
      s.stiffness = parse_matrix(p.at("stiffness"), "system.potential.stiffness");
    } else {
      throw ConfigError("system.potential.type: unknown potential '" + type + "'");
    }
  }
  if (s.stiffness.rows() != n || s.stiffness.cols() != n) {
    if (!obj.contains("potential")) {
      s.stiffness = Mat::Zero(n, n);
    } else {
      throw ConfigError("system.potential.stiffness: must be n x n");
    }
  }
  if (obj.contains("initial")) {
    const json& i = obj.at("initial");
    require_keys(i, "system.initial", {"profile", "displacement", "velocity", "wavenumber"});
    s.profile = get_string(i, "profile", "system.initial", s.profile);
    if (i.contains("displacement")) s.displacement = parse_vector(i.at("displacement"), "system.initial.displacement");
    if (i.contains("velocity")) s.velocity = parse_vector(i.at("velocity"), "system.initial.velocity");
    s.wavenumber = get_number(i, "wavenumber", "system.initial", s.wavenumber);
  }
  if (s.displacement.size() != n) s.displacement = s.displacement.size() == 0 ? Vec(Vec::Zero(n)) : s.displacement;
  if (s.velocity.size() != n) s.velocity = s.velocity.size() == 0 ? Vec(Vec::Zero(n)) : s.velocity;
  if (s.displacement.size() != n || s.velocity.size() != n) {
    throw ConfigError("system.initial: displacement and velocity need n entries");
  }
}

void parse_field(const json& obj, FieldSpec& f) {
  require_keys(obj, "field", {"family", "direction", "plane", "matrix", "index"});
  f.family = get_string(obj, "family", "field", f.family);
  if (obj.contains("direction")) f.direction = parse_vector(obj.at("direction"), "field.direction");
  if (obj.contains("matrix")) f.matrix = parse_matrix(obj.at("matrix"), "field.matrix");
  if (obj.contains("plane")) {
    const json& p = obj.at("plane");
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      throw ConfigError("field.plane: expected two integer axis indices");
    }
    f.plane = {p[0].get<int>(), p[1].get<int>()};
  }
  f.index = get_int(obj, "index", "field", f.index);
}

RunConfig defaults_for(const std::string& command) {
  RunConfig c;
  c.grid.space = {default_space_axis()};
  if (command == "wave") {
    c.refine = 3;
    c.tolerances = {{"divergence", 1e-2},   {"hdw_residual", 1e-2},
                    {"max_error", 2e-3},    {"divergence_vs_field_equation", 0.05},
                    {"error_ratio", 0.4},   {"divergence_ratio", 0.4}};
  } else if (command == "quadratic") {
    c.system_type = "quadratic";
    c.quadratic.metrics = {Mat::Identity(1, 1), -Mat::Identity(1, 1)};
    c.quadratic.stiffness = Mat::Identity(1, 1);
    c.quadratic.profile = "sine";
    c.quadratic.displacement = Vec::Ones(1);
    c.quadratic.velocity = Vec::Zero(1);
    c.tolerances = {{"hdw_residual", 5e-2}, {"field_equation", 1e-2}};
  } else if (command == "check-noether") {
    c.tolerances = {{"noether", 1e-8}, {"killing", 1e-8}, {"current_conservation", 1e-6}};
  } else if (command == "hdw-residual") {
    c.tolerances = {{"hdw_residual", 1e-2}};
  }
  return c;
}

void validate(const std::string& command, RunConfig& c) {
  if (c.system_type == "wave") {
    const WaveSystem& w = c.wave;
    if (!(w.sigma > 0.0) || !(w.tau > 0.0)) throw ConfigError("system: sigma and tau must be positive");
    if (w.spatial_dims < 1 || w.spatial_dims > 3) throw ConfigError("system.spatial_dims: must be 1, 2 or 3");
    if (w.profile != "plane_wave" && w.profile != "standing_wave" && w.profile != "gaussian") {
      throw ConfigError("system.profile.name: unknown profile '" + w.profile + "'");
    }
    if (!(w.width > 0.0)) throw ConfigError("system.profile.width: must be positive");
    if (!w.center.empty() && static_cast<int>(w.center.size()) != w.spatial_dims) {
      throw ConfigError("system.profile.center: needs spatial_dims entries");
    }
  } else if (c.system_type == "quadratic") {
    if (c.quadratic.profile != "constant" && c.quadratic.profile != "sine") {
      throw ConfigError("system.initial.profile: unknown profile '" + c.quadratic.profile + "'");
    }
  } else {
    throw ConfigError("system.type: unknown system '" + c.system_type + "'");
  }

  const int k = c.system_type == "wave" ? c.wave.spatial_dims + 1 : static_cast<int>(c.quadratic.metrics.size());
  if (static_cast<int>(c.grid.space.size()) != k - 1) {
    throw ConfigError("grid.space: expected " + std::to_string(k - 1) + " spatial axes, got " +
                      std::to_string(c.grid.space.size()));
  }
  for (const AxisSpec& a : c.grid.space) {
    if (a.nodes < 3) throw ConfigError("grid.space: every axis needs at least 3 nodes");
  }
  if (c.grid.time.nodes != 0 && c.grid.time.nodes < 3) throw ConfigError("grid.time.nodes: at least 3 (or 0 for cfl)");
  if (c.grid.time.boundary != Boundary::dirichlet) throw ConfigError("grid.time: the evolution axis cannot be periodic");
  if (!(c.grid.cfl > 0.0)) throw ConfigError("grid.cfl: must be positive");
  if (c.grid.cfl > 1.0) {
    throw ConfigError("grid.cfl: CFL condition violated (requested " + format_double(c.grid.cfl) + " > 1)");
  }
  if (c.refine < 1 || c.refine > 6) throw ConfigError("refine: must be between 1 and 6");
  for (const auto& [name, tol] : c.tolerances) {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("checks." + name + ": tolerance must be positive");
  }
  if (c.samples.count == 0) throw ConfigError("samples.count: must be positive");
  if (!(c.samples.half_width > 0.0)) throw ConfigError("samples.half_width: must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& command, const std::string& json_text) {
  RunConfig c = defaults_for(command);
  json doc;
  try {
    doc = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    require_keys(doc, "config", {"system", "grid", "checks", "field", "samples", "refine", "section", "seed", "output"});

    if (doc.contains("system")) {
      const json& s = doc.at("system");
      if (!s.is_object()) throw ConfigError("system: expected an object");
      c.system_type = get_string(s, "type", "system", c.system_type);
      if (c.system_type == "wave") {
        parse_wave(s, c.wave);
      } else if (c.system_type == "quadratic") {
        if (c.quadratic.metrics.empty()) {
          c.quadratic.metrics = {Mat::Identity(1, 1), -Mat::Identity(1, 1)};
        }
        parse_quadratic(s, c.quadratic);
      } else {
        throw ConfigError("system.type: unknown system '" + c.system_type + "'");
      }
    }

    const int spatial = c.system_type == "wave" ? c.wave.spatial_dims
                                                : static_cast<int>(c.quadratic.metrics.size()) - 1;
    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      require_keys(g, "grid", {"time", "cfl", "space"});
      if (g.contains("time")) c.grid.time = parse_axis(g.at("time"), "grid.time", c.grid.time);
      c.grid.cfl = get_number(g, "cfl", "grid", c.grid.cfl);
      if (g.contains("space")) {
        const json& sp = g.at("space");
        if (!sp.is_array()) throw ConfigError("grid.space: expected an array of axes");
        c.grid.space.clear();
        for (std::size_t a = 0; a < sp.size(); ++a) {
          c.grid.space.push_back(parse_axis(sp[a], "grid.space[" + std::to_string(a) + "]", default_space_axis()));
        }
      } else {
        c.grid.space.assign(static_cast<std::size_t>(std::max(spatial, 0)), default_space_axis());
      }
    } else {
      c.grid.space.assign(static_cast<std::size_t>(std::max(spatial, 0)), default_space_axis());
    }

    if (doc.contains("checks")) {
      const json& ch = doc.at("checks");
      if (!ch.is_object()) throw ConfigError("checks: expected an object of name: tolerance");
      for (const auto& [name, value] : ch.items()) {
        if (!c.tolerances.count(name)) throw ConfigError("checks: unknown check '" + name + "'");
        c.tolerances[name] = get_number(ch, name, "checks", 0.0);
      }
    }
    if (doc.contains("field")) parse_field(doc.at("field"), c.field);
    if (doc.contains("samples")) {
      const json& s = doc.at("samples");
      require_keys(s, "samples", {"count", "half_width"});
      const int count = get_int(s, "count", "samples", static_cast<int>(c.samples.count));
      if (count <= 0) throw ConfigError("samples.count: must be positive");
      c.samples.count = static_cast<std::size_t>(count);
      c.samples.half_width = get_number(s, "half_width", "samples", c.samples.half_width);
    }
    c.refine = get_int(doc, "refine", "config", c.refine);
    if (doc.contains("section")) c.section_path = get_string(doc, "section", "config", "");
    if (doc.contains("seed")) {
      if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
      c.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("output")) c.output_dir = get_string(doc, "output", "config", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(command, c);
  return c;
}

RunConfig load_config(const std::string& command, const std::optional<std::string>& path) {
  if (!path) {
    RunConfig c = defaults_for(command);
    validate(command, c);
    return c;
  }
  std::ifstream in(*path);
  if (!in) throw ConfigError("config: cannot open " + *path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(command, text.str());
}

void finalize_config(const std::string& command, RunConfig& config) { validate(command, config); }

BaseGrid make_grid(const RunConfig& config, int level) {
  if (level < 0) throw ConfigError("make_grid: negative refinement level");
  const int scale = 1 << level;
  std::vector<Axis> axes;
  axes.push_back({config.grid.time.start, config.grid.time.stop, 3, Boundary::dirichlet});
  for (const AxisSpec& s : config.grid.space) {
    const int nodes = s.boundary == Boundary::periodic ? s.nodes * scale : (s.nodes - 1) * scale + 1;
    axes.push_back({s.start, s.stop, nodes, s.boundary});
  }

  if (config.grid.time.nodes > 0) {
    axes[0].nodes = (config.grid.time.nodes - 1) * scale + 1;
    return BaseGrid(axes);
  }
  // The CFL number is linear in dt; measure it on a trial grid and pick the
  // fewest steps that keep it at or below the target.
  const QuadraticHamiltonian h = make_hamiltonian(config);
  const BaseGrid trial(axes);
  const double rate = cfl_number(h, trial) / trial.axis(0).spacing();
  if (!(rate > 0.0)) throw ConfigError("grid.time.nodes: required when there are no spatial axes");
  const double span = config.grid.time.stop - config.grid.time.start;
  const double steps = std::ceil(rate * span / config.grid.cfl * (1.0 - 1e-12));
  if (steps > 1e7) throw ConfigError("grid: time step count exceeds 1e7");
  axes[0].nodes = std::max(3, static_cast<int>(steps) + 1);
  return BaseGrid(axes);
}

QuadraticHamiltonian make_hamiltonian(const RunConfig& config) {
  if (config.system_type == "wave") {
    return wave_hamiltonian(config.wave.sigma, config.wave.tau, config.wave.spatial_dims);
  }
  const QuadraticSystem& s = config.quadratic;
  Potential v = s.stiffness.isZero(0.0) ? Potential::zero() : Potential::harmonic(s.stiffness);
  try {
    return QuadraticHamiltonian(MetricFamily(s.metrics), std::move(v));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system.metrics: ") + e.what());
  }
}

}  // namespace kcosym::cli
