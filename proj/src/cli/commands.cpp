#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "kcosym/cli.hpp"
#include "kcosym/sampling.hpp"

namespace kcosym::cli {

void Report::add(std::string name, double residual, double tol) {
  checks.push_back({std::move(name), residual, tol, std::isfinite(residual) && residual <= tol});
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

std::string Report::render() const {
  std::ostringstream out;
  out << "command=" << command << '\n' << "seed=" << seed << '\n';
  for (const CheckRecord& c : checks) {
    out << "check=" << c.name << " residual=" << format_double(c.residual) << " tol=" << format_double(c.tol)
        << " verdict=" << (c.pass ? "pass" : "fail") << '\n';
  }
  out << "overall=" << (passed() ? "pass" : "fail") << '\n';
  return out.str();
}

namespace {

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<int> refine;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> section;
};

// Tolerances --tol replaces: absolute residual checks only, not ratio bands.
const char* const kAbsoluteChecks[] = {"divergence", "hdw_residual", "max_error", "field_equation", "noether",
                                       "killing"};

RunConfig resolve(const std::string& command, const Options& opt) {
  RunConfig c = load_config(command, opt.config);
  if (opt.tol) {
    if (!(*opt.tol > 0.0) || !std::isfinite(*opt.tol)) throw ConfigError("--tol: tolerance must be positive");
    for (const char* name : kAbsoluteChecks) {
      if (c.tolerances.count(name)) c.tolerances[name] = *opt.tol;
    }
  }
  if (opt.refine) c.refine = *opt.refine;
  if (opt.seed) c.seed = *opt.seed;
  if (opt.out) c.output_dir = *opt.out;
  if (opt.section) c.section_path = *opt.section;
  finalize_config(command, c);
  return c;
}

std::filesystem::path output_dir(const RunConfig& c) {
  const std::filesystem::path dir = c.output_dir.value_or("kcosym_out");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("--out: cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

int finish(const Report& report, const RunConfig& c, std::ostream& out) {
  const std::string text = report.render();
  out << text;
  const auto path = output_dir(c) / "report.txt";
  std::ofstream f(path);
  if (!f || !(f << text)) throw ConfigError("cannot write " + path.string());
  return report.passed() ? kPass : kCheckFailed;
}

double tol_of(const RunConfig& c, const std::string& name) { return c.tolerances.at(name); }

WaveProfile make_profile(const RunConfig& c, const BaseGrid& grid) {
  const WaveSystem& w = c.wave;
  const double speed = std::sqrt(w.tau / w.sigma);
  if (w.profile == "plane_wave") return plane_wave_profile(speed, w.amplitude, w.wavenumber);
  if (w.profile == "standing_wave") return standing_wave_profile(speed, w.amplitude, w.wavenumber);
  Vec center(w.spatial_dims);
  for (int a = 0; a < w.spatial_dims; ++a) {
    const Axis& ax = grid.axis(a + 1);
    center(a) = w.center.empty() ? 0.5 * (ax.start + ax.stop) : w.center[static_cast<std::size_t>(a)];
  }
  return gaussian_profile(center, w.width, w.amplitude);
}

// Relative agreement of Div(F o psi) with the field-equation residual on
// nodes where both are defined.
double divergence_agreement(const NodalField& div, const NodalField& field) {
  std::vector<double> div_at(div.nodes.empty() ? 0 : div.nodes.back() + 1, 0.0);
  std::vector<unsigned char> has(div_at.size(), 0);
  for (std::size_t r = 0; r < div.nodes.size(); ++r) {
    div_at[div.nodes[r]] = div.values(static_cast<Eigen::Index>(r), 0);
    has[div.nodes[r]] = 1;
  }
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t r = 0; r < field.nodes.size(); ++r) {
    const std::size_t node = field.nodes[r];
    if (node >= has.size() || !has[node]) continue;
    const double ref = field.values(static_cast<Eigen::Index>(r), 0);
    diff = std::max(diff, std::abs(div_at[node] - ref));
    scale = std::max(scale, std::abs(ref));
  }
  if (scale == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
  return diff / scale;
}

int cmd_wave(const RunConfig& c, std::ostream& out) {
  if (c.system_type != "wave") throw ConfigError("wave: system.type must be 'wave'");
  Report report{"wave", c.seed, {}};
  const QuadraticHamiltonian h = make_hamiltonian(c);
  const ConservedCurrent current = conserved_from_killing(BaseVectorField::translation(h.dims().k(), Vec::Ones(1)));

  std::vector<double> errors;
  std::vector<double> divs;
  std::optional<SectionGrid> finest;
  double agreement = 0.0;
  double hdw = 0.0;
  bool has_exact = false;
  for (int level = 0; level < c.refine; ++level) {
    const BaseGrid grid = make_grid(c, level);
    const WaveProfile profile = make_profile(c, grid);
    WaveParams params{c.wave.sigma, c.wave.tau, c.wave.spatial_dims, profile.displacement, profile.velocity};
    SectionGrid section = integrate_wave(params, grid);
    const NodalField div = divergence(current, section);
    divs.push_back(div.max_abs());
    if (profile.exact) {
      has_exact = true;
      errors.push_back(max_error(section, profile.exact));
    }
    if (level + 1 == c.refine) {
      agreement = divergence_agreement(div, field_equation_residual(h, section));
      hdw = hdw_residual_on_section(h, section).max_abs();
      finest.emplace(std::move(section));
    }
  }

  report.add("divergence", divs.back(), tol_of(c, "divergence"));
  report.add("divergence_vs_field_equation", agreement, tol_of(c, "divergence_vs_field_equation"));
  report.add("hdw_residual", hdw, tol_of(c, "hdw_residual"));
  if (has_exact) report.add("max_error", errors.back(), tol_of(c, "max_error"));
  // Second order: successive ratios near 4, checked as |ratio - 4|.
  for (std::size_t l = 1; l < divs.size(); ++l) {
    if (has_exact) {
      report.add("error_ratio_" + std::to_string(l), std::abs(errors[l - 1] / errors[l] - 4.0),
                 tol_of(c, "error_ratio"));
    }
    report.add("divergence_ratio_" + std::to_string(l), std::abs(divs[l - 1] / divs[l] - 4.0),
               tol_of(c, "divergence_ratio"));
  }
  write_section_csv((output_dir(c) / "section.csv").string(), *finest);
  return finish(report, c, out);
}

InitialData quadratic_initial(const QuadraticSystem& s) {
  const Vec q0 = s.displacement;
  const Vec v0 = s.velocity;
  if (s.profile == "constant") {
    return {[q0](const Vec&) { return q0; }, [v0](const Vec&) { return v0; }};
  }
  const double kappa = s.wavenumber;
  return {[q0, kappa](const Vec& x) -> Vec { return x.size() ? Vec(q0 * std::sin(kappa * x(0))) : q0; },
          [v0, kappa](const Vec& x) -> Vec { return x.size() ? Vec(v0 * std::sin(kappa * x(0))) : v0; }};
}

int cmd_quadratic(const RunConfig& c, std::ostream& out) {
  if (c.system_type != "quadratic") throw ConfigError("quadratic: system.type must be 'quadratic'");
  Report report{"quadratic", c.seed, {}};
  const QuadraticHamiltonian h = make_hamiltonian(c);
  const BaseGrid grid = make_grid(c, c.refine - 1);
  const SectionGrid section = integrate_quadratic(h, grid, quadratic_initial(c.quadratic));
  report.add("hdw_residual", hdw_residual_on_section(h, section).max_abs(), tol_of(c, "hdw_residual"));
  report.add("field_equation", field_equation_residual(h, section).max_abs(), tol_of(c, "field_equation"));
  write_section_csv((output_dir(c) / "section.csv").string(), section);
  return finish(report, c, out);
}

int cmd_hdw_residual(const RunConfig& c, std::ostream& out) {
  if (!c.section_path) throw ConfigError("hdw-residual: a section CSV path is required");
  Report report{"hdw-residual", c.seed, {}};
  const QuadraticHamiltonian h = make_hamiltonian(c);
  const BaseGrid grid = make_grid(c, c.refine - 1);
  SectionGrid section = [&] {
    try {
      return read_section_csv(*c.section_path, grid);
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
  }();
  if (!(section.dims() == h.dims())) throw ConfigError("hdw-residual: section dimensions differ from the system");
  report.add("hdw_residual", hdw_residual_on_section(h, section).max_abs(), tol_of(c, "hdw_residual"));
  return finish(report, c, out);
}

std::optional<BaseVectorField> base_field(const FieldSpec& f, const Dimensions& d) {
  const int n = d.n();
  if (f.family == "translation") {
    Vec dir = f.direction.size() ? f.direction : Vec(Vec::Unit(n, 0));
    if (dir.size() != n) throw ConfigError("field.direction: needs n entries");
    return BaseVectorField::translation(d.k(), dir);
  }
  if (f.family == "rotation") {
    const std::vector<int> plane = f.plane.empty() ? std::vector<int>{1, 2} : f.plane;
    if (n < 2) throw ConfigError("field: rotations need n >= 2");
    const int i = plane[0] - 1;
    const int j = plane[1] - 1;
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw ConfigError("field.plane: axes out of range");
    Mat m = Mat::Zero(n, n);
    m(i, j) = -1.0;
    m(j, i) = 1.0;
    return BaseVectorField::linear(d.k(), m);
  }
  if (f.family == "linear") {
    if (f.matrix.rows() != n || f.matrix.cols() != n) throw ConfigError("field.matrix: must be n x n");
    return BaseVectorField::linear(d.k(), f.matrix);
  }
  if (f.family == "reeb") {
    if (f.index < 1 || f.index > d.k()) throw ConfigError("field.index: must be in 1..k");
    return std::nullopt;
  }
  throw ConfigError("field.family: unknown family '" + f.family + "'");
}

void write_current_csv(const std::filesystem::path& path, const ConservedCurrent& f,
                       const std::vector<ChartPoint>& points) {
  const Dimensions d = f.dims;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (int a = 1; a <= d.k(); ++a) out << "t" << a << ",";
  for (int i = 1; i <= d.n(); ++i) out << "q" << i << ",";
  for (int a = 1; a <= d.k(); ++a) {
    for (int i = 1; i <= d.n(); ++i) out << "p" << a << "_" << i << ",";
  }
  for (int a = 1; a <= d.k(); ++a) out << "F" << a << (a < d.k() ? "," : "\n");
  for (const ChartPoint& x : points) {
    const Vec flat = x.flat();
    for (Eigen::Index c = 0; c < flat.size(); ++c) out << format_double(flat(c)) << ",";
    const Vec v = f(x);
    for (Eigen::Index a = 0; a < v.size(); ++a) out << format_double(v(a)) << (a + 1 < v.size() ? "," : "\n");
  }
}

int cmd_check_noether(const RunConfig& c, std::ostream& out) {
  Report report{"check-noether", c.seed, {}};
  auto h = std::make_shared<const QuadraticHamiltonian>(make_hamiltonian(c));
  const Dimensions d = h->dims();
  const std::optional<BaseVectorField> z = base_field(c.field, d);
  const PhaseVectorField y = z ? complete_lift(*z) : PhaseVectorField::constant(reeb(d, c.field.index - 1));
  const std::vector<ChartPoint> samples = sample_chart(d, c.samples.half_width, c.samples.count, c.seed);

  const double tol = tol_of(c, "noether");
  if (z) {
    std::vector<Vec> qs;
    qs.reserve(samples.size());
    for (const ChartPoint& x : samples) qs.push_back(x.q);
    report.add("killing", killing_check(*z, h->metrics(), qs), tol_of(c, "killing"));
  }
  const NoetherReport nr = noether_check(y, *h, samples, tol);
  report.add("noether_omega", nr.residual_omega, tol);
  report.add("noether_eta", nr.residual_eta, tol);
  report.add("noether_hamiltonian", nr.residual_H, tol);

  if (nr.passed()) {
    const ConservedCurrent f = conserved_from_noether(y, nr, ChartPoint::zero(d));
    const HamiltonianKVectorField xh = build_hdw(h);
    double defect = 0.0;
    for (const ChartPoint& x : samples) defect = std::max(defect, std::abs(conservation_defect(f, xh(x), x)));
    report.add("current_conservation", defect, tol_of(c, "current_conservation"));
    write_current_csv(output_dir(c) / "current.csv", f, samples);
  }
  return finish(report, c, out);
}

int cmd_kernel_dim(int k, int n, std::ostream& out) {
  if (k < 1 || n < 1) throw ConfigError("kernel-dim: k and n must be positive");
  if (static_cast<long long>(k) * n > 400) throw ConfigError("kernel-dim: k * n too large (limit 400)");
  const Dimensions d(k, n);
  const int numeric = kernel_dimension(d);
  const int closed = expected_kernel_dimension(d);
  out << numeric << ' ' << closed << '\n';
  return numeric == closed ? kPass : kCheckFailed;
}

constexpr const char* kConfigHelp = R"(Config file (JSON, comments allowed). Defaults:
  system.type            wave (quadratic for the `quadratic` command)
  system (wave)          sigma 1, tau 1, spatial_dims 1,
                         profile {name plane_wave|standing_wave|gaussian,
                                  amplitude 1, wavenumber 1, width 0.5, center midpoint}
  system (quadratic)     metrics [[[1]],[[-1]]], potential {type zero|harmonic, stiffness},
                         initial {profile constant|sine, displacement, velocity, wavenumber 1}
                         (quadratic command default: harmonic stiffness [[1]], sine profile)
  grid.time              {start 0, stop 1, nodes 0}; nodes 0 derives the step from grid.cfl
  grid.cfl               0.5 (must be <= 1)
  grid.space             one axis per spatial dimension,
                         {start 0, stop 2 pi, nodes 64, boundary periodic|dirichlet}
  refine                 wave 3, others 1; spatial nodes double per level
  checks                 wave: divergence 1e-2, hdw_residual 1e-2, max_error 2e-3,
                           divergence_vs_field_equation 0.05, error_ratio 0.4, divergence_ratio 0.4
                         quadratic: hdw_residual 5e-2, field_equation 1e-2
                         check-noether: noether 1e-8, killing 1e-8, current_conservation 1e-6
                         hdw-residual: hdw_residual 1e-2
  field                  check-noether candidate: {family translation|rotation|linear|reeb,
                           direction [1,0,..], plane [1,2], matrix [[..]], index 1}
  samples                {count 256, half_width 2}
  section                hdw-residual: path of a section CSV on the configured grid
  seed                   42
  output                 kcosym_out
Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input.)";

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-cosymplectic Hamiltonian field theory: solvers and verification checks", "kcosym"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  Options opt;
  std::string section;
  int k = 0;
  int n = 0;
  auto add_common = [&opt](CLI::App* sub, bool with_refine) {
    sub->add_option("--config", opt.config, "JSON config file (see defaults below)");
    sub->add_option("--out", opt.out, "output directory (default kcosym_out)");
    sub->add_option("--tol", opt.tol, "tolerance for every absolute residual check");
    if (with_refine) sub->add_option("--refine", opt.refine, "number of refinement levels");
    sub->add_option("--seed", opt.seed, "sampling seed (default 42)");
  };
  CLI::App* wave = app.add_subcommand("wave", "integrate the wave equation and verify conservation");
  add_common(wave, true);
  CLI::App* quad = app.add_subcommand("quadratic", "integrate a quadratic system and report residuals");
  add_common(quad, true);
  CLI::App* noether = app.add_subcommand("check-noether", "check a candidate symmetry and emit its current");
  add_common(noether, false);
  CLI::App* hdw = app.add_subcommand("hdw-residual", "residual of the field equations on a section CSV");
  add_common(hdw, true);
  hdw->add_option("section", section, "section CSV (overrides config 'section')");
  CLI::App* kdim = app.add_subcommand("kernel-dim", "numerical and closed-form kernel dimension");
  kdim->add_option("k", k, "number of base parameters")->required();
  kdim->add_option("n", n, "configuration dimension")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInvalidInput;
  }

  try {
    if (kdim->parsed()) return cmd_kernel_dim(k, n, out);
    if (wave->parsed()) return cmd_wave(resolve("wave", opt), out);
    if (quad->parsed()) return cmd_quadratic(resolve("quadratic", opt), out);
    if (noether->parsed()) return cmd_check_noether(resolve("check-noether", opt), out);
    if (hdw->parsed()) {
      if (!section.empty()) opt.section = section;
      return cmd_hdw_residual(resolve("hdw-residual", opt), out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  err << "error: no command\n";
  return kInvalidInput;
}

}  // namespace kcosym::cli
