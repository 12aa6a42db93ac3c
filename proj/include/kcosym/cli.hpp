#pragma once

// Command-line surface: `wave`, `quadratic`, `check-noether`, `kernel-dim`,
// `hdw-residual`. Exit codes: 0 all checks passed, 1 a check failed, 2 invalid
// input.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kcosym/fields.hpp"
#include "kcosym/grid.hpp"
#include "kcosym/hamiltonian.hpp"

namespace kcosym::cli {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kInvalidInput = 2 };

/// Invalid configuration or arguments; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WaveSystem {
  double sigma = 1.0;
  double tau = 1.0;
  int spatial_dims = 1;
  std::string profile = "plane_wave";
  double amplitude = 1.0;
  double wavenumber = 1.0;
  double width = 0.5;
  std::vector<double> center;  // gaussian; defaults to the domain midpoint
};

struct QuadraticSystem {
  std::vector<Mat> metrics;
  Mat stiffness;  // V = 1/2 q^T K q
  std::string profile = "constant";  // constant | sine (times sin(kappa x_1))
  Vec displacement;
  Vec velocity;
  double wavenumber = 1.0;
};

struct AxisSpec {
  double start = 0.0;
  double stop = 1.0;
  int nodes = 0;  // 0: derive from cfl (time axis only)
  Boundary boundary = Boundary::periodic;
};

struct GridSpec {
  AxisSpec time{0.0, 1.0, 0, Boundary::dirichlet};
  double cfl = 0.5;
  std::vector<AxisSpec> space;
};

struct FieldSpec {
  std::string family = "translation";  // translation | rotation | linear | reeb
  Vec direction;                       // translation
  std::vector<int> plane;              // rotation, 1-based configuration axes
  Mat matrix;                          // linear generator
  int index = 1;                       // reeb, 1-based
};

struct SampleSpec {
  std::size_t count = 256;
  double half_width = 2.0;
};

struct RunConfig {
  std::string system_type = "wave";  // wave | quadratic
  WaveSystem wave;
  QuadraticSystem quadratic;
  GridSpec grid;
  FieldSpec field;
  SampleSpec samples;
  std::map<std::string, double> tolerances;
  int refine = 1;
  std::uint64_t seed = 42;
  std::optional<std::string> section_path;
  std::optional<std::string> output_dir;
};

/// Defaults for `command`, overlaid with the JSON document at `path` (if any).
RunConfig load_config(const std::string& command, const std::optional<std::string>& path);
RunConfig parse_config(const std::string& command, const std::string& json_text);
/// Re-validates after flag overrides; throws ConfigError.
void finalize_config(const std::string& command, RunConfig& config);

/// Grid for refinement level `level` (spatial node counts doubled per level).
BaseGrid make_grid(const RunConfig& config, int level);
QuadraticHamiltonian make_hamiltonian(const RunConfig& config);

struct CheckRecord {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;

  /// residual <= tol.
  void add(std::string name, double residual, double tol);
  bool passed() const;
  /// `check=<name> residual=<float> tol=<float> verdict=<pass|fail>` lines
  /// framed by `command=`, `seed=` and `overall=` lines.
  std::string render() const;
};

/// Full CLI entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kcosym::cli
