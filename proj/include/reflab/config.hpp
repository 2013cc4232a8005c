#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reflab/geometry.hpp"
#include "reflab/oracle.hpp"
#include "reflab/phi.hpp"
#include "reflab/sampler.hpp"

namespace reflab {

/// One experiment section, fully resolved against the defaults.
///
/// Grammar (see README): `#` starts a comment; `key = value` lines; a
/// `[defaults]` section (or keys before any section) is inherited by every
/// following `[experiment LABEL]` section. Lists are whitespace or comma
/// separated; points are natural coordinates separated by `;`.
struct ExperimentConfig {
  std::string label = "main";
  std::string kind;  ///< subcommand; empty means "whatever was asked for"

  std::string manifold = "half_line";
  double length = 1.0;
  double ou_rate = 0.0;
  double window = 6.0;
  double radius = 1.0;
  double r_in = 1.0;
  double r_out = 2.0;
  std::string chart = "stereographic";
  std::string metric_grid;                    ///< file, for manifold = grid
  std::vector<double> grid_disk;              ///< cx cy r; empty means the grid box

  std::string phi = "one";
  std::vector<double> phi_coeffs;
  double phi_r0 = 1.0;
  std::string phi_grid;

  int p = 1;
  std::string K = "auto";  ///< "auto" or a number
  int per_axis = 32;       ///< curvature and geometry sample grid
  double geo_h = kDefaultGeoStep;
  bool strict_class_d = false;
  bool negative = false;

  std::vector<std::string> functions;
  std::vector<Vec> points;
  std::vector<Vec> ys;
  std::vector<double> times;

  std::uint64_t n = 10000;
  double h = 1e-4;
  std::uint64_t seed = 0;
  std::uint64_t chunk = 500;
  std::string scheme = "projection";
  double delta = 1e-3;
  double exit_radius = 0.0;
  double bias = 0.0;  ///< scheme-bias allowance added to every verdict tolerance

  std::string oracle = "pde";  ///< pde, spectral or mc, for semigroup checks
  int pde_intervals = 400;
  int pde_levels = 3;
  double pde_k = 1e-3;
  int truncation = 20;
  int kernel_intervals = 200;
  int hwi_nodes = 4001;
  int ls1_nodes = 8;
  std::string xi = "exp:-2";  ///< exp:a means e^{a t}; const:c

  std::string serialize() const;
  std::string digest() const;
  bool operator==(const ExperimentConfig&) const;
};

struct SuiteConfig {
  std::vector<ExperimentConfig> experiments;
  std::string serialize() const;
};

/// Throws ConfigError naming the offending line and key.
SuiteConfig parse_config(const std::string& text, const std::string& origin = "<config>");
SuiteConfig load_config(const std::string& path);

/// Field-level checks that do not need to build anything.
std::vector<std::string> validate(const ExperimentConfig& c);

ManifoldSpec build_manifold(const ExperimentConfig& c);
PhiField build_phi(const ExperimentConfig& c);
SimConfig build_sim(const ExperimentConfig& c);
PdeOptions build_pde(const ExperimentConfig& c);

const std::vector<std::string>& known_kinds();

}  // namespace reflab
