#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "reflab/geometry.hpp"
#include "reflab/phi.hpp"
#include "reflab/rng.hpp"

namespace reflab {

/// base: Z;  phi: Z - 2 grad log phi;  phi4: Z - 4 grad log phi.
enum class DriftVariant { base, phi, phi4 };
const char* to_string(DriftVariant v);
DriftVariant parse_drift_variant(const std::string& s);

struct SimConfig {
  double h = 1e-4;
  std::string scheme = "projection";
  std::uint64_t seed = 0;
  DriftVariant variant = DriftVariant::base;
  const PhiField* phi = nullptr;  ///< required by the phi and phi4 variants

  VectorField stoch_field;  ///< v in the integral of <u^{-1} v(X), dB>
  VectorField tilt_field;   ///< Girsanov tilt Z~
  std::vector<ScalarField> integrands;
  std::vector<double> exit_radii;  ///< sigma_r measured from the starting point
  bool transport_frame = true;
  double geo_step = kDefaultGeoStep;
};

struct PathState {
  Vec x;
  Vec origin;  ///< starting point, for the exit times
  Mat frame;  ///< columns: g-orthonormal basis at x
  double t = 0.0;
  double local_time = 0.0;
  double log_weight = 0.0;
  double stoch_integral = 0.0;
  std::vector<double> integrals;
  std::vector<double> exit_times;       ///< +inf until sigma_r
  std::vector<double> local_at_exit;    ///< l frozen at sigma_r
  bool aborted = false;
};

/// Terminal values of a path at one requested time.
struct Snapshot {
  double t = 0.0;
  Vec x;
  double local_time = 0.0;
  double log_weight = 0.0;
  double stoch_integral = 0.0;
  std::vector<double> integrals;
  std::vector<double> exit_times;
  std::vector<double> local_at_exit;

  /// l_{t ^ sigma_r} for registered radius k
  double stopped_local_time(std::size_t k) const {
    return exit_times[k] <= t ? local_at_exit[k] : local_time;
  }
  bool survived(std::size_t k) const { return exit_times[k] > t; }
};

struct PathRecord {
  std::uint64_t path_index = 0;
  std::vector<Snapshot> snapshots;
  bool aborted = false;
};

/// One Euler-Maruyama step of the reflected equation in a fixed chart.
/// Built once per (manifold, config) so the per-step work avoids repeated
/// setup; holds no mutable state.
class Stepper {
 public:
  Stepper(const ManifoldSpec& m, const SimConfig& cfg);

  PathState initial_state(const Vec& x0) const;

  /// Advances `s` by h using the d normals in `gauss`.
  void step(PathState& s, const Vec& gauss) const;

  const ManifoldSpec& manifold() const { return m_; }
  const SimConfig& config() const { return cfg_; }

  /// g-orthonormal frame at x (Gram-Schmidt of the chart axes or of `seed`).
  Mat orthonormalize(const Vec& x, const Mat& seed) const;

 private:
  Mat metric(const Vec& x) const;
  Mat metric_inverse(const Vec& x) const;
  Christoffel connection(const Vec& x) const;

  const ManifoldSpec& m_;
  SimConfig cfg_;
  int d_;
  double sqrt_h_;
  bool has_drift_;
  bool needs_phi_;
  double phi_factor_;
};

/// Simulates from x0 over [0, T] and records a snapshot at each requested
/// time (all multiples of h, sorted). T = 0 gives the starting values.
PathRecord simulate_path(const Stepper& stepper, const Vec& x0, const std::vector<double>& times,
                         std::uint64_t path_index);

/// Same path through the generic Stepper::step, ignoring builtin tags.
PathRecord simulate_path_generic(const Stepper& stepper, const Vec& x0, const std::vector<double>& times,
                                 std::uint64_t path_index);

/// Number of steps of size h to reach t; throws unless t is a multiple of h.
std::uint64_t steps_for(double t, double h);

/// log_weight += <Z~, frame gauss>_g sqrt(h) - |Z~|_g^2 h / 2
double girsanov_logweight_update(double log_weight, const Vec& tilt, const Mat& g, const Mat& frame, const Vec& gauss,
                                 double h);

/// Little-endian binary path dump: magic "REFLPATH", u32 version, u32 dim,
/// then per snapshot: u64 path_index, f64 t, f64 x[dim], f64 l, f64 log_weight.
void write_path_dump_header(std::ostream& out, int dim);
void write_path_dump_records(std::ostream& out, const PathRecord& rec);

}  // namespace reflab
