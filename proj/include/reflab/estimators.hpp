#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "reflab/accumulator.hpp"
#include "reflab/sampler.hpp"

namespace reflab {

/// Receives finished paths in canonical (path index) order.
using PathSink = std::function<void(const PathRecord&)>;

struct RunOptions {
  std::uint64_t n = 10000;
  int jobs = 1;
  std::uint64_t chunk = 500;
  PathSink dump;  ///< optional; sees the first leg of every path
};

/// One Monte Carlo pass: every path index runs each leg (stepper, start)
/// with the same normals, and `evaluate` turns the legs' snapshots into
/// `channels` numbers. Paths with an aborted leg are dropped and counted.
struct McPlan {
  std::vector<const Stepper*> steppers;
  std::vector<Vec> starts;
  std::vector<double> times;
  int channels = 1;
  std::function<void(const std::vector<PathRecord>&, double*)> evaluate;
};

struct McRun {
  Moments moments;
  std::uint64_t attempted = 0;
  std::uint64_t aborted = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;

  bool unreliable() const { return attempted && aborted * 1000 >= attempted; }
  McEstimate estimate(int channel) const;
};

McRun run_plan(const McPlan& plan, const RunOptions& opt);

/// K in the weighted/tilted right-hand sides: a constant or a bounded field.
struct KField {
  double constant = 0.0;
  ScalarField field;  ///< used when set
  double at(const Vec& x) const { return field ? field(x) : constant; }
};

/// results[f][t]
using EstimateTable = std::vector<std::vector<McEstimate>>;

EstimateTable estimate_Pt(const ManifoldSpec& m, const SimConfig& cfg, const std::vector<ScalarField>& fs,
                          const Vec& x, const std::vector<double>& ts, const RunOptions& opt);
McEstimate estimate_Pt(const ManifoldSpec& m, const SimConfig& cfg, const ScalarField& f, const Vec& x, double t,
                       const RunOptions& opt);

struct GradEstimate {
  McEstimate norm;      ///< |grad P_t f|(x), plug-in with delta-method error
  McEstimate norm_sq;   ///< |grad P_t f|^2 with the noise floor removed
  bool one_sided = false;
  bool tangential = false;
};

/// CRN central differences of P_t f along the chart axes (interior x) or
/// along the boundary tangent (x on dM), assembled with g^{-1}.
std::vector<std::vector<GradEstimate>> estimate_grad_Pt(const ManifoldSpec& m, const SimConfig& cfg,
                                                        const std::vector<ScalarField>& fs, const Vec& x,
                                                        const std::vector<double>& ts, double delta,
                                                        const RunOptions& opt);

/// (1/phi(x)) E[(phi |grad f|)(X_t) exp(-sqrt2 int <u^{-1} grad log phi, dB> - int (K + |grad log phi|^2))]
/// over base-drift paths.
EstimateTable rhs_thm_weighted(const ManifoldSpec& m, const PhiField& phi, const KField& K,
                               const std::vector<ScalarField>& fs, const Vec& x, const std::vector<double>& ts,
                               const SimConfig& cfg, const RunOptions& opt);

/// (1/phi(x)) E[(phi |grad f|)(X^phi_t) exp(-int K(X^phi_s) ds)] over paths of L - 2 grad log phi.
EstimateTable rhs_thm_tilted(const ManifoldSpec& m, const PhiField& phi, const KField& K,
                             const std::vector<ScalarField>& fs, const Vec& x, const std::vector<double>& ts,
                             const SimConfig& cfg, const RunOptions& opt);

/// E l_{t ^ sigma_r} from x; radius <= 0 means half the chart diameter.
std::vector<McEstimate> local_time_mean(const ManifoldSpec& m, const SimConfig& cfg, const Vec& x,
                                        const std::vector<double>& ts, double radius, const RunOptions& opt);

/// Girsanov check: functionals of the base process reweighted by
/// R = exp(int <u^{-1} Z~, dB> - 1/2 int |Z~|^2) with Z~ = -sqrt2 grad log phi,
/// against the same functionals of the phi-tilted process.
struct GirsanovComparison {
  std::vector<McEstimate> weighted;  ///< f(X_t) R, (int_0^t f) R, 1{sigma_r > t} R
  std::vector<McEstimate> tilted;
  McEstimate mean_weight;            ///< E R
};
GirsanovComparison girsanov_test(const ManifoldSpec& m, const PhiField& phi, const ScalarField& f, const Vec& x,
                                 double t, double radius, const SimConfig& cfg, const RunOptions& opt);

/// Richardson extrapolation of a quantity with error ~ c h^order from
/// estimates at h (coarse) and h/2 (fine).
McEstimate richardson(const McEstimate& coarse, const McEstimate& fine, double order);

/// sqrt(se_a^2 + se_b^2) for independent estimates.
double combined_std_error(const McEstimate& a, const McEstimate& b);

/// Independent seed for a secondary pass of the same experiment.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace reflab
