#pragma once

#include <memory>
#include <string>
#include <vector>

#include "reflab/estimators.hpp"
#include "reflab/oracle.hpp"
#include "reflab/phi.hpp"
#include "reflab/test_functions.hpp"

namespace reflab {

enum class Verdict { holds, violated, inconclusive };
const char* to_string(Verdict v);

/// Hypothesis artifacts a HOLDS verdict must carry.
struct Hypotheses {
  std::string curvature_digest;
  std::string class_d_digest;
  std::vector<std::string> failures;

  bool verified() const { return failures.empty() && !curvature_digest.empty() && !class_d_digest.empty(); }
};

/// K is accepted if it does not exceed the report's certified bound; the
/// class-D report must not fail (a WARN on N phi = 0 is accepted).
Hypotheses check_hypotheses(double K, const CurvatureBoundReport& curvature, const ClassDReport& class_d);

struct CheckReport {
  std::string id;
  std::string experiment;
  std::string digest;  ///< configuration digest
  std::string where;   ///< f, x, y, t of this check
  std::string source;  ///< mc, pde, spectral, quadrature, kernel
  double lhs = 0.0;
  double rhs = 0.0;
  double stat_tol = 0.0;    ///< 3 x combined stderr
  double oracle_tol = 0.0;  ///< certified oracle error
  double bias_tol = 0.0;    ///< scheme-bias allowance
  Verdict verdict = Verdict::inconclusive;
  bool negative = false;  ///< a designated negative test
  std::vector<std::string> hypotheses;
  std::string reason;

  double margin() const { return rhs - lhs; }
  double tolerance() const { return stat_tol + oracle_tol + bias_tol; }
  std::string to_json() const;
};

/// VIOLATED iff lhs > rhs + tolerance; otherwise HOLDS when the hypotheses
/// are verified and INCONCLUSIVE when they are not.
void render(CheckReport& r, const Hypotheses& h);

/// A value with its statistical standard error and certified oracle error.
struct Quantity {
  double value = 0.0;
  double se = 0.0;
  double oracle = 0.0;
};

/// A function together with its zonal form on the hemisphere, when known.
struct Observable {
  ScalarField f;
  Fn1 zonal;
};
Observable observe(const TestFunction& t);
Observable square(const ManifoldSpec& m, const Observable& g);
Observable log_of(const Observable& g);
/// |grad g|^2, or (phi |grad g|)^2 when phi is given
Observable grad_sq(const ManifoldSpec& m, const Observable& g, const PhiField* phi = nullptr,
                   double h = kDefaultGeoStep);

/// P_t g(x) and |grad P_t g|(x) from one source. Results are [g][t][x].
class Semigroup {
 public:
  using Table = std::vector<std::vector<std::vector<Quantity>>>;
  virtual ~Semigroup() = default;
  virtual const char* source() const = 0;
  virtual Table values(const std::vector<Observable>& gs, const std::vector<Vec>& xs,
                       const std::vector<double>& ts) = 0;
  virtual Table gradient_norms(const std::vector<Observable>& gs, const std::vector<Vec>& xs,
                               const std::vector<double>& ts) = 0;
};

/// Finite-volume Crank-Nicolson oracle on 1-D built-ins.
std::unique_ptr<Semigroup> pde_semigroup(const ManifoldSpec& m, const PdeOptions& opt = {});
/// Legendre oracle on the unit hemisphere; observables need a zonal form.
std::unique_ptr<Semigroup> spectral_semigroup(const ManifoldSpec& m, int truncation = 20);
/// Monte Carlo with CRN gradients.
std::unique_ptr<Semigroup> mc_semigroup(const ManifoldSpec& m, const SimConfig& cfg, const RunOptions& opt,
                                        double delta = 1e-3);

/// (e^{a t} - 1) / a, with the series when |a t| < 1e-6.
double expm1_over(double a, double t);

struct CheckContext {
  const ManifoldSpec* m = nullptr;
  const PhiField* phi = nullptr;
  std::string experiment;
  std::string digest;
  Hypotheses hypotheses;
  double bias = 0.0;  ///< scheme-bias allowance added to every tolerance
};

std::string describe_point(const Vec& x);

/// |grad P_t f|(x) against the weighted and the tilted right-hand side,
/// two reports per (f, x, t).
std::vector<CheckReport> verify_gradient_thm11(const CheckContext& ctx, const KField& K,
                                               const std::vector<TestFunction>& fs, const std::vector<Vec>& xs,
                                               const std::vector<double>& ts, const SimConfig& cfg,
                                               const RunOptions& opt, double delta = 1e-3);

/// Flat annulus, phi = 1, f = cos(angle) at (0, r_in) on the inner circle:
/// mode-oracle |grad P_t f|^2 against P_t|grad f|^2, and the MC direction
/// |grad P_t f| against sqrt(P_t|grad f|^2). Designated negative tests.
std::vector<CheckReport> verify_gradient_negative(const CheckContext& ctx, double r_in, double r_out,
                                                  const std::vector<double>& ts, const PdeOptions& pde,
                                                  const SimConfig& cfg, const RunOptions& opt,
                                                  double delta = 1e-3);

/// The four bounds of the corollary for K_phi; (2) runs over pairs (x, y).
std::vector<CheckReport> verify_cor12(const CheckContext& ctx, Semigroup& P, double K_phi, double phi_sup,
                                      const std::vector<TestFunction>& fs, const std::vector<Vec>& xs,
                                      const std::vector<Vec>& ys, const std::vector<double>& ts);

/// The two-sided variance bounds and the log-Harnack bound implied by
/// |grad P_t f|^2 <= xi_t P_t|grad f|^2.
std::vector<CheckReport> verify_xi_consequences(const CheckContext& ctx, Semigroup& P, const Fn1& xi,
                                                const std::string& xi_name, const std::vector<TestFunction>& fs,
                                                const std::vector<Vec>& xs, const std::vector<Vec>& ys,
                                                const std::vector<double>& ts);

std::vector<CheckReport> verify_poincare(const CheckContext& ctx, double K_phi, double phi_sup,
                                         const std::vector<TestFunction>& fs);
std::vector<CheckReport> verify_logsobolev(const CheckContext& ctx, double K_phi, double phi_sup,
                                           const std::vector<TestFunction>& fs);
/// 1-D only; requires K_phi <= 0.
std::vector<CheckReport> verify_hwi_1d(const CheckContext& ctx, double K_phi, double phi_sup,
                                       const std::vector<TestFunction>& fs, int grid_nodes = 4001);
/// Both kernel bounds on the (x, y) grid at each t; 1-D only.
std::vector<CheckReport> verify_heat_kernel(const CheckContext& ctx, double K_phi, double phi_sup,
                                            const std::vector<double>& xs, const std::vector<double>& ys,
                                            const std::vector<double>& ts, int intervals = 200);

/// P_t(f^2 log f^2) <= P_t f^2 log P_t f^2 + 4 |phi|^2 int_0^t e^{-2K(t-s)} P_s Pbar_{t-s} |grad f|^2 ds
/// with the s-integral by the trapezoid rule on `nodes` points; each path
/// runs the base process to s and continues with drift L - 4 grad log phi.
std::vector<CheckReport> verify_semigroup_logsobolev(const CheckContext& ctx, double K_phi, double phi_sup,
                                                     const std::vector<TestFunction>& fs,
                                                     const std::vector<Vec>& xs, const std::vector<double>& ts,
                                                     const SimConfig& cfg, const RunOptions& opt, int nodes = 8);

}  // namespace reflab
