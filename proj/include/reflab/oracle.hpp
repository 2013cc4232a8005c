#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reflab/geometry.hpp"

namespace reflab {

using Fn1 = std::function<double(double)>;

/// A value with an error bound from grid refinement.
struct Certified {
  double value = 0.0;
  double error = 0.0;
};

/// u_t = e^{-V} (e^V u')' - q u on [a, b] with u'(a) = u'(b) = 0.
/// The drift is Z = V'; q >= 0 is an optional killing rate.
struct SturmLiouville {
  double a = 0.0, b = 1.0;
  Fn1 V;  ///< empty means V = 0
  Fn1 q;  ///< empty means q = 0
};

/// Sturm-Liouville problem of a 1-D built-in (interval or half-line window).
SturmLiouville sturm_liouville_of(const ManifoldSpec& m);

/// Vertex-centred finite volumes: node i carries the mu-weight w_i and the
/// flux between nodes i and i+1 has conductance c_i = e^{V(midpoint)}/dx.
/// The discrete generator W^{-1} S is mu-symmetric and conserves sum w_i u_i.
struct PdeGrid {
  SturmLiouville op;
  int intervals = 0;
  double dx = 0.0;
  std::vector<double> x, w, c, qw, Z, V;

  PdeGrid(const SturmLiouville& op, int intervals);
  int nodes() const { return intervals + 1; }
  std::vector<double> tabulate(const Fn1& f) const;
  /// (W^{-1} S u)_i
  std::vector<double> apply_generator(const std::vector<double>& u) const;
  /// Cubic Lagrange interpolation of nodal values (or of their derivative).
  double interpolate(const std::vector<double>& u, double at, bool derivative = false) const;
  double mass(const std::vector<double>& u) const;
};

/// Crank-Nicolson with a Rannacher start (four backward-Euler half steps);
/// returns the solution at each requested time (multiples of k, sorted).
std::vector<std::vector<double>> evolve(const PdeGrid& grid, const std::vector<double>& u0,
                                        const std::vector<double>& times, double k);

struct PdeOptions {
  int intervals = 800;  ///< coarsest level
  int levels = 3;       ///< intervals, 2x, 4x
  double k = 1e-4;
};

/// P_t f at `points` for each time, result[t][x]. The value is the Richardson
/// extrapolation of the two finest levels plus a time-step correction from a
/// k/2 solve; the error is the distance between the two spatial
/// extrapolations plus the size of the time correction.
std::vector<std::vector<Certified>> neumann_pde_1d(const SturmLiouville& op, const Fn1& f,
                                                   const std::vector<double>& points,
                                                   const std::vector<double>& times, const PdeOptions& opt = {},
                                                   bool derivative = false);

/// Radial profile of P_t applied to f(r) cos(mode * theta) on the flat
/// annulus r_in <= r <= r_out: u_t = u'' + u'/r - mode^2 u / r^2.
std::vector<std::vector<Certified>> annulus_mode_solver(double r_in, double r_out, int mode, const Fn1& f_radial,
                                                        const std::vector<double>& radii,
                                                        const std::vector<double>& times,
                                                        const PdeOptions& opt = {});

/// Legendre expansion of a zonal function on the unit hemisphere,
/// f(theta) = sum c_l P_l(cos theta); only even l are Neumann at the equator.
struct ZonalExpansion {
  std::vector<double> c;
  double tail = 0.0;  ///< largest |c_l| just beyond the truncation
  double value(double theta0, double t) const;
  /// d/dtheta of P_t f at theta0
  double dtheta(double theta0, double t) const;
};

/// `f_of_cos` is evaluated on [-1, 1] and must be even; odd content above
/// 1e-10 throws OracleError.
ZonalExpansion hemisphere_expansion(const Fn1& f_of_cos, int truncation = 20);
double hemisphere_spectral(const Fn1& f_of_cos, double theta0, double t, int truncation = 20);

/// Normalised mu-integrals on built-in geometries by composite Gauss-Legendre
/// in natural coordinates (x on intervals, polar on disk and annulus,
/// (theta, phi) on the hemisphere), with weight e^V when V is set.
class MuQuadrature {
 public:
  explicit MuQuadrature(const ManifoldSpec& m, int panels = 48, int order = 12);
  /// mu(g) at the given and at twice the panel count; error is their gap
  Certified mean(const ScalarField& g) const;

 private:
  double raw(const ScalarField& g, int panels) const;
  const ManifoldSpec& m_;
  int panels_, order_;
};

/// W_2 between two densities tabulated on the uniform grid `nodes`, via the
/// quantile coupling on a q-grid of `q_points` midpoints.
double w2_1d(const std::vector<double>& nodes, const std::vector<double>& density_a,
             const std::vector<double>& density_b, int q_points = 10000);

/// Heat kernel w.r.t. the normalised mu of a Sturm-Liouville problem (q = 0),
/// from the eigendecomposition of the discrete generator at three levels.
class HeatKernel1d {
 public:
  struct Level {
    PdeGrid grid;
    Eigen::VectorXd lambda;
    Eigen::MatrixXd psi;  ///< mu-orthonormal eigenvectors (columns)
    double asymmetry = 0.0;  ///< residual of the symmetric eigenproblem
  };

  HeatKernel1d(const SturmLiouville& op, int intervals = 200, int levels = 3);

  const std::vector<Level>& levels() const { return levels_; }
  /// p_t(x, .) on the nodes of a level, with x interpolated
  Eigen::VectorXd row(int level, double x, double t) const;
  double p(int level, double x, double y, double t) const;
  /// Richardson-certified functional of the kernel levels.
  Certified functional(const std::function<double(const Level&, int)>& F) const;
  Certified p(double x, double y, double t) const;
  /// int p_t(x,z) log(p_t(x,z)/p_t(y,z)) mu(dz)
  Certified entropy(double x, double y, double t) const;
  /// max over nodes of |int p_t(x, .) d mu - 1| on the finest level
  double conservation_error(double t) const;

 private:
  std::vector<Level> levels_;
};

}  // namespace reflab
