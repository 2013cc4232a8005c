#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reflab/finite_difference.hpp"
#include "reflab/types.hpp"

namespace reflab {

/// Default finite-difference step in chart units.
inline constexpr double kDefaultGeoStep = 1e-3;

/// Levi-Civita connection coefficients: upper[k](i, j) = Gamma^k_{ij}.
struct Christoffel {
  int dim = 0;
  std::array<Mat, kMaxDim> upper;

  static Christoffel zero(int d) {
    Christoffel c;
    c.dim = d;
    for (int k = 0; k < d; ++k) c.upper[k] = Mat::Zero(d, d);
    return c;
  }

  /// Vector g^{jk} Gamma^i_{jk}; its negative is the Ito correction of the
  /// Laplace-Beltrami operator in chart coordinates.
  Vec contracted(const Mat& metric_inverse) const {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = (metric_inverse.cwiseProduct(upper[i])).sum();
    return v;
  }

  /// Components Gamma^k_{ij} X^i Y^j.
  Vec apply(const Vec& X, const Vec& Y) const {
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v[k] = X.dot(upper[k] * Y);
    return v;
  }

  Christoffel operator+(const Christoffel& o) const {
    Christoffel r = *this;
    for (int k = 0; k < dim; ++k) r.upper[k] += o.upper[k];
    return r;
  }
  Christoffel operator-(const Christoffel& o) const {
    Christoffel r = *this;
    for (int k = 0; k < dim; ++k) r.upper[k] -= o.upper[k];
    return r;
  }
  Christoffel operator*(double s) const {
    Christoffel r = *this;
    for (int k = 0; k < dim; ++k) r.upper[k] *= s;
    return r;
  }
  Christoffel operator/(double s) const { return *this * (1.0 / s); }
};

/// Result of projecting a point that left M back onto the boundary.
struct Projection {
  Vec point;
  double length = 0.0;  ///< Riemannian length of the correction
};

/// Built-in geometries the sampler can step with inlined closed forms.
enum class BuiltinKind { none, interval, disk, annulus, hemisphere };

/// A chart of a 1- or 2-dimensional Riemannian manifold with boundary
/// M = {b >= 0}, together with the drift Z and the optional potential V.
///
/// The `*_exact` members are optional closed forms supplied by the built-in
/// catalog. Connection, curvature, normal and II below are always computed
/// by finite differences; the closed forms serve cross-checks and the
/// sampler's hot path.
struct ManifoldSpec {
  std::string name;
  /// "interval", "planar" or "sphere"; selects how named test functions read angles
  std::string family = "planar";
  int dim = 1;
  ChartBox chart;
  MetricField metric;
  ScalarField boundary;
  VectorField drift;      ///< empty means Z = 0
  ScalarField potential;  ///< empty means no reference measure e^V dx
  std::function<double(const Vec&, const Vec&)> distance;
  std::string distance_tag = "chart-segment";
  Vec base_point;
  bool flat = false;  ///< metric is the identity in this chart

  std::function<Christoffel(const Vec&)> christoffel_exact;
  std::function<Mat(const Vec&)> metric_inverse_exact;
  VectorField normal_exact;
  /// II(T, T) for the g-unit tangent T at a boundary point
  ScalarField second_fundamental_exact;
  std::function<Projection(const Vec&)> project_exact;
  std::function<std::vector<Vec>(int)> boundary_points;
  /// Maps user-facing coordinates (e.g. polar angles) to the chart.
  std::function<Vec(const Vec&)> from_natural;
  std::function<Vec(const Vec&)> to_natural;

  /// Set by the catalog; reset to `none` after replacing any field above.
  BuiltinKind builtin = BuiltinKind::none;
  std::array<double, 3> builtin_params{};

  double boundary_tolerance() const { return 1e-9 * chart.diameter(); }
  bool inside(const Vec& x) const { return boundary(x) >= 0.0; }
  Vec zero_vector() const { return Vec::Zero(dim); }
  Vec drift_at(const Vec& x) const { return drift ? drift(x) : zero_vector(); }
};

/// Non-fatal notes collected by some operations.
struct Diagnostics {
  std::vector<std::string> warnings;
};

// Metric helpers; every inner product goes through g explicitly.
Mat metric_at(const ManifoldSpec& m, const Vec& x);
Mat metric_inverse_at(const ManifoldSpec& m, const Vec& x);
double inner(const ManifoldSpec& m, const Vec& x, const Vec& X, const Vec& Y);
double norm(const ManifoldSpec& m, const Vec& x, const Vec& X);
bool metric_is_spd(const Mat& g);

Christoffel christoffel(const ManifoldSpec& m, const Vec& x, double h = kDefaultGeoStep);

Vec gradient(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h = kDefaultGeoStep);
Mat hessian(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h = kDefaultGeoStep);
double generator_L(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h = kDefaultGeoStep);
double gradient_norm_sq(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h = kDefaultGeoStep);

Mat ricci_tensor(const ManifoldSpec& m, const Vec& x, double h = kDefaultGeoStep);
double ricci(const ManifoldSpec& m, const Vec& x, const Vec& X, double h = kDefaultGeoStep);

/// Symmetric bilinear form of X -> <nabla_X Z, X>.
Mat drift_derivative_form(const ManifoldSpec& m, const Vec& x, double h = kDefaultGeoStep);

/// Ric - nabla Z as a symmetric bilinear form in chart components.
Mat bakry_emery_form(const ManifoldSpec& m, const Vec& x, double h = kDefaultGeoStep);

/// grad b / |grad b|_g, defined wherever grad b does not vanish.
Vec normal_field(const ManifoldSpec& m, const Vec& x, double h = kDefaultGeoStep);
Vec inward_normal(const ManifoldSpec& m, const Vec& x, double h = kDefaultGeoStep);

/// g-unit vector orthogonal to N (d = 2); empty vector for d = 1.
Vec unit_tangent(const ManifoldSpec& m, const Vec& x, const Vec& N);

double second_fundamental_form(const ManifoldSpec& m, const Vec& x, const Vec& X, const Vec& Y,
                               double h = kDefaultGeoStep, Diagnostics* diag = nullptr);

struct Gamma2 {
  double lhs = 0.0;  ///< 1/2 L|grad f|^2 - <grad Lf, grad f>
  double rhs = 0.0;  ///< (Ric - nabla Z)(grad f, grad f) + |Hess f|_HS^2
};

Gamma2 gamma2_check(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h = kDefaultGeoStep);

double distance(const ManifoldSpec& m, const Vec& x, const Vec& y);

/// Generic projection of an exterior point onto {b = 0} along grad b, with
/// the g-length of the correction. Uses the closed form when available.
Projection project_to_boundary(const ManifoldSpec& m, const Vec& x);

/// Boundary sample points; falls back to a bisection scan of the chart.
std::vector<Vec> sample_boundary(const ManifoldSpec& m, int count);

/// Points of a regular `per_axis` grid over the chart that lie in M.
std::vector<Vec> interior_grid(const ManifoldSpec& m, int per_axis, double margin = 0.0);

}  // namespace reflab
