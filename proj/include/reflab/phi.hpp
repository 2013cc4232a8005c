#pragma once

#include <memory>
#include <string>
#include <vector>

#include "reflab/geometry.hpp"
#include "reflab/grid_field.hpp"

namespace reflab {

/// Strictly positive weight field phi. Derived quantities are computed from
/// log phi, which keeps the finite differences well scaled.
struct PhiField {
  std::string name = "one";
  ScalarField log_phi;
  /// chart differential of log phi, when known in closed form
  VectorField dlog_exact;
  bool constant = false;
  std::vector<double> coeffs;  // radial_exp only
  double r0 = 1.0;

  double operator()(const Vec& x) const { return constant ? 1.0 : std::exp(log_phi(x)); }
  double log(const Vec& x) const { return constant ? 0.0 : log_phi(x); }
};

PhiField phi_one();

/// phi = exp(sum_k coeffs[k-1] (r - r0)^k) with r the chart radius |x|.
/// The annulus weight used throughout is radial_exp({1, -0.5}, 1).
PhiField phi_radial_exp(std::vector<double> coeffs, double r0 = 1.0);

/// phi read from a tabulated grid (one component, must be positive).
PhiField phi_from_grid(const GridField& grid);

/// Chart differential and g-gradient of log phi.
Vec dlog_phi(const ManifoldSpec& m, const PhiField& phi, const Vec& x, double h = kDefaultGeoStep);
Vec grad_log_phi(const ManifoldSpec& m, const PhiField& phi, const Vec& x, double h = kDefaultGeoStep);
double grad_log_phi_sq(const ManifoldSpec& m, const PhiField& phi, const Vec& x, double h = kDefaultGeoStep);

/// phi^p L phi^{-p} = p^2 |grad log phi|^2 - p L log phi.
double phi_p_L_phi_minus_p(const ManifoldSpec& m, const PhiField& phi, int p, const Vec& x,
                           double h = kDefaultGeoStep);

/// Ric - nabla Z - (1/p)(phi^p L phi^{-p}) g as a chart bilinear form.
Mat modified_ricci_form(const ManifoldSpec& m, const PhiField& phi, int p, const Vec& x,
                        double h = kDefaultGeoStep);
double modified_ricci(const ManifoldSpec& m, const PhiField& phi, int p, const Vec& x, const Vec& X,
                      double h = kDefaultGeoStep);

enum class Status { pass, warn, fail };
const char* to_string(Status s);

struct ClassDReport {
  double inf_phi = 0.0;
  Vec inf_point;
  Status inf_status = Status::fail;
  double max_abs_N_phi = 0.0;
  Status normal_status = Status::pass;
  double min_convexity = 0.0;  ///< min over dM of II(T,T) + N log phi
  Vec min_convexity_point;
  Status convexity_status = Status::pass;
  int boundary_samples = 0;
  int interior_samples = 0;

  bool passed() const {
    return inf_status != Status::fail && normal_status != Status::fail && convexity_status != Status::fail;
  }
  std::string serialize() const;
  std::string digest() const;
};

struct ClassDOptions {
  bool strict = false;  ///< promote the N phi = 0 clause from WARN to FAIL
  int boundary_count = 64;
  int grid_per_axis = 48;
  double h = kDefaultGeoStep;
};

ClassDReport class_D_check(const ManifoldSpec& m, const PhiField& phi, const ClassDOptions& opt = {});

struct CurvatureBoundReport {
  int p = 1;
  int per_axis = 0;
  double h = kDefaultGeoStep;
  double raw_min = 0.0;
  double margin = 0.0;
  double K = 0.0;  ///< raw_min - margin
  Vec argmin;
  std::vector<Vec> points;
  std::vector<double> min_eigenvalues;

  std::string serialize() const;
  std::string digest() const;
};

/// Smallest generalized eigenvalue of the modified form against g over an
/// interior grid plus boundary samples, lowered by the margin 10 h^2.
CurvatureBoundReport curvature_lower_bound(const ManifoldSpec& m, const PhiField& phi, int p, int per_axis,
                                           double h = kDefaultGeoStep);

/// phi^{-1}(II(X,X) + (N log phi)|X|^2): boundary convexity after the change
/// of metric g -> phi^{-2} g.
double conformal_second_fundamental_form(const ManifoldSpec& m, const PhiField& phi, const Vec& x, const Vec& X,
                                         double h = kDefaultGeoStep);

/// sup of phi over an interior grid and boundary samples.
double phi_sup(const ManifoldSpec& m, const PhiField& phi, int per_axis = 64);

}  // namespace reflab
