#pragma once

#include <string>

#include "reflab/geometry.hpp"
#include "reflab/oracle.hpp"

namespace reflab {

/// A named test function. Angles follow the manifold family: the chart
/// coordinate on intervals, the polar angle atan2(y, x) on planar domains,
/// and the polar angle from the pole on the hemisphere.
struct TestFunction {
  std::string name;
  ScalarField f;
  Fn1 zonal;  ///< hemisphere only: f as an even function of cos(theta)
  double inf_bound = -1e300;  ///< a known lower bound of f on M
};

/// Names: coordinate[:i], sin2, cos_mode[:k], affine_positive[:c],
/// quadratic, exp_mix, constant[:c].
///
/// cos_mode is cos(k pi x / L) on an interval, cos(k angle) on planar
/// domains and the Legendre mode P_k(cos theta) on the hemisphere.
TestFunction make_test_function(const ManifoldSpec& m, const std::string& spec);

double planar_angle(const Vec& x);

}  // namespace reflab
