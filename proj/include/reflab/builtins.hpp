#pragma once

#include <string>

#include "reflab/geometry.hpp"
#include "reflab/grid_field.hpp"

namespace reflab::builtins {

/// [0, length] with drift Z = -ou_rate * x and V = -ou_rate * x^2 / 2.
ManifoldSpec interval(double length, double ou_rate = 0.0);

/// The half-line [0, inf) on the reflecting window [0, window].
ManifoldSpec half_line(double ou_rate = 0.0, double window = 6.0);

/// Flat closed disk of the given radius centred at the origin.
ManifoldSpec disk(double radius);

/// Flat annulus r_in <= |x| <= r_out; its inner circle is non-convex.
ManifoldSpec annulus(double r_in, double r_out);

enum class SphereChart { stereographic, polar };

/// Closed upper hemisphere of a round sphere.
///
/// The stereographic chart (projection from the south pole) is regular on
/// the whole hemisphere and is the one used for simulation. The polar chart
/// (theta, phi) is singular at the pole and is kept for textbook checks.
/// Natural coordinates are (theta, phi) in both charts.
ManifoldSpec upper_hemisphere(double radius = 1.0, SphereChart chart = SphereChart::stereographic);

/// Custom chart from a tabulated metric grid (rows g11 g12 g22). The
/// boundary is either the whole grid box (`box`) or a chart disk.
struct GridBoundary {
  enum class Kind { box, disk } kind = Kind::box;
  double cx = 0.0, cy = 0.0, radius = 1.0;
};
ManifoldSpec from_metric_grid(const GridField& metric, GridBoundary boundary);

/// Polar angle measured from the pole of a hemisphere chart point.
double hemisphere_polar_angle(const ManifoldSpec& m, const Vec& x);

}  // namespace reflab::builtins
