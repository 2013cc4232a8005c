#pragma once

#include <istream>
#include <string>
#include <vector>

#include "reflab/types.hpp"

namespace reflab {

/// Tabulated field on a regular chart grid, interpolated with tensor-product
/// natural cubic splines (C^2, so curvature quantities stay meaningful).
///
/// File layout: a header line `dim nx ny x0 x1 y0 y1`, then nx*ny rows (x
/// index fastest) of `components` whitespace-separated values. For dim = 1,
/// ny is 1 and y0, y1 are ignored.
class GridField {
 public:
  GridField(int dim, int nx, int ny, double x0, double x1, double y0, double y1, int components,
            std::vector<double> values);

  static GridField read(std::istream& in, int components);
  static GridField read_file(const std::string& path, int components);

  int dim() const { return dim_; }
  int components() const { return components_; }
  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double y0() const { return y0_; }
  double y1() const { return y1_; }

  double value(const Vec& x, int component = 0) const;

 private:
  double node(int i, int j, int c) const { return values_[(static_cast<std::size_t>(j) * nx_ + i) * components_ + c]; }

  int dim_, nx_, ny_;
  double x0_, x1_, y0_, y1_;
  int components_;
  std::vector<double> values_;
  std::vector<std::vector<double>> rows_;     // [component * ny + j] -> samples along x
  std::vector<std::vector<double>> rows_y2_;  // spline second derivatives of rows_
};

/// Natural cubic spline second derivatives for uniformly spaced samples.
std::vector<double> spline_second_derivatives(const std::vector<double>& y, double spacing);
double spline_eval(const std::vector<double>& y, const std::vector<double>& y2, double spacing, double origin,
                   double x);

}  // namespace reflab
