#include "reflab/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace reflab {

std::vector<double> spline_second_derivatives(const std::vector<double>& y, double spacing) {
  const std::size_t n = y.size();
  std::vector<double> y2(n, 0.0);
  if (n < 3) return y2;
  // Thomas algorithm on the natural-spline system with constant spacing
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (spacing * spacing);
    const double denom = 4.0 - c[i - 1];
    c[i] = 1.0 / denom;
    d[i] = (rhs - d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    y2[i] = d[i] - c[i] * y2[i + 1];
    if (i == 1) break;
  }
  return y2;
}

double spline_eval(const std::vector<double>& y, const std::vector<double>& y2, double spacing, double origin,
                   double x) {
  const int n = static_cast<int>(y.size());
  if (n == 1) return y[0];
  const double s = (x - origin) / spacing;
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
  const double a = (i + 1) - s;
  const double b = s - i;
  return a * y[i] + b * y[i + 1] +
         ((a * a * a - a) * y2[i] + (b * b * b - b) * y2[i + 1]) * spacing * spacing / 6.0;
}

GridField::GridField(int dim, int nx, int ny, double x0, double x1, double y0, double y1, int components,
                     std::vector<double> values)
    : dim_(dim), nx_(nx), ny_(dim == 1 ? 1 : ny), x0_(x0), x1_(x1), y0_(y0), y1_(y1),
      components_(components), values_(std::move(values)) {
  if (dim_ != 1 && dim_ != 2) throw ConfigError("grid: dim must be 1 or 2");
  if (nx_ < 4 || (dim_ == 2 && ny_ < 4)) throw ConfigError("grid: need at least 4 nodes per axis");
  if (!(x1_ > x0_) || (dim_ == 2 && !(y1_ > y0_))) throw ConfigError("grid: empty extent");
  if (values_.size() != static_cast<std::size_t>(nx_) * ny_ * components_)
    throw ConfigError("grid: expected " + std::to_string(nx_ * ny_) + " rows of " + std::to_string(components_) +
                      " values");
  const double hx = (x1_ - x0_) / (nx_ - 1);
  for (int c = 0; c < components_; ++c)
    for (int j = 0; j < ny_; ++j) {
      std::vector<double> row(nx_);
      for (int i = 0; i < nx_; ++i) row[i] = node(i, j, c);
      rows_y2_.push_back(spline_second_derivatives(row, hx));
      rows_.push_back(std::move(row));
    }
}

GridField GridField::read(std::istream& in, int components) {
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("grid: missing header line");
  std::istringstream hs(header);
  int dim = 0, nx = 0, ny = 0;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  if (!(hs >> dim >> nx >> ny >> x0 >> x1 >> y0 >> y1))
    throw ConfigError("grid: header must read `dim nx ny x0 x1 y0 y1`");
  const int rows = nx * (dim == 1 ? 1 : ny);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * components);
  double v;
  while (in >> v) values.push_back(v);
  return GridField(dim, nx, ny, x0, x1, y0, y1, components, std::move(values));
}

GridField GridField::read_file(const std::string& path, int components) {
  std::ifstream in(path);
  if (!in) throw ConfigError("grid: cannot open " + path);
  return read(in, components);
}

double GridField::value(const Vec& x, int component) const {
  const double hx = (x1_ - x0_) / (nx_ - 1);
  const std::size_t base = static_cast<std::size_t>(component) * ny_;
  if (dim_ == 1) return spline_eval(rows_[base], rows_y2_[base], hx, x0_, x[0]);
  // spline along x on every row, then along y through the row values
  const double hy = (y1_ - y0_) / (ny_ - 1);
  std::vector<double> column(ny_);
  for (int j = 0; j < ny_; ++j) column[j] = spline_eval(rows_[base + j], rows_y2_[base + j], hx, x0_, x[0]);
  return spline_eval(column, spline_second_derivatives(column, hy), hy, y0_, x[1]);
}

}  // namespace reflab
