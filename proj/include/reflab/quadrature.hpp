#pragma once

#include <functional>
#include <vector>

namespace reflab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Composite Gauss-Legendre over `panels` equal panels of [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64, int order = 8);

/// Legendre polynomials P_0..P_n at x.
std::vector<double> legendre_values(int n, double x);
/// Derivatives P_0'..P_n' at x.
std::vector<double> legendre_derivatives(int n, double x);

}  // namespace reflab
