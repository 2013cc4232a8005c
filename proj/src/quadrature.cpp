#include "reflab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace reflab {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  cache[n] = r;
  return r;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  const QuadratureRule r = gauss_legendre(order);
  const double w = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w, mid = lo + 0.5 * w;
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += r.weights[i] * f(mid + 0.5 * w * r.nodes[i]);
    total += 0.5 * w * s;
  }
  return total;
}

std::vector<double> legendre_values(int n, double x) {
  std::vector<double> p(n + 1);
  p[0] = 1.0;
  if (n >= 1) p[1] = x;
  for (int k = 2; k <= n; ++k) p[k] = ((2 * k - 1) * x * p[k - 1] - (k - 1) * p[k - 2]) / k;
  return p;
}

std::vector<double> legendre_derivatives(int n, double x) {
  const auto p = legendre_values(n, x);
  std::vector<double> d(n + 1, 0.0);
  // P'_{k+1} = P'_{k-1} + (2k+1) P_k
  if (n >= 1) d[1] = 1.0;
  for (int k = 1; k < n; ++k) d[k + 1] = d[k - 1] + (2 * k + 1) * p[k];
  return d;
}

}  // namespace reflab
