#include "reflab/test_functions.hpp"

#include <cmath>
#include <numbers>

#include "reflab/builtins.hpp"
#include "reflab/quadrature.hpp"
#include "reflab/types.hpp"

namespace reflab {

double planar_angle(const Vec& x) { return std::atan2(x[1], x[0]); }

TestFunction make_test_function(const ManifoldSpec& m, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const bool has_arg = colon != std::string::npos;
  double arg = 0.0;
  if (has_arg) {
    try {
      std::size_t used = 0;
      arg = std::stod(spec.substr(colon + 1), &used);
      if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("bad test function argument in '" + spec + "'");
    }
  }
  const std::string family = m.family;
  const bool sphere = family == "sphere", interval = family == "interval";
  // theta on the hemisphere, the polar angle on planar charts, x on intervals
  const ManifoldSpec* mp = &m;
  auto angle = [mp, sphere, interval](const Vec& x) {
    if (interval) return x[0];
    if (sphere) return builtins::hemisphere_polar_angle(*mp, x);
    return planar_angle(x);
  };
  const double length = interval ? m.builtin_params[0] : 1.0;

  TestFunction t;
  t.name = spec;
  if (name == "coordinate") {
    const int i = has_arg ? static_cast<int>(arg) : 0;
    if (i < 0 || i >= m.dim) throw ConfigError("coordinate index out of range in '" + spec + "'");
    t.f = [i](const Vec& x) { return x[i]; };
  } else if (name == "sin2") {
    t.f = [angle](const Vec& x) { return std::pow(std::sin(angle(x)), 2); };
    if (sphere) t.zonal = [](double c) { return 1.0 - c * c; };
    t.inf_bound = 0.0;
  } else if (name == "cos_mode") {
    const int k = has_arg ? static_cast<int>(arg) : 1;
    if (sphere) {
      if (k % 2) throw ConfigError("cos_mode on the hemisphere needs an even k (Neumann at the equator)");
      t.f = [angle, k](const Vec& x) { return legendre_values(k, std::cos(angle(x)))[k]; };
      t.zonal = [k](double c) { return legendre_values(k, c)[k]; };
    } else if (interval) {
      t.f = [k, length](const Vec& x) { return std::cos(k * std::numbers::pi * x[0] / length); };
    } else {
      t.f = [angle, k](const Vec& x) { return std::cos(k * angle(x)); };
    }
    t.inf_bound = -1.0;
  } else if (name == "affine_positive") {
    const double c = has_arg ? arg : 1.5;
    if (interval) {
      t.f = [c](const Vec& x) { return c + x[0]; };
      t.inf_bound = c;
    } else {
      t.f = [c, angle](const Vec& x) { return c + std::cos(angle(x)); };
      t.inf_bound = c - 1.0;
    }
  } else if (name == "quadratic") {
    if (sphere) {
      t.f = [angle](const Vec& x) { return 1.0 + std::pow(std::cos(angle(x)), 2); };
      t.zonal = [](double c) { return 1.0 + c * c; };
    } else {
      t.f = [](const Vec& x) { return 1.0 + x.squaredNorm(); };
    }
    t.inf_bound = 1.0;
  } else if (name == "exp_mix") {
    if (sphere) {
      t.f = [angle](const Vec& x) { return std::exp(0.5 * std::pow(std::cos(angle(x)), 2)); };
      t.zonal = [](double c) { return std::exp(0.5 * c * c); };
      t.inf_bound = 1.0;
    } else if (interval) {
      t.f = [](const Vec& x) { return 1.0 + std::exp(-x[0]) + 0.5 * std::sin(x[0]); };
      t.inf_bound = 0.5;
    } else {
      t.f = [](const Vec& x) { return std::exp(0.3 * x[0]) * (1.5 + std::cos(x[1])); };
      t.inf_bound = 0.0;
    }
  } else if (name == "constant") {
    const double c = has_arg ? arg : 1.0;
    t.f = [c](const Vec&) { return c; };
    if (sphere) t.zonal = [c](double) { return c; };
    t.inf_bound = c;
  } else {
    throw ConfigError("unknown test function '" + spec + "'");
  }
  return t;
}

}  // namespace reflab
