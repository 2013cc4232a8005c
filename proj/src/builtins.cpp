#include "reflab/builtins.hpp"

#include <cmath>
#include <memory>
#include <numbers>

namespace reflab::builtins {

namespace {

constexpr double kPi = std::numbers::pi;

ChartBox make_box(const Vec& lo, const Vec& hi) {
  ChartBox box;
  box.lo = lo;
  box.hi = hi;
  return box;
}

void set_flat(ManifoldSpec& m) {
  const int d = m.dim;
  m.flat = true;
  m.metric = [d](const Vec&) -> Mat { return Mat::Identity(d, d); };
  m.metric_inverse_exact = [d](const Vec&) -> Mat { return Mat::Identity(d, d); };
  m.christoffel_exact = [d](const Vec&) { return Christoffel::zero(d); };
  m.from_natural = [](const Vec& v) { return v; };
  m.to_natural = [](const Vec& v) { return v; };
}

std::vector<Vec> circle_points(double radius, int count) {
  std::vector<Vec> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double a = 2.0 * kPi * k / count;
    pts.push_back(vec2(radius * std::cos(a), radius * std::sin(a)));
  }
  return pts;
}

/// Length of the shortest path between p and q in the plane avoiding the
/// open disk of radius a about the origin (both points outside it).
double distance_around_disk(const Vec& p, const Vec& q, double a) {
  const Vec d = q - p;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return 0.0;
  const double s = std::clamp(-p.dot(d) / len2, 0.0, 1.0);
  if ((p + s * d).norm() >= a) return std::sqrt(len2);
  const double rp = std::max(p.norm(), a), rq = std::max(q.norm(), a);
  const double angle = std::acos(std::clamp(p.dot(q) / (p.norm() * q.norm()), -1.0, 1.0));
  const double arc = std::max(0.0, angle - std::acos(a / rp) - std::acos(a / rq));
  return std::sqrt(rp * rp - a * a) + std::sqrt(rq * rq - a * a) + a * arc;
}

Eigen::Vector3d sphere_embedding(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double great_circle(const Eigen::Vector3d& p, const Eigen::Vector3d& q, double radius) {
  return radius * std::atan2(p.cross(q).norm(), p.dot(q));
}

}  // namespace

ManifoldSpec interval(double length, double ou_rate) {
  if (!(length > 0.0)) throw GeometryError("interval: length must be positive");
  ManifoldSpec m;
  m.name = "interval";
  m.family = "interval";
  m.dim = 1;
  m.chart = make_box(vec1(-0.5), vec1(length + 0.5));
  set_flat(m);
  m.boundary = [length](const Vec& x) { return x[0] * (length - x[0]) / length; };
  if (ou_rate != 0.0) m.drift = [ou_rate](const Vec& x) { return vec1(-ou_rate * x[0]); };
  m.potential = [ou_rate](const Vec& x) { return -0.5 * ou_rate * x[0] * x[0]; };
  m.distance = [](const Vec& x, const Vec& y) { return std::abs(x[0] - y[0]); };
  m.distance_tag = "exact";
  m.base_point = vec1(0.0);
  m.normal_exact = [length](const Vec& x) { return vec1(x[0] < 0.5 * length ? 1.0 : -1.0); };
  m.second_fundamental_exact = [](const Vec&) { return 0.0; };
  m.project_exact = [length](const Vec& x) -> Projection {
    if (x[0] < 0.0) return {vec1(0.0), -x[0]};
    if (x[0] > length) return {vec1(length), x[0] - length};
    return {x, 0.0};
  };
  m.boundary_points = [length](int) { return std::vector<Vec>{vec1(0.0), vec1(length)}; };
  m.builtin = BuiltinKind::interval;
  m.builtin_params = {length, ou_rate, 0.0};
  return m;
}

ManifoldSpec half_line(double ou_rate, double window) {
  ManifoldSpec m = interval(window, ou_rate);
  m.name = "half_line";
  return m;
}

ManifoldSpec disk(double radius) {
  if (!(radius > 0.0)) throw GeometryError("disk: radius must be positive");
  ManifoldSpec m;
  m.name = "disk";
  m.family = "planar";
  m.dim = 2;
  const double reach = 1.25 * radius;
  m.chart = make_box(vec2(-reach, -reach), vec2(reach, reach));
  set_flat(m);
  m.boundary = [radius](const Vec& x) { return (radius * radius - x.squaredNorm()) / (2.0 * radius); };
  m.distance = [](const Vec& x, const Vec& y) { return (x - y).norm(); };
  m.distance_tag = "exact";
  m.base_point = vec2(0.0, 0.0);
  m.normal_exact = [](const Vec& x) { return Vec(-x / x.norm()); };
  m.second_fundamental_exact = [radius](const Vec&) { return 1.0 / radius; };
  m.project_exact = [radius](const Vec& x) -> Projection {
    const double r = x.norm();
    if (r <= radius) return {x, 0.0};
    return {x * (radius / r), r - radius};
  };
  m.boundary_points = [radius](int n) { return circle_points(radius, n); };
  m.builtin = BuiltinKind::disk;
  m.builtin_params = {radius, 0.0, 0.0};
  return m;
}

ManifoldSpec annulus(double r_in, double r_out) {
  if (!(r_in > 0.0 && r_out > r_in)) throw GeometryError("annulus: need 0 < r_in < r_out");
  ManifoldSpec m;
  m.name = "annulus";
  m.family = "planar";
  m.dim = 2;
  const double reach = 1.25 * r_out;
  m.chart = make_box(vec2(-reach, -reach), vec2(reach, reach));
  set_flat(m);
  const double mid = 0.5 * (r_in + r_out);
  m.boundary = [r_in, r_out](const Vec& x) {
    const double r = x.norm();
    return (r - r_in) * (r_out - r) / (r_out - r_in);
  };
  m.distance = [r_in](const Vec& x, const Vec& y) { return distance_around_disk(x, y, r_in); };
  m.distance_tag = "exact";
  m.base_point = vec2(mid, 0.0);
  m.normal_exact = [mid](const Vec& x) {
    const double r = x.norm();
    return Vec((r < mid ? 1.0 : -1.0) * x / r);
  };
  m.second_fundamental_exact = [r_in, r_out, mid](const Vec& x) {
    return x.norm() < mid ? -1.0 / r_in : 1.0 / r_out;
  };
  m.project_exact = [r_in, r_out](const Vec& x) -> Projection {
    const double r = x.norm();
    if (r < r_in) {
      if (r == 0.0) return {vec2(r_in, 0.0), r_in};
      return {x * (r_in / r), r_in - r};
    }
    if (r > r_out) return {x * (r_out / r), r - r_out};
    return {x, 0.0};
  };
  m.boundary_points = [r_in, r_out](int n) {
    auto pts = circle_points(r_in, n);
    auto outer = circle_points(r_out, n);
    pts.insert(pts.end(), outer.begin(), outer.end());
    return pts;
  };
  m.builtin = BuiltinKind::annulus;
  m.builtin_params = {r_in, r_out, 0.0};
  return m;
}

ManifoldSpec upper_hemisphere(double radius, SphereChart chart) {
  if (!(radius > 0.0)) throw GeometryError("hemisphere: radius must be positive");
  ManifoldSpec m;
  m.family = "sphere";
  m.dim = 2;
  const double R = radius;

  if (chart == SphereChart::polar) {
    m.name = "hemisphere_polar";
    m.chart = make_box(vec2(0.0, 0.0), vec2(kPi, 2.0 * kPi));
    m.chart.periodic = {false, true};
    m.metric = [R](const Vec& x) -> Mat {
      Mat g = Mat::Zero(2, 2);
      const double s = std::sin(x[0]);
      g(0, 0) = R * R;
      g(1, 1) = R * R * s * s;
      return g;
    };
    m.christoffel_exact = [](const Vec& x) {
      Christoffel c = Christoffel::zero(2);
      const double s = std::sin(x[0]), co = std::cos(x[0]);
      c.upper[0](1, 1) = -s * co;
      c.upper[1](0, 1) = c.upper[1](1, 0) = co / s;
      return c;
    };
    m.boundary = [R](const Vec& x) { return R * (0.5 * kPi - x[0]); };
    m.normal_exact = [R](const Vec&) { return vec2(-1.0 / R, 0.0); };
    m.project_exact = [R](const Vec& x) -> Projection {
      if (x[0] <= 0.5 * kPi) return {x, 0.0};
      return {vec2(0.5 * kPi, x[1]), R * (x[0] - 0.5 * kPi)};
    };
    m.boundary_points = [](int n) {
      std::vector<Vec> pts;
      for (int k = 0; k < n; ++k) pts.push_back(vec2(0.5 * kPi, 2.0 * kPi * k / n));
      return pts;
    };
    m.distance = [R](const Vec& x, const Vec& y) {
      return great_circle(sphere_embedding(x[0], x[1]), sphere_embedding(y[0], y[1]), R);
    };
    m.from_natural = [](const Vec& v) { return v.size() == 1 ? vec2(v[0], 0.0) : v; };
    m.to_natural = [](const Vec& v) { return v; };
    m.base_point = vec2(0.0, 0.0);
  } else {
    m.name = "hemisphere";
    m.chart = make_box(vec2(-1.5, -1.5), vec2(1.5, 1.5));
    auto scale = [R](const Vec& u) { return 2.0 * R / (1.0 + u.squaredNorm()); };
    m.metric = [scale](const Vec& u) -> Mat {
      const double l = scale(u);
      return Mat::Identity(2, 2) * (l * l);
    };
    m.metric_inverse_exact = [scale](const Vec& u) -> Mat {
      const double l = scale(u);
      return Mat::Identity(2, 2) / (l * l);
    };
    m.christoffel_exact = [](const Vec& u) {
      // conformal metric e^{2 sigma} delta with d sigma = -2u / (1 + |u|^2)
      const Vec ds = -2.0 * u / (1.0 + u.squaredNorm());
      Christoffel c = Christoffel::zero(2);
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            c.upper[k](i, j) = (i == k ? ds[j] : 0.0) + (j == k ? ds[i] : 0.0) - (i == j ? ds[k] : 0.0);
      return c;
    };
    m.boundary = [](const Vec& u) { return 0.5 * (1.0 - u.squaredNorm()); };
    m.normal_exact = [scale](const Vec& u) { return Vec(-u / (u.norm() * scale(u))); };
    m.project_exact = [R](const Vec& u) -> Projection {
      const double r = u.norm();
      if (r <= 1.0) return {u, 0.0};
      return {u / r, 2.0 * R * (std::atan(r) - 0.25 * kPi)};
    };
    m.boundary_points = [](int n) { return circle_points(1.0, n); };
    auto embed = [](const Vec& u) -> Eigen::Vector3d {
      const double q = u.squaredNorm();
      return Eigen::Vector3d(2.0 * u[0], 2.0 * u[1], 1.0 - q) / (1.0 + q);
    };
    m.distance = [R, embed](const Vec& x, const Vec& y) { return great_circle(embed(x), embed(y), R); };
    m.from_natural = [](const Vec& v) {
      const double theta = v[0], phi = v.size() > 1 ? v[1] : 0.0;
      const double r = std::tan(0.5 * theta);
      return vec2(r * std::cos(phi), r * std::sin(phi));
    };
    m.to_natural = [](const Vec& u) { return vec2(2.0 * std::atan(u.norm()), std::atan2(u[1], u[0])); };
    m.base_point = vec2(0.0, 0.0);
    m.builtin = BuiltinKind::hemisphere;
    m.builtin_params = {R, 0.0, 0.0};
  }
  m.second_fundamental_exact = [](const Vec&) { return 0.0; };
  m.distance_tag = "exact";
  return m;
}

double hemisphere_polar_angle(const ManifoldSpec& m, const Vec& x) {
  if (m.name == "hemisphere_polar") return x[0];
  return 2.0 * std::atan(x.norm());
}

ManifoldSpec from_metric_grid(const GridField& metric, GridBoundary bnd) {
  auto grid = std::make_shared<const GridField>(metric);
  ManifoldSpec m;
  m.name = "grid";
  m.dim = grid->dim();
  m.family = m.dim == 1 ? "interval" : "planar";
  if (m.dim == 1) {
    m.chart = make_box(vec1(grid->x0()), vec1(grid->x1()));
    m.metric = [grid](const Vec& x) -> Mat { return Mat::Constant(1, 1, grid->value(x, 0)); };
  } else {
    m.chart = make_box(vec2(grid->x0(), grid->y0()), vec2(grid->x1(), grid->y1()));
    m.metric = [grid](const Vec& x) -> Mat {
      Mat g(2, 2);
      g(0, 0) = grid->value(x, 0);
      g(0, 1) = g(1, 0) = grid->value(x, 1);
      g(1, 1) = grid->value(x, 2);
      return g;
    };
  }
  const Vec lo = m.chart.lo, hi = m.chart.hi;
  if (bnd.kind == GridBoundary::Kind::disk && m.dim == 2) {
    m.boundary = [bnd](const Vec& x) {
      const double dx = x[0] - bnd.cx, dy = x[1] - bnd.cy;
      return (bnd.radius * bnd.radius - dx * dx - dy * dy) / (2.0 * bnd.radius);
    };
    m.base_point = vec2(bnd.cx, bnd.cy);
  } else {
    // shrink the box slightly so boundary stencils stay inside the chart
    const Vec pad = (hi - lo) * 0.02;
    m.boundary = [lo, hi, pad](const Vec& x) {
      double b = std::numeric_limits<double>::infinity();
      for (int i = 0; i < x.size(); ++i) b = std::min({b, x[i] - lo[i] - pad[i], hi[i] - pad[i] - x[i]});
      return b;
    };
    m.base_point = 0.5 * (lo + hi);
  }
  m.from_natural = [](const Vec& v) { return v; };
  m.to_natural = [](const Vec& v) { return v; };
  return m;
}

}  // namespace reflab::builtins
