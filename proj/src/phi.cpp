#include "reflab/phi.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "reflab/digest.hpp"

namespace reflab {

namespace {

void require_p(int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("modified curvature: p must be 1 or 2");
}

std::string point_text(const Vec& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) s += (i ? "," : "") + repr(x[i]);
  return s;
}

}  // namespace

PhiField phi_one() {
  PhiField f;
  f.name = "one";
  f.constant = true;
  f.log_phi = [](const Vec&) { return 0.0; };
  f.dlog_exact = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  return f;
}

PhiField phi_radial_exp(std::vector<double> coeffs, double r0) {
  PhiField f;
  f.name = "radial_exp";
  f.coeffs = coeffs;
  f.r0 = r0;
  f.constant = true;
  for (double c : coeffs) f.constant = f.constant && c == 0.0;
  f.log_phi = [coeffs, r0](const Vec& x) {
    const double s = x.norm() - r0;
    double v = 0.0, pw = 1.0;
    for (double c : coeffs) v += c * (pw *= s);
    return v;
  };
  f.dlog_exact = [coeffs, r0](const Vec& x) {
    const double r = x.norm();
    if (r == 0.0) throw GeometryError("radial_exp: log phi not differentiable at the origin");
    const double s = r - r0;
    double dv = 0.0, pw = 1.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      dv += (k + 1) * coeffs[k] * pw;
      pw *= s;
    }
    return Vec(dv * x / r);
  };
  return f;
}

PhiField phi_from_grid(const GridField& grid) {
  auto g = std::make_shared<const GridField>(grid);
  PhiField f;
  f.name = "grid";
  f.log_phi = [g](const Vec& x) {
    const double v = g->value(x, 0);
    if (!(v > 0.0)) throw GeometryError("phi grid: non-positive value");
    return std::log(v);
  };
  return f;
}

Vec dlog_phi(const ManifoldSpec& m, const PhiField& phi, const Vec& x, double h) {
  if (phi.constant) return m.zero_vector();
  if (phi.dlog_exact) return phi.dlog_exact(x);
  return differential(m.chart, phi.log_phi, x, h);
}

Vec grad_log_phi(const ManifoldSpec& m, const PhiField& phi, const Vec& x, double h) {
  if (phi.constant) return m.zero_vector();
  return metric_inverse_at(m, x) * dlog_phi(m, phi, x, h);
}

double grad_log_phi_sq(const ManifoldSpec& m, const PhiField& phi, const Vec& x, double h) {
  if (phi.constant) return 0.0;
  const Vec d = dlog_phi(m, phi, x, h);
  return d.dot(metric_inverse_at(m, x) * d);
}

double phi_p_L_phi_minus_p(const ManifoldSpec& m, const PhiField& phi, int p, const Vec& x, double h) {
  require_p(p);
  if (phi.constant) return 0.0;
  return p * p * grad_log_phi_sq(m, phi, x, h) - p * generator_L(m, phi.log_phi, x, h);
}

Mat modified_ricci_form(const ManifoldSpec& m, const PhiField& phi, int p, const Vec& x, double h) {
  require_p(p);
  Mat form = bakry_emery_form(m, x, h);
  if (!phi.constant) form -= (phi_p_L_phi_minus_p(m, phi, p, x, h) / p) * metric_at(m, x);
  return form;
}

double modified_ricci(const ManifoldSpec& m, const PhiField& phi, int p, const Vec& x, const Vec& X, double h) {
  return X.dot(modified_ricci_form(m, phi, p, x, h) * X);
}

const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::warn: return "WARN";
    case Status::fail: return "FAIL";
  }
  return "?";
}

std::string ClassDReport::serialize() const {
  std::ostringstream os;
  os << "class_d inf_phi=" << repr(inf_phi) << " inf_status=" << to_string(inf_status)
     << " max_abs_N_phi=" << repr(max_abs_N_phi) << " normal_status=" << to_string(normal_status)
     << " min_convexity=" << repr(min_convexity) << " convexity_status=" << to_string(convexity_status)
     << " boundary_samples=" << boundary_samples << " interior_samples=" << interior_samples;
  return os.str();
}

std::string ClassDReport::digest() const { return hex64(fnv1a64(serialize())); }

ClassDReport class_D_check(const ManifoldSpec& m, const PhiField& phi, const ClassDOptions& opt) {
  ClassDReport r;
  const auto boundary = sample_boundary(m, opt.boundary_count);
  const auto interior = interior_grid(m, opt.grid_per_axis);
  r.boundary_samples = static_cast<int>(boundary.size());
  r.interior_samples = static_cast<int>(interior.size());

  r.inf_phi = std::numeric_limits<double>::infinity();
  for (const auto* set : {&interior, &boundary})
    for (const Vec& x : *set) {
      const double v = phi(x);
      if (v < r.inf_phi) {
        r.inf_phi = v;
        r.inf_point = x;
      }
    }
  // sampled inf can only sit above the true inf, so the upper side is looser
  r.inf_status = (r.inf_phi >= 1.0 - 1e-9 && r.inf_phi <= 1.0 + 1e-3) ? Status::pass : Status::fail;

  r.min_convexity = std::numeric_limits<double>::infinity();
  for (const Vec& x : boundary) {
    const Vec N = inward_normal(m, x, opt.h);
    const double n_log = dlog_phi(m, phi, x, opt.h).dot(N);
    r.max_abs_N_phi = std::max(r.max_abs_N_phi, std::abs(phi(x) * n_log));
    if (m.dim == 1) continue;
    const Vec T = unit_tangent(m, x, N);
    const double c = second_fundamental_form(m, x, T, T, opt.h) + n_log;
    if (c < r.min_convexity) {
      r.min_convexity = c;
      r.min_convexity_point = x;
    }
  }
  if (m.dim == 1 || boundary.empty()) r.min_convexity = 0.0;
  r.convexity_status = r.min_convexity >= -1e-8 ? Status::pass : Status::fail;
  if (r.max_abs_N_phi > 1e-6) r.normal_status = opt.strict ? Status::fail : Status::warn;
  return r;
}

std::string CurvatureBoundReport::serialize() const {
  std::ostringstream os;
  os << "curvature_bound p=" << p << " per_axis=" << per_axis << " h=" << repr(h) << " raw_min=" << repr(raw_min)
     << " margin=" << repr(margin) << " K=" << repr(K) << " argmin=" << point_text(argmin)
     << " points=" << points.size();
  return os.str();
}

std::string CurvatureBoundReport::digest() const { return hex64(fnv1a64(serialize())); }

CurvatureBoundReport curvature_lower_bound(const ManifoldSpec& m, const PhiField& phi, int p, int per_axis,
                                           double h) {
  require_p(p);
  if (per_axis < 8) throw std::invalid_argument("curvature_lower_bound: need at least 8 grid points per axis");
  CurvatureBoundReport r;
  r.p = p;
  r.per_axis = per_axis;
  r.h = h;
  r.points = interior_grid(m, per_axis);
  const auto boundary = sample_boundary(m, 4 * per_axis);
  r.points.insert(r.points.end(), boundary.begin(), boundary.end());

  r.raw_min = std::numeric_limits<double>::infinity();
  for (const Vec& x : r.points) {
    const Mat A = modified_ricci_form(m, phi, p, x, h);
    double lam;
    if (m.dim == 1) {
      lam = A(0, 0) / metric_at(m, x)(0, 0);
    } else {
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(A, metric_at(m, x), Eigen::EigenvaluesOnly);
      lam = es.eigenvalues().minCoeff();
    }
    r.min_eigenvalues.push_back(lam);
    if (lam < r.raw_min) {
      r.raw_min = lam;
      r.argmin = x;
    }
  }
  r.margin = 10.0 * h * h;
  r.K = r.raw_min - r.margin;
  return r;
}

double conformal_second_fundamental_form(const ManifoldSpec& m, const PhiField& phi, const Vec& x, const Vec& X,
                                         double h) {
  const Vec N = inward_normal(m, x, h);
  const double n_log = dlog_phi(m, phi, x, h).dot(N);
  const double xx = inner(m, x, X, X);
  return (second_fundamental_form(m, x, X, X, h) + n_log * xx) / phi(x);
}

double phi_sup(const ManifoldSpec& m, const PhiField& phi, int per_axis) {
  if (phi.constant) return 1.0;
  double s = 0.0;
  for (const Vec& x : interior_grid(m, per_axis)) s = std::max(s, phi(x));
  for (const Vec& x : sample_boundary(m, 4 * per_axis)) s = std::max(s, phi(x));
  return s;
}

}  // namespace reflab
