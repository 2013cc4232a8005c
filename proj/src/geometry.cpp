#include "reflab/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace reflab {

namespace {

void require_in_chart(const ManifoldSpec& m, const Vec& x) {
  if (x.size() != m.dim) throw GeometryError("point has wrong dimension for " + m.name);
  if (!m.chart.contains(x)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") outside chart of " << m.name;
    throw GeometryError(os.str());
  }
}

double segment_length(const ManifoldSpec& m, const Vec& a, const Vec& b) {
  // composite Simpson over the chart segment
  constexpr int kPieces = 16;
  const Vec delta = b - a;
  double total = 0.0;
  for (int k = 0; k <= kPieces; ++k) {
    const double w = (k == 0 || k == kPieces) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const Vec p = a + delta * (static_cast<double>(k) / kPieces);
    total += w * std::sqrt(std::max(0.0, delta.dot(metric_at(m, p) * delta)));
  }
  return total / (3.0 * kPieces);
}

}  // namespace

bool metric_is_spd(const Mat& g) {
  if (!g.isApprox(g.transpose(), 1e-12)) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

Mat metric_at(const ManifoldSpec& m, const Vec& x) { return m.metric(x); }

Mat metric_inverse_at(const ManifoldSpec& m, const Vec& x) {
  if (m.metric_inverse_exact) return m.metric_inverse_exact(x);
  return metric_at(m, x).inverse();
}

double inner(const ManifoldSpec& m, const Vec& x, const Vec& X, const Vec& Y) {
  return X.dot(metric_at(m, x) * Y);
}

double norm(const ManifoldSpec& m, const Vec& x, const Vec& X) { return std::sqrt(inner(m, x, X, X)); }

Christoffel christoffel(const ManifoldSpec& m, const Vec& x, double h) {
  require_in_chart(m, x);
  const int d = m.dim;
  const Mat g = metric_at(m, x);
  if (!metric_is_spd(g)) throw GeometryError("metric is not SPD at point in " + m.name);
  const Mat ginv = g.inverse();

  std::array<Mat, kMaxDim> dg;
  for (int i = 0; i < d; ++i) dg[i] = partial(m.chart, m.metric, x, i, h);

  Christoffel c = Christoffel::zero(d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        c.upper[k](i, j) = 0.5 * s;
      }
  // exact symmetry in the lower indices
  for (int k = 0; k < d; ++k) c.upper[k] = 0.5 * (c.upper[k] + c.upper[k].transpose()).eval();
  return c;
}

Vec gradient(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h) {
  require_in_chart(m, x);
  return metric_inverse_at(m, x) * differential(m.chart, f, x, h);
}

double gradient_norm_sq(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h) {
  const Vec df = differential(m.chart, f, x, h);
  return df.dot(metric_inverse_at(m, x) * df);
}

Mat hessian(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h) {
  require_in_chart(m, x);
  const Vec df = differential(m.chart, f, x, h);
  Mat H = second_partials(m.chart, f, x, h);
  if (!m.flat) {
    const Christoffel c = christoffel(m, x, h);
    for (int k = 0; k < m.dim; ++k) H -= c.upper[k] * df[k];
  }
  return H;
}

double generator_L(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h) {
  const Mat H = hessian(m, f, x, h);
  const Vec df = differential(m.chart, f, x, h);
  return (metric_inverse_at(m, x).cwiseProduct(H)).sum() + m.drift_at(x).dot(df);
}

Mat ricci_tensor(const ManifoldSpec& m, const Vec& x, double h) {
  require_in_chart(m, x);
  const int d = m.dim;
  if (d == 1) return Mat::Zero(1, 1);
  auto gamma = [&](const Vec& y) { return christoffel(m, y, h); };
  const Christoffel c = gamma(x);
  std::array<Christoffel, kMaxDim> dc;
  for (int a = 0; a < d; ++a) dc[a] = partial(m.chart, gamma, x, a, h);

  Mat ric = Mat::Zero(d, d);
  for (int b = 0; b < d; ++b)
    for (int e = 0; e < d; ++e) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        s += dc[a].upper[a](b, e) - dc[e].upper[a](a, b);
        for (int l = 0; l < d; ++l)
          s += c.upper[a](a, l) * c.upper[l](b, e) - c.upper[a](e, l) * c.upper[l](a, b);
      }
      ric(b, e) = s;
    }
  return 0.5 * (ric + ric.transpose());
}

double ricci(const ManifoldSpec& m, const Vec& x, const Vec& X, double h) {
  return X.dot(ricci_tensor(m, x, h) * X);
}

Mat drift_derivative_form(const ManifoldSpec& m, const Vec& x, double h) {
  require_in_chart(m, x);
  const int d = m.dim;
  if (!m.drift) return Mat::Zero(d, d);
  const Mat g = metric_at(m, x);
  const Vec Z = m.drift(x);
  // J(k, i) = d_i Z^k + Gamma^k_{ij} Z^j, the covariant derivative nabla_i Z^k
  Mat J(d, d);
  for (int i = 0; i < d; ++i) J.col(i) = partial(m.chart, m.drift, x, i, h);
  if (!m.flat) {
    const Christoffel c = christoffel(m, x, h);
    for (int k = 0; k < d; ++k) J.row(k) += (c.upper[k] * Z).transpose();
  }
  // <nabla_X Z, X> = X^i J(k, i) g_kl X^l
  const Mat A = J.transpose() * g;
  return 0.5 * (A + A.transpose());
}

Mat bakry_emery_form(const ManifoldSpec& m, const Vec& x, double h) {
  return ricci_tensor(m, x, h) - drift_derivative_form(m, x, h);
}

Vec normal_field(const ManifoldSpec& m, const Vec& x, double h) {
  const Vec db = differential(m.chart, m.boundary, x, h);
  const Mat ginv = metric_inverse_at(m, x);
  const double len2 = db.dot(ginv * db);
  if (!(len2 > 1e-20)) throw GeometryError("degenerate boundary function gradient in " + m.name);
  return ginv * db / std::sqrt(len2);
}

Vec inward_normal(const ManifoldSpec& m, const Vec& x, double h) {
  require_in_chart(m, x);
  if (std::abs(m.boundary(x)) > m.boundary_tolerance())
    throw GeometryError("inward_normal: point is not on the boundary of " + m.name);
  return normal_field(m, x, h);
}

Vec unit_tangent(const ManifoldSpec& m, const Vec& x, const Vec& N) {
  if (m.dim == 1) return Vec(0);
  const Vec gN = metric_at(m, x) * N;
  Vec T = vec2(-gN[1], gN[0]);
  return T / norm(m, x, T);
}

double second_fundamental_form(const ManifoldSpec& m, const Vec& x, const Vec& X, const Vec& Y, double h,
                               Diagnostics* diag) {
  require_in_chart(m, x);
  if (m.dim == 1) return 0.0;
  if (std::abs(m.boundary(x)) > m.boundary_tolerance())
    throw GeometryError("second_fundamental_form: point is not on the boundary of " + m.name);
  auto field = [&](const Vec& y) { return normal_field(m, y, h); };
  const Vec N = field(x);
  auto tangential = [&](const Vec& V) {
    const Vec P = V - inner(m, x, V, N) * N;
    const double scale = std::max(1.0, norm(m, x, V));
    if (diag && norm(m, x, P - V) > 1e-6 * scale) diag->warnings.push_back("II: argument projected onto T(dM)");
    return P;
  };
  const Vec Xt = tangential(X);
  const Vec Yt = tangential(Y);

  Vec nablaXN = Vec::Zero(m.dim);
  for (int i = 0; i < m.dim; ++i) nablaXN += Xt[i] * partial(m.chart, field, x, i, h);
  if (!m.flat) nablaXN += christoffel(m, x, h).apply(Xt, N);
  return -inner(m, x, nablaXN, Yt);
}

Gamma2 gamma2_check(const ManifoldSpec& m, const ScalarField& f, const Vec& x, double h) {
  require_in_chart(m, x);
  const ScalarField grad_sq = [&](const Vec& y) { return gradient_norm_sq(m, f, y, h); };
  const ScalarField Lf = [&](const Vec& y) { return generator_L(m, f, y, h); };

  const Vec grad_f = gradient(m, f, x, h);
  const Vec dLf = differential(m.chart, Lf, x, h);

  Gamma2 out;
  out.lhs = 0.5 * generator_L(m, grad_sq, x, h) - dLf.dot(grad_f);

  const Mat H = hessian(m, f, x, h);
  const Mat ginv = metric_inverse_at(m, x);
  const Mat GH = ginv * H;
  out.rhs = grad_f.dot(bakry_emery_form(m, x, h) * grad_f) + (GH * GH).trace();
  return out;
}

double distance(const ManifoldSpec& m, const Vec& x, const Vec& y) {
  if (m.distance) return m.distance(x, y);
  return segment_length(m, x, y);
}

Projection project_to_boundary(const ManifoldSpec& m, const Vec& x) {
  if (m.project_exact) return m.project_exact(x);
  const double h = kDefaultGeoStep;
  const Vec N = normal_field(m, x, h);
  double s = 0.0;
  Vec y = x;
  for (int it = 0; it < 50; ++it) {
    const double b = m.boundary(y);
    if (std::abs(b) <= 1e-14 * std::max(1.0, m.chart.diameter())) break;
    const double slope = differential(m.chart, m.boundary, y, h).dot(N);
    if (slope == 0.0) throw GeometryError("projection failed: flat boundary function");
    s -= b / slope;
    y = x + s * N;
  }
  // never report a point strictly outside M
  if (m.boundary(y) < 0.0) y = x + (s * (1.0 + 1e-12)) * N;
  return {y, segment_length(m, x, y)};
}

std::vector<Vec> sample_boundary(const ManifoldSpec& m, int count) {
  if (m.boundary_points) return m.boundary_points(count);
  std::vector<Vec> out;
  auto bisect = [&](Vec a, Vec b) {
    for (int it = 0; it < 200; ++it) {
      Vec mid = 0.5 * (a + b);
      if ((m.boundary(mid) >= 0.0) == (m.boundary(a) >= 0.0)) a = mid;
      else b = mid;
    }
    return Vec(0.5 * (a + b));
  };
  const Vec center = 0.5 * (m.chart.lo + m.chart.hi);
  constexpr int kScan = 800;
  const int rays = (m.dim == 1) ? 1 : count;
  for (int r = 0; r < rays; ++r) {
    Vec lo = m.chart.lo, hi = m.chart.hi;
    if (m.dim == 2) {
      const double ang = 2.0 * std::numbers::pi * r / rays;
      const double reach = 0.5 * m.chart.diameter();
      lo = center;
      hi = center + reach * vec2(std::cos(ang), std::sin(ang));
    }
    Vec prev = lo;
    for (int k = 1; k <= kScan; ++k) {
      Vec cur = lo + (hi - lo) * (static_cast<double>(k) / kScan);
      if (!m.chart.contains(cur)) break;
      if ((m.boundary(prev) >= 0.0) != (m.boundary(cur) >= 0.0)) out.push_back(bisect(prev, cur));
      prev = cur;
    }
  }
  return out;
}

std::vector<Vec> interior_grid(const ManifoldSpec& m, int per_axis, double margin) {
  std::vector<Vec> out;
  const Vec lo = m.chart.lo, hi = m.chart.hi;
  auto coord = [&](int axis, int k) {
    return lo[axis] + (hi[axis] - lo[axis]) * (k + 0.5) / per_axis;
  };
  if (m.dim == 1) {
    for (int i = 0; i < per_axis; ++i) {
      Vec x = vec1(coord(0, i));
      if (m.boundary(x) > margin) out.push_back(x);
    }
  } else {
    for (int j = 0; j < per_axis; ++j)
      for (int i = 0; i < per_axis; ++i) {
        Vec x = vec2(coord(0, i), coord(1, j));
        if (m.boundary(x) > margin) out.push_back(x);
      }
  }
  return out;
}

}  // namespace reflab
