#include "reflab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "reflab/quadrature.hpp"
#include "reflab/types.hpp"

namespace reflab {

namespace {

Certified combine(const std::vector<double>& F) {
  if (F.size() == 1) return {F[0], std::numeric_limits<double>::infinity()};
  auto rich = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
  if (F.size() == 2) return {rich(F[0], F[1]), std::abs(F[1] - F[0]) / 3.0};
  const std::size_t n = F.size();
  const double hi = rich(F[n - 2], F[n - 1]), lo = rich(F[n - 3], F[n - 2]);
  return {hi, std::abs(hi - lo)};
}

/// Thomas solve of a tridiagonal system with constant coefficients.
class Tridiagonal {
 public:
  Tridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper)
      : lo_(std::move(lower)), up_(std::move(upper)), d_(std::move(diag)) {
    const std::size_t n = d_.size();
    cp_.resize(n);
    inv_.resize(n);
    double denom = d_[0];
    inv_[0] = 1.0 / denom;
    cp_[0] = n > 1 ? up_[0] * inv_[0] : 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      denom = d_[i] - lo_[i] * cp_[i - 1];
      inv_[i] = 1.0 / denom;
      cp_[i] = i + 1 < n ? up_[i] * inv_[i] : 0.0;
    }
  }
  void solve(std::vector<double>& r) const {
    const std::size_t n = d_.size();
    r[0] *= inv_[0];
    for (std::size_t i = 1; i < n; ++i) r[i] = (r[i] - lo_[i] * r[i - 1]) * inv_[i];
    for (std::size_t i = n - 1; i-- > 0;) r[i] -= cp_[i] * r[i + 1];
  }

 private:
  std::vector<double> lo_, up_, d_, cp_, inv_;
};

std::vector<double> lagrange4(const std::vector<double>& x, double at, int& first, bool derivative = false) {
  const int n = static_cast<int>(x.size());
  const double dx = x[1] - x[0];
  int i = static_cast<int>(std::floor((at - x[0]) / dx)) - 1;
  first = std::clamp(i, 0, n - 4);
  std::vector<double> L(4, derivative ? 0.0 : 1.0);
  for (int a = 0; a < 4; ++a) {
    if (!derivative) {
      for (int b = 0; b < 4; ++b)
        if (a != b) L[a] *= (at - x[first + b]) / (x[first + a] - x[first + b]);
      continue;
    }
    for (int skip = 0; skip < 4; ++skip) {
      if (skip == a) continue;
      double term = 1.0 / (x[first + a] - x[first + skip]);
      for (int b = 0; b < 4; ++b)
        if (b != a && b != skip) term *= (at - x[first + b]) / (x[first + a] - x[first + b]);
      L[a] += term;
    }
  }
  return L;
}

}  // namespace

SturmLiouville sturm_liouville_of(const ManifoldSpec& m) {
  if (m.dim != 1 || m.builtin != BuiltinKind::interval)
    throw OracleError("1-D oracle needs an interval or half-line built-in, got " + m.name);
  SturmLiouville op;
  op.a = 0.0;
  op.b = m.builtin_params[0];
  if (m.potential) {
    const ScalarField V = m.potential;
    op.V = [V](double x) { return V(vec1(x)); };
  }
  return op;
}

PdeGrid::PdeGrid(const SturmLiouville& o, int n) : op(o), intervals(n) {
  if (n < 4) throw OracleError("PDE grid needs at least 4 intervals");
  if (!(op.b > op.a)) throw OracleError("PDE grid needs a < b");
  dx = (op.b - op.a) / n;
  auto V_at = [&](double s) { return op.V ? op.V(s) : 0.0; };
  x.resize(n + 1);
  w.resize(n + 1);
  qw.resize(n + 1);
  Z.resize(n + 1);
  V.resize(n + 1);
  c.resize(n);
  for (int i = 0; i <= n; ++i) {
    x[i] = op.a + i * dx;
    V[i] = V_at(x[i]);
    w[i] = std::exp(V[i]) * dx * ((i == 0 || i == n) ? 0.5 : 1.0);
    qw[i] = op.q ? op.q(x[i]) * w[i] : 0.0;
    const double e = 1e-4 * (op.b - op.a);
    Z[i] = op.V ? (V_at(x[i] + e) - V_at(x[i] - e)) / (2 * e) : 0.0;
  }
  for (int i = 0; i < n; ++i) c[i] = std::exp(V_at(x[i] + 0.5 * dx)) / dx;
}

std::vector<double> PdeGrid::tabulate(const Fn1& f) const {
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = f(x[i]);
  return u;
}

std::vector<double> PdeGrid::apply_generator(const std::vector<double>& u) const {
  const int n = intervals;
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) {
    double s = -qw[i] * u[i];
    if (i > 0) s += c[i - 1] * (u[i - 1] - u[i]);
    if (i < n) s += c[i] * (u[i + 1] - u[i]);
    out[i] = s / w[i];
  }
  return out;
}

double PdeGrid::interpolate(const std::vector<double>& u, double at, bool derivative) const {
  int first = 0;
  const auto L = lagrange4(x, at, first, derivative);
  double s = 0.0;
  for (int a = 0; a < 4; ++a) s += L[a] * u[first + a];
  return s;
}

double PdeGrid::mass(const std::vector<double>& u) const {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i];
  return s;
}

std::vector<std::vector<double>> evolve(const PdeGrid& g, const std::vector<double>& u0,
                                        const std::vector<double>& times, double k) {
  const int n = g.intervals;
  // (W - k/2 S) is the left side of both a CN step of k and a backward-Euler step of k/2
  std::vector<double> lo(n + 1, 0.0), di(n + 1), up(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    double s = -g.qw[i];
    if (i > 0) {
      s -= g.c[i - 1];
      lo[i] = -0.5 * k * g.c[i - 1];
    }
    if (i < n) {
      s -= g.c[i];
      up[i] = -0.5 * k * g.c[i];
    }
    di[i] = g.w[i] - 0.5 * k * s;
  }
  const Tridiagonal lhs(lo, di, up);

  std::vector<std::vector<double>> out;
  std::vector<double> u = u0, r(n + 1);
  std::uint64_t done = 0;
  for (double t : times) {
    const double steps_f = t / k;
    const auto steps = static_cast<std::uint64_t>(std::llround(steps_f));
    if (std::abs(steps_f - static_cast<double>(steps)) > 1e-6 * std::max(1.0, steps_f))
      throw OracleError("PDE time " + std::to_string(t) + " is not a multiple of k");
    if (steps < done) throw OracleError("PDE times must be sorted");
    for (; done < steps; ++done) {
      if (done < 2) {
        for (int half = 0; half < 2; ++half) {
          for (int i = 0; i <= n; ++i) r[i] = g.w[i] * u[i];
          lhs.solve(r);
          u.swap(r);
        }
      } else {
        const auto Su = g.apply_generator(u);
        for (int i = 0; i <= n; ++i) r[i] = g.w[i] * (u[i] + 0.5 * k * Su[i]);
        lhs.solve(r);
        u.swap(r);
      }
    }
    out.push_back(u);
  }
  return out;
}

std::vector<std::vector<Certified>> neumann_pde_1d(const SturmLiouville& op, const Fn1& f,
                                                   const std::vector<double>& points,
                                                   const std::vector<double>& times, const PdeOptions& opt,
                                                   bool derivative) {
  for (double p : points)
    if (p < op.a - 1e-12 || p > op.b + 1e-12) throw OracleError("PDE evaluation point outside [a, b]");
  // F[level][t][x]
  std::vector<std::vector<std::vector<double>>> F;
  for (int l = 0; l < opt.levels; ++l) {
    const PdeGrid g(op, opt.intervals << l);
    const auto snaps = evolve(g, g.tabulate(f), times, opt.k);
    auto& level = F.emplace_back();
    for (const auto& u : snaps) {
      auto& row = level.emplace_back();
      for (double p : points) row.push_back(g.interpolate(u, p, derivative));
    }
  }
  // time error: finest level again with k/2
  const PdeGrid fine(op, opt.intervals << (opt.levels - 1));
  const auto halved = evolve(fine, fine.tabulate(f), times, 0.5 * opt.k);
  std::vector<std::vector<Certified>> out(times.size(), std::vector<Certified>(points.size()));
  for (std::size_t j = 0; j < times.size(); ++j)
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::vector<double> seq;
      for (const auto& level : F) seq.push_back(level[j][i]);
      out[j][i] = combine(seq);
      const double dt = fine.interpolate(halved[j], points[i], derivative) - seq.back();
      out[j][i].value += 4.0 / 3.0 * dt;
      out[j][i].error += std::abs(dt);
    }
  return out;
}

std::vector<std::vector<Certified>> annulus_mode_solver(double r_in, double r_out, int mode, const Fn1& f_radial,
                                                        const std::vector<double>& radii,
                                                        const std::vector<double>& times, const PdeOptions& opt) {
  if (!(r_in > 0.0 && r_out > r_in)) throw OracleError("annulus needs 0 < r_in < r_out");
  if (mode < 0 || mode > 2) throw OracleError("annulus mode must be 0, 1 or 2");
  SturmLiouville op;
  op.a = r_in;
  op.b = r_out;
  op.V = [](double r) { return std::log(r); };
  if (mode > 0) {
    const double m2 = mode * mode;
    op.q = [m2](double r) { return m2 / (r * r); };
  }
  return neumann_pde_1d(op, f_radial, radii, times, opt);
}

double ZonalExpansion::value(double theta0, double t) const {
  const int n = static_cast<int>(c.size()) - 1;
  const auto P = legendre_values(n, std::cos(theta0));
  double s = 0.0;
  for (int l = 0; l <= n; ++l) s += c[l] * std::exp(-l * (l + 1.0) * t) * P[l];
  return s;
}

double ZonalExpansion::dtheta(double theta0, double t) const {
  const int n = static_cast<int>(c.size()) - 1;
  const auto dP = legendre_derivatives(n, std::cos(theta0));
  double s = 0.0;
  for (int l = 0; l <= n; ++l) s += c[l] * std::exp(-l * (l + 1.0) * t) * dP[l];
  return -std::sin(theta0) * s;
}

ZonalExpansion hemisphere_expansion(const Fn1& f_of_cos, int truncation) {
  if (truncation < 0) throw OracleError("truncation must be >= 0");
  const int extra = truncation + 10;
  std::vector<double> coeff(extra + 1, 0.0);
  // integrate in theta so endpoint square roots stay smooth; split at the equator
  const double half = 0.5 * std::numbers::pi;
  for (int l = 0; l <= extra; ++l) {
    auto integrand = [&](double th) {
      return f_of_cos(std::cos(th)) * legendre_values(l, std::cos(th))[l] * std::sin(th);
    };
    coeff[l] = 0.5 * (2 * l + 1) * (integrate(integrand, 0.0, half, 32, 16) + integrate(integrand, half, 2 * half, 32, 16));
  }
  double odd = 0.0;
  for (int l = 1; l <= truncation; l += 2) odd = std::max(odd, std::abs(coeff[l]));
  if (odd > 1e-10)
    throw OracleError("zonal data has odd Legendre content " + std::to_string(odd) + " (not Neumann at the equator)");
  ZonalExpansion e;
  e.c.assign(coeff.begin(), coeff.begin() + truncation + 1);
  for (int l = 1; l <= truncation; l += 2) e.c[l] = 0.0;
  for (int l = truncation + 2 - truncation % 2; l <= extra; l += 2) e.tail = std::max(e.tail, std::abs(coeff[l]));
  return e;
}

double hemisphere_spectral(const Fn1& f_of_cos, double theta0, double t, int truncation) {
  return hemisphere_expansion(f_of_cos, truncation).value(theta0, t);
}

double w2_1d(const std::vector<double>& nodes, const std::vector<double>& da, const std::vector<double>& db,
             int q_points) {
  const std::size_t n = nodes.size();
  if (n < 2 || da.size() != n || db.size() != n) throw OracleError("w2_1d: mismatched density tables");
  if (q_points < 10) throw OracleError("w2_1d: too few quantile points");
  const double dx = nodes[1] - nodes[0];
  struct Cdf {
    std::vector<double> F;
    const std::vector<double>* d;
  };
  auto build = [&](const std::vector<double>& d) {
    Cdf c{std::vector<double>(n, 0.0), &d};
    for (std::size_t i = 0; i < n; ++i)
      if (d[i] < 0.0 || !std::isfinite(d[i])) throw OracleError("w2_1d: density must be nonnegative");
    for (std::size_t i = 1; i < n; ++i) c.F[i] = c.F[i - 1] + 0.5 * dx * (d[i - 1] + d[i]);
    if (std::abs(c.F[n - 1] - 1.0) > 1e-8)
      throw OracleError("w2_1d: density integrates to " + std::to_string(c.F[n - 1]) + ", not 1");
    return c;
  };
  const Cdf A = build(da), B = build(db);
  // exact inverse of the piecewise-quadratic CDF of a piecewise-linear density
  auto quantile = [&](const Cdf& c, double q) {
    q *= c.F[n - 1];
    const auto it = std::lower_bound(c.F.begin(), c.F.end(), q);
    std::size_t j = it == c.F.begin() ? 0 : static_cast<std::size_t>(it - c.F.begin()) - 1;
    j = std::min(j, n - 2);
    const double d0 = (*c.d)[j], d1 = (*c.d)[j + 1], r = q - c.F[j];
    const double a = 0.5 * (d1 - d0) / dx;
    double s;
    if (std::abs(a) * dx < 1e-14 * std::max(d0, 1e-300)) s = d0 > 0 ? r / d0 : 0.0;
    else s = (-d0 + std::sqrt(std::max(0.0, d0 * d0 + 4.0 * a * r))) / (2.0 * a);
    return nodes[j] + std::clamp(s, 0.0, dx);
  };
  double sum = 0.0;
  for (int i = 0; i < q_points; ++i) {
    const double q = (i + 0.5) / q_points;
    const double diff = quantile(A, q) - quantile(B, q);
    sum += diff * diff;
  }
  return std::sqrt(sum / q_points);
}

HeatKernel1d::HeatKernel1d(const SturmLiouville& op, int intervals, int levels) {
  if (op.q) throw OracleError("heat kernel oracle needs q = 0");
  for (int l = 0; l < levels; ++l) {
    PdeGrid g(op, intervals << l);
    double Zsum = 0.0;
    for (double wi : g.w) Zsum += wi;
    for (double& wi : g.w) wi /= Zsum;
    for (double& ci : g.c) ci /= Zsum;
    const int n = g.nodes();
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = 1.0 / std::sqrt(g.w[i]);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(n - 1);
    for (int i = 0; i < g.intervals; ++i) {
      diag[i] -= g.c[i] * s[i] * s[i];
      diag[i + 1] -= g.c[i] * s[i + 1] * s[i + 1];
      sub[i] = g.c[i] * s[i] * s[i + 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    if (es.info() != Eigen::Success) throw OracleError("heat kernel eigendecomposition failed");
    const Eigen::MatrixXd& U = es.eigenvectors();
    // residual of B U = U Lambda, with B applied as the tridiagonal
    Eigen::MatrixXd BU = diag.asDiagonal() * U;
    BU.topRows(n - 1) += sub.asDiagonal() * U.bottomRows(n - 1);
    BU.bottomRows(n - 1) += sub.asDiagonal() * U.topRows(n - 1);
    const double residual = (BU - U * es.eigenvalues().asDiagonal()).cwiseAbs().maxCoeff();
    Level L{std::move(g), es.eigenvalues(), s.asDiagonal() * U, residual};
    if (L.asymmetry > 1e-8) throw OracleError("heat kernel discretization rejected (eigen residual too large)");
    levels_.push_back(std::move(L));
  }
}

Eigen::VectorXd HeatKernel1d::row(int level, double x, double t) const {
  const Level& L = levels_[level];
  int first = 0;
  const auto c = lagrange4(L.grid.x, x, first);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(L.lambda.size());
  for (int k = 0; k < 4; ++k) a += c[k] * L.psi.row(first + k).transpose();
  a = a.cwiseProduct((L.lambda * t).array().exp().matrix());
  return L.psi * a;
}

double HeatKernel1d::p(int level, double x, double y, double t) const {
  return levels_[level].grid.interpolate(
      [&] {
        const Eigen::VectorXd r = row(level, x, t);
        return std::vector<double>(r.data(), r.data() + r.size());
      }(),
      y);
}

Certified HeatKernel1d::functional(const std::function<double(const Level&, int)>& F) const {
  std::vector<double> seq;
  for (int l = 0; l < static_cast<int>(levels_.size()); ++l) seq.push_back(F(levels_[l], l));
  return combine(seq);
}

Certified HeatKernel1d::p(double x, double y, double t) const {
  return functional([&](const Level&, int l) { return p(l, x, y, t); });
}

Certified HeatKernel1d::entropy(double x, double y, double t) const {
  return functional([&](const Level& L, int l) {
    const Eigen::VectorXd rx = row(l, x, t), ry = row(l, y, t);
    double s = 0.0;
    for (int j = 0; j < rx.size(); ++j) {
      if (rx[j] <= 1e-13) continue;
      s += L.grid.w[j] * rx[j] * std::log(rx[j] / std::max(ry[j], 1e-300));
    }
    return s;
  });
}

double HeatKernel1d::conservation_error(double t) const {
  const Level& L = levels_.back();
  const Eigen::Map<const Eigen::VectorXd> w(L.grid.w.data(), L.grid.nodes());
  // int p_t(x_i, .) d mu = sum_k e^{lambda_k t} psi_k(i) <psi_k, 1>_mu
  const Eigen::VectorXd moments = (L.psi.transpose() * w).cwiseProduct((L.lambda * t).array().exp().matrix());
  return ((L.psi * moments).array() - 1.0).abs().maxCoeff();
}

}  // namespace reflab

namespace reflab {

MuQuadrature::MuQuadrature(const ManifoldSpec& m, int panels, int order) : m_(m), panels_(panels), order_(order) {
  const bool known = m.builtin == BuiltinKind::interval || m.builtin == BuiltinKind::disk ||
                     m.builtin == BuiltinKind::annulus || m.builtin == BuiltinKind::hemisphere;
  if (!known) throw OracleError("mu quadrature is only available on built-in geometries, not " + m.name);
}

double MuQuadrature::raw(const ScalarField& g, int panels) const {
  const auto& m = m_;
  auto weight = [&](const Vec& x) { return m.potential ? std::exp(m.potential(x)) : 1.0; };
  const auto& p = m.builtin_params;
  switch (m.builtin) {
    case BuiltinKind::interval:
      return integrate([&](double s) { const Vec x = vec1(s); return g(x) * weight(x); }, 0.0, p[0], panels, order_);
    case BuiltinKind::disk:
    case BuiltinKind::annulus: {
      const double r0 = m.builtin == BuiltinKind::disk ? 0.0 : p[0];
      const double r1 = m.builtin == BuiltinKind::disk ? p[0] : p[1];
      return integrate(
          [&](double r) {
            return r * integrate(
                           [&](double a) {
                             const Vec x = vec2(r * std::cos(a), r * std::sin(a));
                             return g(x) * weight(x);
                           },
                           0.0, 2 * std::numbers::pi, panels, order_);
          },
          r0, r1, panels, order_);
    }
    case BuiltinKind::hemisphere: {
      const double R = p[0];
      return integrate(
          [&](double th) {
            return R * R * std::sin(th) *
                   integrate(
                       [&](double ph) {
                         const Vec x = m.from_natural(vec2(th, ph));
                         return g(x) * weight(x);
                       },
                       0.0, 2 * std::numbers::pi, panels, order_);
          },
          0.0, 0.5 * std::numbers::pi, panels, order_);
    }
    default:
      throw OracleError("mu quadrature unavailable");
  }
}

Certified MuQuadrature::mean(const ScalarField& g) const {
  const ScalarField one = [](const Vec&) { return 1.0; };
  const double coarse = raw(g, panels_) / raw(one, panels_);
  const double fine = raw(g, 2 * panels_) / raw(one, 2 * panels_);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace reflab
