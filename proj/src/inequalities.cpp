#include "reflab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "reflab/digest.hpp"
#include "reflab/parallel.hpp"
#include "reflab/quadrature.hpp"
#include "reflab/types.hpp"

namespace reflab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "HOLDS";
    case Verdict::violated: return "VIOLATED";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

Hypotheses check_hypotheses(double K, const CurvatureBoundReport& curvature, const ClassDReport& class_d) {
  Hypotheses h;
  if (curvature.per_axis == 0) {
    h.failures.push_back("no curvature bound report");
  } else {
    h.curvature_digest = curvature.digest();
    if (K > curvature.K + 1e-12) h.failures.push_back("K = " + repr(K) + " exceeds the certified bound " + repr(curvature.K));
  }
  if (class_d.boundary_samples == 0 && class_d.interior_samples == 0) {
    h.failures.push_back("no class-D report");
  } else {
    h.class_d_digest = class_d.digest();
    if (!class_d.passed()) h.failures.push_back("class-D check failed");
  }
  return h;
}

std::string CheckReport::to_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["experiment"] = experiment;
  j["digest"] = digest;
  j["where"] = where;
  j["source"] = source;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["margin"] = margin();
  j["stat_tol"] = stat_tol;
  j["oracle_tol"] = oracle_tol;
  j["bias_tol"] = bias_tol;
  j["verdict"] = to_string(verdict);
  j["negative"] = negative;
  j["hypotheses"] = hypotheses;
  j["reason"] = reason;
  return j.dump();
}

void render(CheckReport& r, const Hypotheses& h) {
  r.hypotheses.clear();
  if (!h.curvature_digest.empty()) r.hypotheses.push_back("curvature:" + h.curvature_digest);
  if (!h.class_d_digest.empty()) r.hypotheses.push_back("class_d:" + h.class_d_digest);
  auto note = [&r](const std::string& s) { r.reason += (r.reason.empty() ? "" : "; ") + s; };
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs) || !std::isfinite(r.tolerance())) {
    r.verdict = Verdict::inconclusive;
    note("non-finite value");
    return;
  }
  if (r.lhs > r.rhs + r.tolerance()) {
    r.verdict = Verdict::violated;
  } else if (h.verified()) {
    r.verdict = Verdict::holds;
  } else {
    r.verdict = Verdict::inconclusive;
    for (const auto& f : h.failures) note(f);
  }
}

std::string describe_point(const Vec& x) {
  std::string s = "(";
  char buf[32];
  for (int i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", x[i]);
    s += (i ? "," : "") + std::string(buf);
  }
  return s + ")";
}

double expm1_over(double a, double t) {
  const double z = a * t;
  if (std::abs(z) < 1e-6) return t * (1.0 + z / 2.0 + z * z / 6.0);
  return std::expm1(z) / a;
}

// ---------------------------------------------------------------- observables

Observable observe(const TestFunction& t) { return {t.f, t.zonal}; }

Observable square(const ManifoldSpec&, const Observable& g) {
  Observable o;
  const ScalarField f = g.f;
  o.f = [f](const Vec& x) { const double v = f(x); return v * v; };
  if (g.zonal) {
    const Fn1 z = g.zonal;
    o.zonal = [z](double c) { const double v = z(c); return v * v; };
  }
  return o;
}

Observable log_of(const Observable& g) {
  Observable o;
  const ScalarField f = g.f;
  o.f = [f](const Vec& x) { return std::log(f(x)); };
  if (g.zonal) {
    const Fn1 z = g.zonal;
    o.zonal = [z](double c) { return std::log(z(c)); };
  }
  return o;
}

Observable grad_sq(const ManifoldSpec& m, const Observable& g, const PhiField* phi, double h) {
  Observable o;
  const ScalarField f = g.f;
  const ManifoldSpec* mp = &m;
  o.f = [mp, f, phi, h](const Vec& x) {
    const double w = phi ? (*phi)(x) : 1.0;
    return w * w * gradient_norm_sq(*mp, f, x, h);
  };
  if (g.zonal && m.builtin == BuiltinKind::hemisphere && (!phi || phi->constant)) {
    const Fn1 z = g.zonal;
    const double R2 = m.builtin_params[0] * m.builtin_params[0];
    // |d/dtheta z(cos theta)|^2 = (1 - c^2) z'(c)^2
    o.zonal = [z, R2](double c) {
      const double e = 1e-5;
      const double d = (z(c + e) - z(c - e)) / (2 * e);
      return (1.0 - c * c) * d * d / R2;
    };
  }
  return o;
}

// ---------------------------------------------------------------- semigroups

namespace {

class PdeSemigroup final : public Semigroup {
 public:
  PdeSemigroup(const ManifoldSpec& m, const PdeOptions& opt) : op_(sturm_liouville_of(m)), opt_(opt) {}
  const char* source() const override { return "pde"; }
  Table values(const std::vector<Observable>& gs, const std::vector<Vec>& xs,
               const std::vector<double>& ts) override {
    return run(gs, xs, ts, false);
  }
  Table gradient_norms(const std::vector<Observable>& gs, const std::vector<Vec>& xs,
                       const std::vector<double>& ts) override {
    Table t = run(gs, xs, ts, true);
    for (auto& a : t)
      for (auto& b : a)
        for (auto& q : b) q.value = std::abs(q.value);
    return t;
  }

 private:
  Table run(const std::vector<Observable>& gs, const std::vector<Vec>& xs, const std::vector<double>& ts,
            bool derivative) const {
    std::vector<double> pts;
    for (const auto& x : xs) pts.push_back(x[0]);
    Table out;
    for (const auto& g : gs) {
      const ScalarField f = g.f;
      const auto res = neumann_pde_1d(op_, [f](double s) { return f(vec1(s)); }, pts, ts, opt_, derivative);
      auto& og = out.emplace_back();
      for (const auto& row : res) {
        auto& ot = og.emplace_back();
        for (const auto& c : row) ot.push_back({c.value, 0.0, c.error});
      }
    }
    return out;
  }
  SturmLiouville op_;
  PdeOptions opt_;
};

class SpectralSemigroup final : public Semigroup {
 public:
  SpectralSemigroup(const ManifoldSpec& m, int truncation) : m_(m), truncation_(truncation) {
    if (m.builtin != BuiltinKind::hemisphere) throw OracleError("spectral oracle needs the hemisphere");
    radius_ = m.builtin_params[0];
  }
  const char* source() const override { return "spectral"; }
  Table values(const std::vector<Observable>& gs, const std::vector<Vec>& xs,
               const std::vector<double>& ts) override {
    return run(gs, xs, ts, false);
  }
  Table gradient_norms(const std::vector<Observable>& gs, const std::vector<Vec>& xs,
                       const std::vector<double>& ts) override {
    return run(gs, xs, ts, true);
  }

 private:
  Table run(const std::vector<Observable>& gs, const std::vector<Vec>& xs, const std::vector<double>& ts,
            bool gradient) const {
    Table out;
    for (const auto& g : gs) {
      if (!g.zonal) throw OracleError("spectral oracle needs a zonal observable");
      const ZonalExpansion e = hemisphere_expansion(g.zonal, truncation_);
      auto& og = out.emplace_back();
      for (double t : ts) {
        auto& ot = og.emplace_back();
        const double n = truncation_ + 2.0;
        // time rescaled by R^2 for a sphere of radius R
        const double tt = t / (radius_ * radius_);
        const double err = 1e-12 + 10.0 * e.tail * std::exp(-n * (n + 1) * tt);
        for (const auto& x : xs) {
          const double th = m_.to_natural(x)[0];
          const double v = gradient ? std::abs(e.dtheta(th, tt)) / radius_ : e.value(th, tt);
          ot.push_back({v, 0.0, err});
        }
      }
    }
    return out;
  }
  const ManifoldSpec& m_;
  int truncation_;
  double radius_ = 1.0;
};

class McSemigroup final : public Semigroup {
 public:
  McSemigroup(const ManifoldSpec& m, const SimConfig& cfg, const RunOptions& opt, double delta)
      : m_(m), cfg_(cfg), opt_(opt), delta_(delta) {}
  const char* source() const override { return "mc"; }
  Table values(const std::vector<Observable>& gs, const std::vector<Vec>& xs,
               const std::vector<double>& ts) override {
    std::vector<ScalarField> fs;
    for (const auto& g : gs) fs.push_back(g.f);
    Table out(gs.size(), std::vector<std::vector<Quantity>>(ts.size()));
    for (const auto& x : xs) {
      const auto tab = estimate_Pt(m_, cfg_, fs, x, ts, opt_);
      for (std::size_t i = 0; i < gs.size(); ++i)
        for (std::size_t j = 0; j < ts.size(); ++j) out[i][j].push_back({tab[i][j].mean(), tab[i][j].std_error(), 0.0});
    }
    return out;
  }
  Table gradient_norms(const std::vector<Observable>& gs, const std::vector<Vec>& xs,
                       const std::vector<double>& ts) override {
    std::vector<ScalarField> fs;
    for (const auto& g : gs) fs.push_back(g.f);
    Table out(gs.size(), std::vector<std::vector<Quantity>>(ts.size()));
    for (const auto& x : xs) {
      const auto tab = estimate_grad_Pt(m_, cfg_, fs, x, ts, delta_, opt_);
      for (std::size_t i = 0; i < gs.size(); ++i)
        for (std::size_t j = 0; j < ts.size(); ++j) {
          const auto& g = tab[i][j];
          // one-sided stencils carry a doubled tolerance
          out[i][j].push_back({g.norm.mean(), g.norm.std_error() * (g.one_sided ? 2.0 : 1.0), 0.0});
        }
    }
    return out;
  }

 private:
  const ManifoldSpec& m_;
  SimConfig cfg_;
  RunOptions opt_;
  double delta_;
};

Quantity q_square(const Quantity& q) {
  return {q.value * q.value, 2 * std::abs(q.value) * q.se, 2 * std::abs(q.value) * q.oracle};
}
Quantity q_log(const Quantity& q) { return {std::log(q.value), q.se / q.value, q.oracle / q.value}; }
Quantity q_scale(const Quantity& q, double c) { return {c * q.value, std::abs(c) * q.se, std::abs(c) * q.oracle}; }
Quantity q_add(const Quantity& a, const Quantity& b) {
  return {a.value + b.value, std::hypot(a.se, b.se), a.oracle + b.oracle};
}
Quantity q_sub(const Quantity& a, const Quantity& b) {
  return {a.value - b.value, std::hypot(a.se, b.se), a.oracle + b.oracle};
}
Quantity q_const(double v) { return {v, 0.0, 0.0}; }

CheckReport make_report(const CheckContext& ctx, const std::string& id, const std::string& where,
                        const std::string& source, const Quantity& lhs, const Quantity& rhs) {
  CheckReport r;
  r.id = id;
  r.experiment = ctx.experiment;
  r.digest = ctx.digest;
  r.where = where;
  r.source = source;
  r.lhs = lhs.value;
  r.rhs = rhs.value;
  r.stat_tol = 3.0 * std::hypot(lhs.se, rhs.se);
  r.oracle_tol = lhs.oracle + rhs.oracle;
  r.bias_tol = ctx.bias;
  return r;
}

CheckReport inconclusive(const CheckContext& ctx, const std::string& id, const std::string& where,
                         const std::string& reason) {
  CheckReport r;
  r.id = id;
  r.experiment = ctx.experiment;
  r.digest = ctx.digest;
  r.where = where;
  r.verdict = Verdict::inconclusive;
  r.reason = reason;
  return r;
}

std::string at(const std::string& f, const Vec& x, double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return "f=" + f + " x=" + describe_point(x) + " t=" + buf;
}

std::string at(const std::string& f, const Vec& x, const Vec& y, double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return "f=" + f + " x=" + describe_point(x) + " y=" + describe_point(y) + " t=" + buf;
}

const ManifoldSpec& manifold(const CheckContext& ctx) {
  if (!ctx.m) throw std::invalid_argument("check context without a manifold");
  return *ctx.m;
}

const PhiField& weight_function(const CheckContext& ctx) {
  static const PhiField one = phi_one();
  return ctx.phi ? *ctx.phi : one;
}

}  // namespace

std::unique_ptr<Semigroup> pde_semigroup(const ManifoldSpec& m, const PdeOptions& opt) {
  return std::make_unique<PdeSemigroup>(m, opt);
}
std::unique_ptr<Semigroup> spectral_semigroup(const ManifoldSpec& m, int truncation) {
  return std::make_unique<SpectralSemigroup>(m, truncation);
}
std::unique_ptr<Semigroup> mc_semigroup(const ManifoldSpec& m, const SimConfig& cfg, const RunOptions& opt,
                                        double delta) {
  return std::make_unique<McSemigroup>(m, cfg, opt, delta);
}

// ---------------------------------------------------------------- Theorem-level gradient checks

std::vector<CheckReport> verify_gradient_thm11(const CheckContext& ctx, const KField& K,
                                               const std::vector<TestFunction>& fs, const std::vector<Vec>& xs,
                                               const std::vector<double>& ts, const SimConfig& cfg,
                                               const RunOptions& opt, double delta) {
  const ManifoldSpec& m = manifold(ctx);
  const PhiField& phi = weight_function(ctx);
  std::vector<ScalarField> ff;
  for (const auto& f : fs) ff.push_back(f.f);
  SimConfig wcfg = cfg, tcfg = cfg;
  wcfg.seed = derive_seed(cfg.seed, 2);
  tcfg.seed = derive_seed(cfg.seed, 3);
  std::vector<CheckReport> out;
  for (const auto& x : xs) {
    const auto grad = estimate_grad_Pt(m, cfg, ff, x, ts, delta, opt);
    const auto W = rhs_thm_weighted(m, phi, K, ff, x, ts, wcfg, opt);
    const auto T = rhs_thm_tilted(m, phi, K, ff, x, ts, tcfg, opt);
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (std::size_t j = 0; j < ts.size(); ++j) {
        const auto& g = grad[i][j];
        const Quantity lhs{g.norm.mean(), g.norm.std_error() * (g.one_sided ? 2.0 : 1.0), 0.0};
        for (int form = 0; form < 2; ++form) {
          const McEstimate& e = form == 0 ? W[i][j] : T[i][j];
          CheckReport r = make_report(ctx, form == 0 ? "thm11.weighted" : "thm11.tilted", at(fs[i].name, x, ts[j]),
                                      "mc", lhs, {e.mean(), e.std_error(), 0.0});
          Hypotheses h = ctx.hypotheses;
          if (e.heavy_tail()) r.reason = "heavy-tail risk: max weight " + repr(e.max_weight) + " > 20 x mean";
          if (e.unreliable || g.norm.unreliable) h.failures.push_back("aborted-path fraction >= 0.1%");
          render(r, h);
          out.push_back(std::move(r));
        }
      }
  }
  return out;
}

std::vector<CheckReport> verify_gradient_negative(const CheckContext& ctx, double r_in, double r_out,
                                                  const std::vector<double>& ts, const PdeOptions& pde,
                                                  const SimConfig& cfg, const RunOptions& opt, double delta) {
  const ManifoldSpec& m = manifold(ctx);
  if (m.builtin != BuiltinKind::annulus) throw ConfigError("negative test needs the annulus");
  const Vec x = vec2(0.0, r_in);
  const auto half_r2 = [](double r) { return 0.5 / (r * r); };
  const auto u1 = annulus_mode_solver(r_in, r_out, 1, [](double) { return 1.0; }, {r_in}, ts, pde);
  const auto u0 = annulus_mode_solver(r_in, r_out, 0, half_r2, {r_in}, ts, pde);
  const auto u2 = annulus_mode_solver(r_in, r_out, 2, half_r2, {r_in}, ts, pde);

  const ScalarField f = [](const Vec& y) { return y[0] / y.norm(); };
  const ScalarField grad_f_sq = [](const Vec& y) {
    const double r2 = y.squaredNorm();
    return y[1] * y[1] / (r2 * r2);
  };
  SimConfig base = cfg;
  base.variant = DriftVariant::base;
  const auto grad = estimate_grad_Pt(m, base, {f}, x, ts, delta, opt);
  SimConfig other = base;
  other.seed = derive_seed(cfg.seed, 4);
  const auto Pg = estimate_Pt(m, other, {grad_f_sq}, x, ts, opt);

  std::vector<CheckReport> out;
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const std::string where = at("cos_mode:1", x, ts[j]);
    // P_t cos = u1 cos; at angle pi/2 the gradient is tangential with size u1 / r
    const Quantity g1{u1[j][0].value / r_in, 0.0, u1[j][0].error / r_in};
    // |grad cos|^2 = (1 - cos 2 angle) / (2 r^2) and cos(2 angle) = -1 here
    const Quantity rhs{u0[j][0].value + u2[j][0].value, 0.0, u0[j][0].error + u2[j][0].error};
    CheckReport a = make_report(ctx, "thm11.negative.oracle", where, "pde", q_square(g1), rhs);
    a.bias_tol = 0.0;
    a.negative = true;
    render(a, ctx.hypotheses);
    out.push_back(std::move(a));

    const Quantity lhs{grad[0][j].norm.mean(), grad[0][j].norm.std_error(), 0.0};
    const double pm = Pg[0][j].mean();
    const Quantity root{std::sqrt(std::max(pm, 0.0)), Pg[0][j].std_error() / (2 * std::sqrt(std::max(pm, 1e-300))), 0.0};
    CheckReport b = make_report(ctx, "thm11.negative.mc", where, "mc", lhs, root);
    b.negative = true;
    render(b, ctx.hypotheses);
    out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------- semigroup inequalities

std::vector<CheckReport> verify_cor12(const CheckContext& ctx, Semigroup& P, double K, double phi_sup,
                                      const std::vector<TestFunction>& fs, const std::vector<Vec>& xs,
                                      const std::vector<Vec>& ys, const std::vector<double>& ts) {
  const ManifoldSpec& m = manifold(ctx);
  const PhiField& phi = weight_function(ctx);
  const double s2 = phi_sup * phi_sup;
  std::vector<CheckReport> out;
  for (const auto& tf : fs) {
    const Observable g = observe(tf);
    const auto V = P.values({g, square(m, g), grad_sq(m, g, &phi), grad_sq(m, g)}, xs, ts);
    const auto G = P.gradient_norms({g}, xs, ts);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double t = ts[j];
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::string where = at(tf.name, xs[i], t);
        const Quantity Pf = V[0][j][i], Pf2 = V[1][j][i], Pphi = V[2][j][i], Pgrad = V[3][j][i];
        const Quantity grad2 = q_square(G[0][j][i]);
        const double phx = phi(xs[i]);
        CheckReport r1 = make_report(ctx, "cor12.1", where, P.source(), q_scale(grad2, phx * phx),
                                     q_scale(Pphi, std::exp(-2 * K * t)));
        render(r1, ctx.hypotheses);
        out.push_back(std::move(r1));
        CheckReport r3 = make_report(ctx, "cor12.3", where, P.source(), Pf2,
                                     q_add(q_square(Pf), q_scale(Pgrad, s2 * 2 * expm1_over(-2 * K, t))));
        render(r3, ctx.hypotheses);
        out.push_back(std::move(r3));
        CheckReport r4 = make_report(ctx, "cor12.4", where, P.source(),
                                     q_add(q_square(Pf), q_scale(grad2, 2 * expm1_over(2 * K, t) / s2)), Pf2);
        render(r4, ctx.hypotheses);
        out.push_back(std::move(r4));
      }
    }
    if (ys.empty()) continue;
    if (tf.inf_bound < 1.0) {
      out.push_back(inconclusive(ctx, "cor12.2", "f=" + tf.name, "log-Harnack needs f >= 1"));
      continue;
    }
    const auto L = P.values({log_of(g)}, ys, ts);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (ts[j] <= 0.0) continue;
      for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t k = 0; k < ys.size(); ++k) {
          const double rho = distance(m, xs[i], ys[k]);
          const double c = s2 * rho * rho / (4 * expm1_over(2 * K, ts[j]));
          CheckReport r = make_report(ctx, "cor12.2", at(tf.name, xs[i], ys[k], ts[j]), P.source(), L[0][j][k],
                                      q_add(q_log(V[0][j][i]), q_const(c)));
          render(r, ctx.hypotheses);
          out.push_back(std::move(r));
        }
    }
  }
  return out;
}

std::vector<CheckReport> verify_xi_consequences(const CheckContext& ctx, Semigroup& P, const Fn1& xi,
                                                const std::string& xi_name, const std::vector<TestFunction>& fs,
                                                const std::vector<Vec>& xs, const std::vector<Vec>& ys,
                                                const std::vector<double>& ts) {
  const ManifoldSpec& m = manifold(ctx);
  double t_max = 0.0;
  for (double t : ts) t_max = std::max(t_max, t);
  for (int k = 0; k <= 256; ++k) {
    const double v = xi(t_max * k / 256.0);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("xi must be strictly positive, got " + repr(v));
  }
  std::vector<CheckReport> out;
  for (const auto& tf : fs) {
    const Observable g = observe(tf);
    const auto V = P.values({g, square(m, g), grad_sq(m, g)}, xs, ts);
    const auto G = P.gradient_norms({g}, xs, ts);
    std::vector<std::vector<Quantity>> L;
    const bool harnack = !ys.empty() && tf.inf_bound >= 1.0;
    if (harnack) L = P.values({log_of(g)}, ys, ts)[0];
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double t = ts[j];
      const double I = t > 0 ? integrate([&](double s) { return 1.0 / xi(s); }, 0.0, t, 16, 8) : 0.0;
      const double J = t > 0 ? integrate(xi, 0.0, t, 16, 8) : 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::string where = at(tf.name, xs[i], t) + " xi=" + xi_name;
        const Quantity var = q_sub(V[1][j][i], q_square(V[0][j][i]));
        CheckReport lo = make_report(ctx, "lemma31.P1.lower", where, P.source(), q_scale(q_square(G[0][j][i]), 2 * I), var);
        render(lo, ctx.hypotheses);
        out.push_back(std::move(lo));
        CheckReport hi = make_report(ctx, "lemma31.P1.upper", where, P.source(), var, q_scale(V[2][j][i], 2 * J));
        render(hi, ctx.hypotheses);
        out.push_back(std::move(hi));
        if (!harnack || t <= 0.0) continue;
        for (std::size_t k = 0; k < ys.size(); ++k) {
          const double rho = distance(m, xs[i], ys[k]);
          CheckReport r = make_report(ctx, "lemma31.LH1", at(tf.name, xs[i], ys[k], t) + " xi=" + xi_name,
                                      P.source(), L[j][k], q_add(q_log(V[0][j][i]), q_const(rho * rho / (4 * I))));
          render(r, ctx.hypotheses);
          out.push_back(std::move(r));
        }
      }
    }
    if (!ys.empty() && !harnack)
      out.push_back(inconclusive(ctx, "lemma31.LH1", "f=" + tf.name, "log-Harnack needs f >= 1"));
  }
  return out;
}

// ---------------------------------------------------------------- functional inequalities

namespace {

bool gradient_form(const ManifoldSpec& m) { return !m.drift || static_cast<bool>(m.potential); }

}  // namespace

std::vector<CheckReport> verify_poincare(const CheckContext& ctx, double K, double phi_sup,
                                         const std::vector<TestFunction>& fs) {
  const ManifoldSpec& m = manifold(ctx);
  std::vector<CheckReport> out;
  for (const auto& tf : fs) {
    const std::string where = "f=" + tf.name;
    if (!(K > 0.0)) {
      out.push_back(inconclusive(ctx, "poincare", where, "K_phi = " + repr(K) + " <= 0 (hypothesis unmet)"));
      continue;
    }
    if (!gradient_form(m)) {
      out.push_back(inconclusive(ctx, "poincare", where, "drift is not of gradient form"));
      continue;
    }
    const MuQuadrature Q(m);
    const ScalarField f = tf.f;
    const Certified mf = Q.mean(f);
    const Certified mf2 = Q.mean([f](const Vec& x) { return f(x) * f(x); });
    const Certified mg = Q.mean([&m, f](const Vec& x) { return gradient_norm_sq(m, f, x); });
    const Quantity lhs{mf2.value - mf.value * mf.value, 0.0, mf2.error + 2 * std::abs(mf.value) * mf.error};
    const double c = phi_sup * phi_sup / K;
    CheckReport r = make_report(ctx, "poincare", where, "quadrature", lhs, {c * mg.value, 0.0, c * mg.error});
    r.bias_tol = 0.0;
    render(r, ctx.hypotheses);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CheckReport> verify_logsobolev(const CheckContext& ctx, double K, double phi_sup,
                                           const std::vector<TestFunction>& fs) {
  const ManifoldSpec& m = manifold(ctx);
  std::vector<CheckReport> out;
  for (const auto& tf : fs) {
    const std::string where = "f=" + tf.name;
    if (!(K > 0.0)) {
      out.push_back(inconclusive(ctx, "cor13.1", where, "K_phi = " + repr(K) + " <= 0 (hypothesis unmet)"));
      continue;
    }
    if (!gradient_form(m)) {
      out.push_back(inconclusive(ctx, "cor13.1", where, "drift is not of gradient form"));
      continue;
    }
    const MuQuadrature Q(m);
    const ScalarField f = tf.f;
    const Certified n2 = Q.mean([f](const Vec& x) { return f(x) * f(x); });
    if (!(n2.value > 0.0)) {
      out.push_back(inconclusive(ctx, "cor13.1", where, "mu(f^2) = 0"));
      continue;
    }
    const double s = 1.0 / std::sqrt(n2.value);
    const ScalarField g = [f, s](const Vec& x) { return s * f(x); };
    const Certified ent = Q.mean([g](const Vec& x) {
      const double v = g(x) * g(x);
      return v > 0.0 ? v * std::log(v) : 0.0;
    });
    const Certified mass = Q.mean([g](const Vec& x) { return g(x) * g(x); });
    const Certified grad = Q.mean([&m, g](const Vec& x) { return gradient_norm_sq(m, g, x); });
    const double c = 2 * std::pow(phi_sup, 6) / K;
    const Quantity rhs{mass.value * std::log(mass.value) + c * grad.value, 0.0,
                       std::abs(std::log(mass.value) + 1) * mass.error + c * grad.error};
    CheckReport r = make_report(ctx, "cor13.1", where, "quadrature", {ent.value, 0.0, ent.error}, rhs);
    r.bias_tol = 0.0;
    render(r, ctx.hypotheses);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CheckReport> verify_hwi_1d(const CheckContext& ctx, double K, double phi_sup,
                                       const std::vector<TestFunction>& fs, int grid_nodes) {
  const ManifoldSpec& m = manifold(ctx);
  if (m.dim != 1 || m.builtin != BuiltinKind::interval)
    throw ConfigError("the HWI check is restricted to 1-D built-ins");
  std::vector<CheckReport> out;
  const double L = m.builtin_params[0];
  auto weight = [&m](double x) { return m.potential ? std::exp(m.potential(vec1(x))) : 1.0; };
  // W_2(f^2 mu, mu) with f normalised, on a uniform grid of `nodes` points
  auto w2 = [&](const ScalarField& f, int nodes) {
    std::vector<double> x(nodes), a(nodes), b(nodes);
    const double dx = L / (nodes - 1);
    double sa = 0, sb = 0;
    for (int i = 0; i < nodes; ++i) {
      x[i] = i * dx;
      const double w = weight(x[i]), v = f(vec1(x[i]));
      a[i] = v * v * w;
      b[i] = w;
      const double tw = (i == 0 || i == nodes - 1) ? 0.5 * dx : dx;
      sa += tw * a[i];
      sb += tw * b[i];
    }
    for (int i = 0; i < nodes; ++i) a[i] /= sa, b[i] /= sb;
    return w2_1d(x, a, b);
  };
  for (const auto& tf : fs) {
    const std::string where = "f=" + tf.name;
    if (K > 0.0) {
      out.push_back(inconclusive(ctx, "cor13.2", where, "the HWI bound needs K_phi <= 0"));
      continue;
    }
    const MuQuadrature Q(m);
    const ScalarField f = tf.f;
    const Certified n2 = Q.mean([f](const Vec& x) { return f(x) * f(x); });
    const double s = 1.0 / std::sqrt(n2.value);
    const ScalarField g = [f, s](const Vec& x) { return s * f(x); };
    const Certified ent = Q.mean([g](const Vec& x) {
      const double v = g(x) * g(x);
      return v > 0.0 ? v * std::log(v) : 0.0;
    });
    const Certified grad = Q.mean([&m, g](const Vec& x) { return gradient_norm_sq(m, g, x); });
    const double Wc = w2(g, grid_nodes), Wf = w2(g, 2 * grid_nodes - 1);
    const double W = Wf, dW = std::abs(Wf - Wc);
    const double a = 2 * std::pow(phi_sup, 4), b = -phi_sup * phi_sup * K / 2;
    const double sg = std::sqrt(grad.value);
    const double rhs = a * sg * W + b * W * W;
    const double err = a * W * grad.error / (2 * std::max(sg, 1e-300)) * (sg > 0) + (a * sg + 2 * std::abs(b) * W) * dW;
    CheckReport r = make_report(ctx, "cor13.2", where, "quadrature", {ent.value, 0.0, ent.error}, {rhs, 0.0, err});
    r.bias_tol = 0.0;
    render(r, ctx.hypotheses);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CheckReport> verify_heat_kernel(const CheckContext& ctx, double K, double phi_sup,
                                            const std::vector<double>& xs, const std::vector<double>& ys,
                                            const std::vector<double>& ts, int intervals) {
  const ManifoldSpec& m = manifold(ctx);
  if (m.dim != 1) throw ConfigError("heat kernel bounds are checked on 1-D built-ins only");
  const HeatKernel1d H(sturm_liouville_of(m), intervals);
  const double s2 = phi_sup * phi_sup;
  std::vector<CheckReport> out;
  for (double t : ts) {
    if (!(t > 0.0)) throw ConfigError("heat kernel bounds need t > 0");
    for (double x : xs)
      for (double y : ys) {
        const double rho = distance(m, vec1(x), vec1(y));
        const std::string where = at("-", vec1(x), vec1(y), t);
        const Certified p = H.p(x, y, t);
        const double lower = std::exp(-s2 * rho * rho / (2 * expm1_over(K, t)));
        CheckReport a = make_report(ctx, "cor13.3.kernel", where, "kernel", q_const(lower), {p.value, 0.0, p.error});
        a.bias_tol = 0.0;
        render(a, ctx.hypotheses);
        out.push_back(std::move(a));
        const Certified e = H.entropy(x, y, t);
        CheckReport b = make_report(ctx, "cor13.3.entropy", where, "kernel", {e.value, 0.0, e.error},
                                    q_const(s2 * rho * rho / (4 * expm1_over(2 * K, t))));
        b.bias_tol = 0.0;
        render(b, ctx.hypotheses);
        out.push_back(std::move(b));
      }
  }
  return out;
}

// ---------------------------------------------------------------- LS1

std::vector<CheckReport> verify_semigroup_logsobolev(const CheckContext& ctx, double K, double phi_sup,
                                                     const std::vector<TestFunction>& fs,
                                                     const std::vector<Vec>& xs, const std::vector<double>& ts,
                                                     const SimConfig& cfg, const RunOptions& opt, int nodes) {
  const ManifoldSpec& m = manifold(ctx);
  const PhiField& phi = weight_function(ctx);
  if (nodes < 2) throw ConfigError("LS1 needs at least 2 time nodes");
  SimConfig base = cfg, bar = cfg;
  base.variant = DriftVariant::base;
  base.phi = &phi;
  bar.variant = DriftVariant::phi4;
  bar.phi = &phi;
  bar.seed = derive_seed(cfg.seed, 7);
  const Stepper sb(m, base), sbar(m, bar);
  std::vector<ScalarField> grads;
  for (const auto& tf : fs) {
    const ScalarField f = tf.f;
    const ManifoldSpec* mp = &m;
    grads.push_back([mp, f](const Vec& x) { return gradient_norm_sq(*mp, f, x); });
  }
  const int nf = static_cast<int>(fs.size());
  const int per_f = 2 + nodes;  // f^2 log f^2, f^2, then one channel per node
  std::vector<CheckReport> out;
  for (double t : ts) {
    std::vector<double> s(nodes);
    for (int k = 0; k < nodes; ++k) s[k] = t * k / (nodes - 1);
    for (int k = 0; k < nodes; ++k) {
      steps_for(s[k], cfg.h);
      steps_for(t - s[k], cfg.h);
    }
    for (const auto& x : xs) {
      struct Chunk {
        Moments mom;
      };
      auto chunks = run_chunks(opt.n, opt.jobs, opt.chunk, [&](std::uint64_t begin, std::uint64_t end) {
        Chunk c{Moments(nf * per_f)};
        std::vector<double> v(nf * per_f);
        for (std::uint64_t p = begin; p < end; ++p) {
          const PathRecord rec = simulate_path(sb, x, s, p);
          if (rec.aborted) continue;
          bool aborted = false;
          std::vector<Vec> ends(nodes);
          for (int k = 0; k < nodes; ++k) {
            if (k == nodes - 1) {
              ends[k] = rec.snapshots[k].x;
              continue;
            }
            const PathRecord r2 = simulate_path(sbar, rec.snapshots[k].x, {t - s[k]}, p * nodes + k);
            aborted = aborted || r2.aborted;
            ends[k] = r2.snapshots[0].x;
          }
          if (aborted) continue;
          const Vec& xt = rec.snapshots[nodes - 1].x;
          for (int i = 0; i < nf; ++i) {
            const double f2 = std::pow(fs[i].f(xt), 2);
            v[i * per_f] = f2 > 0 ? f2 * std::log(f2) : 0.0;
            v[i * per_f + 1] = f2;
            for (int k = 0; k < nodes; ++k) v[i * per_f + 2 + k] = grads[i](ends[k]);
          }
          c.mom.add(v.data());
        }
        return c;
      });
      Moments mom(nf * per_f);
      for (const auto& c : chunks) mom.merge(c.mom);
      const double n = static_cast<double>(std::max<std::uint64_t>(mom.count(), 1));
      const double ds = t / (nodes - 1);
      for (int i = 0; i < nf; ++i) {
        const std::string where = at(fs[i].name, x, t) + " nodes=" + std::to_string(nodes);
        if (!(fs[i].inf_bound > 0.0)) {
          out.push_back(inconclusive(ctx, "lemma32.LS1", where, "needs inf f^2 > 0"));
          continue;
        }
        const int b0 = i * per_f;
        const double ma = mom.mean(b0), mb = mom.mean(b0 + 1);
        // rhs = mb log mb + sum_k c_k mean_k; gradient of lhs - rhs w.r.t. the channel means
        std::vector<double> coef(per_f, 0.0);
        coef[0] = 1.0;
        coef[1] = -(std::log(mb) + 1.0);
        double integral = 0.0;
        std::vector<double> G(nodes);
        for (int k = 0; k < nodes; ++k) {
          const double tw = (k == 0 || k == nodes - 1) ? 0.5 * ds : ds;
          const double c = 4 * phi_sup * phi_sup * std::exp(-2 * K * (t - s[k]));
          G[k] = c * mom.mean(b0 + 2 + k);
          integral += tw * G[k];
          coef[2 + k] = -tw * c;
        }
        double var = 0.0;
        for (int a = 0; a < per_f; ++a)
          for (int b = 0; b < per_f; ++b) var += coef[a] * coef[b] * mom.covariance(b0 + a, b0 + b);
        const double se = std::sqrt(std::max(var, 0.0) / n);
        CheckReport r = make_report(ctx, "lemma32.LS1", where, "mc", q_const(ma), q_const(mb * std::log(mb) + integral));
        r.stat_tol = 3.0 * se;
        // trapezoid error by the end-point Euler-Maclaurin correction
        if (nodes >= 3 && t > 0)
          r.bias_tol += std::abs(ds * ds / 12.0 * ((G[nodes - 1] - G[nodes - 2]) / ds - (G[1] - G[0]) / ds));
        Hypotheses h = ctx.hypotheses;
        if (se > 0.05 * (1.0 + std::abs(r.rhs))) h.failures.push_back("nested-MC stderr above budget");
        render(r, h);
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace reflab
