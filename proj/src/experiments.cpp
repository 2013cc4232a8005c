#include "reflab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>

#include "reflab/digest.hpp"
#include "reflab/estimators.hpp"
#include "reflab/geometry.hpp"
#include "reflab/oracle.hpp"
#include "reflab/phi.hpp"
#include "reflab/test_functions.hpp"

namespace reflab {

namespace {

struct Prepared {
  ExperimentConfig c;
  ManifoldSpec m;
  PhiField phi;
  SimConfig sim;
  RunOptions opt;
  CurvatureBoundReport curvature;
  ClassDReport class_d;
  double K = 0.0;
  double phi_sup = 1.0;
  CheckContext ctx;
  std::vector<TestFunction> fs;
  std::vector<Vec> xs;  ///< chart points
  std::vector<Vec> ys;
};

ClassDOptions class_d_options(const ExperimentConfig& c, const RunFlags& flags) {
  ClassDOptions o;
  o.strict = c.strict_class_d || flags.strict_class_d;
  o.h = c.geo_h;
  return o;
}

std::unique_ptr<Prepared> prepare(const ExperimentConfig& c, const RunFlags& flags, bool hypotheses) {
  auto p = std::make_unique<Prepared>();
  p->c = c;
  p->m = build_manifold(c);
  p->phi = build_phi(c);
  p->sim = build_sim(c);
  p->opt.n = c.n;
  p->opt.jobs = flags.jobs;
  p->opt.chunk = c.chunk;
  for (const auto& name : c.functions) p->fs.push_back(make_test_function(p->m, name));
  for (const auto& x : c.points) p->xs.push_back(p->m.from_natural(x));
  for (const auto& y : c.ys) p->ys.push_back(p->m.from_natural(y));
  for (const auto& x : p->xs)
    if (!p->m.inside(x)) throw ConfigError("field 'points': " + describe_point(x) + " is outside M");
  for (const auto& y : p->ys)
    if (!p->m.inside(y)) throw ConfigError("field 'ys': " + describe_point(y) + " is outside M");
  p->ctx.m = &p->m;
  p->ctx.phi = &p->phi;
  p->ctx.experiment = c.label;
  p->ctx.digest = c.digest();
  p->ctx.bias = c.bias;
  if (hypotheses) {
    p->curvature = curvature_lower_bound(p->m, p->phi, c.p, c.per_axis, c.geo_h);
    p->class_d = class_D_check(p->m, p->phi, class_d_options(c, flags));
    p->K = c.K == "auto" ? p->curvature.K : std::stod(c.K);
    p->phi_sup = phi_sup(p->m, p->phi);
    p->ctx.hypotheses = check_hypotheses(p->K, p->curvature, p->class_d);
  }
  return p;
}

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string point_text(const Vec& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) s += (i ? " " : "") + repr(x[i]);
  return s;
}

struct Emitter {
  ExperimentResult& r;
  double h = 0.0;

  void row(const std::string& estimator, const std::string& x, std::optional<double> t, double mean, double se,
           std::uint64_t n) {
    r.rows.push_back({r.label, estimator, x, t, mean, se, n, h, r.seed, r.digest});
  }
  void estimate(const std::string& estimator, const std::string& x, double t, const McEstimate& e) {
    row(estimator, x, t, e.mean(), e.std_error(), e.n);
  }
};

std::vector<double> chart_coordinates(const std::vector<Vec>& ps) {
  std::vector<double> out;
  for (const auto& p : ps) out.push_back(p[0]);
  return out;
}

Fn1 parse_xi(const std::string& s) {
  const auto colon = s.find(':');
  const double a = std::stod(s.substr(colon + 1));
  if (s.rfind("exp:", 0) == 0) return [a](double t) { return std::exp(a * t); };
  return [a](double) { return a; };
}

void count_reports(ExperimentResult& r) {
  int holds = 0, violated = 0, inconclusive = 0;
  for (const auto& rep : r.reports) {
    switch (rep.verdict) {
      case Verdict::holds: ++holds; break;
      case Verdict::violated: ++violated; break;
      case Verdict::inconclusive: ++inconclusive; break;
    }
    if (rep.negative ? rep.verdict != Verdict::violated : rep.verdict == Verdict::violated) ++r.failures;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d HOLDS, %d VIOLATED, %d INCONCLUSIVE", holds, violated, inconclusive);
  r.summary = buf;
}

std::unique_ptr<Semigroup> make_semigroup(const Prepared& p) {
  const auto& c = p.c;
  if (c.oracle == "pde") return pde_semigroup(p.m, build_pde(c));
  if (c.oracle == "spectral") return spectral_semigroup(p.m, c.truncation);
  return mc_semigroup(p.m, p.sim, p.opt, c.delta);
}

// an independent reference for P_t f where one exists
std::unique_ptr<Semigroup> reference_for(const Prepared& p) {
  if (p.m.builtin == BuiltinKind::interval)
    return pde_semigroup(p.m, build_pde(p.c));
  if (p.m.family == "sphere") {
    for (const auto& f : p.fs)
      if (!f.zonal) return nullptr;
    return spectral_semigroup(p.m, p.c.truncation);
  }
  return nullptr;
}

void run_geometry(const ExperimentConfig& c, ExperimentResult& r) {
  const ManifoldSpec m = build_manifold(c);
  Emitter out{r, c.geo_h};
  std::vector<TestFunction> fs;
  for (const auto& name : c.functions) fs.push_back(make_test_function(m, name));
  std::vector<Vec> xs;
  for (const auto& x : c.points) xs.push_back(m.from_natural(x));
  if (xs.empty()) xs = interior_grid(m, c.per_axis, 0.05 * m.chart.diameter() / c.per_axis);
  double worst = 0.0;
  int bad = 0;
  for (const auto& f : fs)
    for (const auto& x : xs) {
      const Gamma2 g = gamma2_check(m, f.f, x, c.geo_h);
      const double rel = std::abs(g.lhs - g.rhs) / (1 + std::abs(g.rhs));
      worst = std::max(worst, rel);
      bad += rel > 1e-4;
      out.row("gamma2.lhs:" + f.name, point_text(x), std::nullopt, g.lhs, 0.0, 1);
      out.row("gamma2.rhs:" + f.name, point_text(x), std::nullopt, g.rhs, 0.0, 1);
    }

  // closed-form catalog
  double ric = std::nan(""), ii = std::nan("");
  double ric_err = 0.0, ii_err = 0.0;
  std::function<double(const Vec&)> ii_exact;
  if (m.family == "sphere") {
    ric = 1.0 / (c.radius * c.radius);
    ii = 0.0;
  } else if (m.builtin == BuiltinKind::disk) {
    ric = 0.0;
    ii = 1.0 / c.radius;
  } else if (m.builtin == BuiltinKind::annulus) {
    ric = 0.0;
    const double mid = 0.5 * (c.r_in + c.r_out);
    ii_exact = [&c, mid](const Vec& x) { return x.norm() < mid ? -1.0 / c.r_in : 1.0 / c.r_out; };
  } else if (m.dim == 1) {
    ric = 0.0;
    ii = 0.0;
  }
  if (!std::isnan(ii) && !ii_exact) ii_exact = [ii](const Vec&) { return ii; };
  if (!std::isnan(ric)) {
    for (const auto& x : xs) {
      Vec X = Vec::Ones(m.dim);
      X /= norm(m, x, X);
      const double v = ricci(m, x, X, c.geo_h);
      ric_err = std::max(ric_err, std::abs(v - ric));
      out.row("ricci", point_text(x), std::nullopt, v, 0.0, 1);
    }
  }
  if (ii_exact) {
    for (const auto& x : sample_boundary(m, 16)) {
      const Vec N = inward_normal(m, x, c.geo_h);
      const Vec T = m.dim == 1 ? Vec(Vec::Zero(1)) : unit_tangent(m, x, N);
      const double v = m.dim == 1 ? 0.0 : second_fundamental_form(m, x, T, T, c.geo_h);
      ii_err = std::max(ii_err, std::abs(v - ii_exact(x)));
      out.row("second_fundamental_form", point_text(x), std::nullopt, v, 0.0, 1);
    }
  }
  const bool catalog_ok = ric_err <= 1e-3 && ii_err <= 1e-3;
  r.failures = bad + (catalog_ok ? 0 : 1);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu points, max gamma2 residual %.3g, catalog |Ric| err %.3g, |II| err %.3g",
                xs.size() * fs.size(), worst, ric_err, ii_err);
  r.summary = buf;
}

void run_class_d(const ExperimentConfig& c, const RunFlags& flags, ExperimentResult& r) {
  const ManifoldSpec m = build_manifold(c);
  const PhiField phi = build_phi(c);
  const ClassDReport rep = class_D_check(m, phi, class_d_options(c, flags));
  Emitter out{r, c.geo_h};
  out.row("inf_phi", point_text(rep.inf_point), std::nullopt, rep.inf_phi, 0.0, rep.interior_samples);
  out.row("max_abs_N_phi", "", std::nullopt, rep.max_abs_N_phi, 0.0, rep.boundary_samples);
  out.row("min_convexity", point_text(rep.min_convexity_point), std::nullopt, rep.min_convexity, 0.0,
          rep.boundary_samples);
  const bool pass = rep.passed();
  r.failures = pass == c.negative ? 1 : 0;
  r.summary = std::string(pass ? "class D: pass" : "class D: fail") + " (inf " + to_string(rep.inf_status) +
              ", N phi " + to_string(rep.normal_status) + ", convexity " + to_string(rep.convexity_status) +
              ") report " + rep.digest() + (c.negative ? ", expected to fail" : "");
}

void run_curvature(const ExperimentConfig& c, ExperimentResult& r) {
  const ManifoldSpec m = build_manifold(c);
  const PhiField phi = build_phi(c);
  const auto rep = curvature_lower_bound(m, phi, c.p, c.per_axis, c.geo_h);
  Emitter out{r, c.geo_h};
  out.row("raw_min", point_text(rep.argmin), std::nullopt, rep.raw_min, 0.0, rep.points.size());
  out.row("margin", "", std::nullopt, rep.margin, 0.0, rep.points.size());
  out.row("K", "", std::nullopt, rep.K, 0.0, rep.points.size());
  out.row("phi_sup", "", std::nullopt, phi_sup(m, phi), 0.0, 0);
  r.summary = "K = " + repr(rep.K) + " (p = " + std::to_string(c.p) + ", report " + rep.digest() + ")";
}

void run_simulate(const ExperimentConfig& c, const RunFlags& flags, ExperimentResult& r) {
  auto p = prepare(c, flags, false);
  Emitter out{r, c.h};
  std::vector<ScalarField> fs;
  for (const auto& f : p->fs) fs.push_back(f.f);
  std::ofstream dump;
  if (!flags.dump_dir.empty()) {
    dump.open(flags.dump_dir + "/paths_" + c.label + ".csv");
    if (!dump) throw ConfigError("cannot write path dump in '" + flags.dump_dir + "'");
    write_path_dump_header(dump, p->m.dim);
  }
  auto reference = reference_for(*p);
  Semigroup::Table ref;
  if (reference) {
    std::vector<Observable> obs;
    for (const auto& f : p->fs) obs.push_back(observe(f));
    ref = reference->values(obs, p->xs, c.times);
  }
  double worst_z = 0.0;
  for (std::size_t i = 0; i < p->xs.size(); ++i) {
    const std::string xt = point_text(c.points[i]);
    RunOptions opt = p->opt;
    if (dump.is_open()) opt.dump = [&dump](const PathRecord& rec) { write_path_dump_records(dump, rec); };
    const auto table = estimate_Pt(p->m, p->sim, fs, p->xs[i], c.times, opt);
    EstimateTable fine;
    if (flags.richardson) {
      SimConfig half = p->sim;
      half.h = c.h / 2;
      fine = estimate_Pt(p->m, half, fs, p->xs[i], c.times, p->opt);
    }
    for (std::size_t k = 0; k < fs.size(); ++k)
      for (std::size_t j = 0; j < c.times.size(); ++j) {
        const auto& e = table[k][j];
        out.estimate("P_t:" + p->fs[k].name, xt, c.times[j], e);
        if (flags.richardson) {
          out.estimate("P_t.half_step:" + p->fs[k].name, xt, c.times[j], fine[k][j]);
          out.estimate("P_t.richardson:" + p->fs[k].name, xt, c.times[j], richardson(e, fine[k][j], 0.5));
        }
        if (reference) {
          const Quantity& q = ref[k][j][i];
          out.row(std::string("reference.") + reference->source() + ":" + p->fs[k].name, xt, c.times[j], q.value,
                  q.oracle, 0);
          const double se = std::max(e.std_error(), 1e-300);
          worst_z = std::max(worst_z, std::abs(e.mean() - q.value) / se);
        }
      }
  }
  r.summary = std::to_string(p->xs.size() * c.times.size() * fs.size()) + " estimates";
  if (reference) r.summary += ", max |MC - reference| / stderr = " + brief(worst_z);
}

void run_local_time(const ExperimentConfig& c, const RunFlags& flags, ExperimentResult& r) {
  auto p = prepare(c, flags, false);
  if (p->xs.empty()) p->xs.push_back(p->m.zero_vector());
  Emitter out{r, c.h};
  std::string table = "x,t,local_time,stderr,reference,ratio\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < p->xs.size(); ++i) {
    const std::string xt = point_text(p->m.to_natural(p->xs[i]));
    const bool on_boundary = p->m.boundary(p->xs[i]) <= p->m.boundary_tolerance();
    const auto est = local_time_mean(p->m, p->sim, p->xs[i], c.times, c.exit_radius, p->opt);
    std::vector<McEstimate> fine;
    if (flags.richardson) {
      SimConfig half = p->sim;
      half.h = c.h / 2;
      fine = local_time_mean(p->m, half, p->xs[i], c.times, c.exit_radius, p->opt);
    }
    for (std::size_t j = 0; j < c.times.size(); ++j) {
      const double t = c.times[j];
      const double ref = 2 * std::sqrt(t / std::numbers::pi);
      McEstimate e = est[j];
      out.estimate("local_time", xt, t, e);
      if (flags.richardson) {
        out.estimate("local_time.half_step", xt, t, fine[j]);
        e = richardson(est[j], fine[j], 0.5);
        out.estimate("local_time.richardson", xt, t, e);
      }
      const double ratio = ref > 0 ? e.mean() / ref : std::nan("");
      out.row("reference:2sqrt(t/pi)", xt, t, ref, 0.0, 0);
      out.row("ratio", xt, t, ratio, ref > 0 ? e.std_error() / ref : 0.0, e.n);
      if (ref > 0 && on_boundary) worst = std::max(worst, std::abs(ratio - 1));
      table += xt + "," + repr(t) + "," + repr(e.mean()) + "," + repr(e.std_error()) + "," + repr(ref) + "," +
               repr(ratio) + "\n";
    }
  }
  r.files.emplace_back("local_time_" + c.label + ".csv", table);
  r.summary = "max |ratio - 1| from boundary starts = " + brief(worst);
}

void run_girsanov(const ExperimentConfig& c, const RunFlags& flags, ExperimentResult& r) {
  auto p = prepare(c, flags, false);
  if (p->fs.empty() || p->xs.empty()) throw ConfigError("girsanov-test needs 'functions' and 'points'");
  Emitter out{r, c.h};
  static const char* names[] = {"terminal", "integral", "survival"};
  double worst = 0.0;
  for (std::size_t i = 0; i < p->xs.size(); ++i) {
    const std::string xt = point_text(c.points[i]);
    for (double t : c.times) {
      const auto g = girsanov_test(p->m, p->phi, p->fs[0].f, p->xs[i], t, c.exit_radius, p->sim, p->opt);
      for (std::size_t k = 0; k < g.weighted.size(); ++k) {
        out.estimate(std::string("weighted:") + names[k], xt, t, g.weighted[k]);
        out.estimate(std::string("tilted:") + names[k], xt, t, g.tilted[k]);
        const double z = std::abs(g.weighted[k].mean() - g.tilted[k].mean()) /
                         std::max(combined_std_error(g.weighted[k], g.tilted[k]), 1e-300);
        worst = std::max(worst, z);
        r.failures += z > 3;
      }
      out.estimate("mean_weight", xt, t, g.mean_weight);
      const double z = std::abs(g.mean_weight.mean() - 1) / std::max(g.mean_weight.std_error(), 1e-300);
      worst = std::max(worst, z);
      r.failures += z > 3;
    }
  }
  r.summary = "max z = " + brief(worst) + " (threshold 3)";
}

void run_verify(const ExperimentConfig& c, const std::string& kind, const RunFlags& flags, ExperimentResult& r) {
  auto p = prepare(c, flags, true);
  const auto& ctx = p->ctx;
  if (kind == "verify-thm11") {
    if (c.negative) {
      if (p->m.builtin != BuiltinKind::annulus) throw ConfigError("negative verify-thm11 needs manifold = annulus");
      r.reports = verify_gradient_negative(ctx, c.r_in, c.r_out, c.times, build_pde(c), p->sim, p->opt, c.delta);
    } else {
      r.reports = verify_gradient_thm11(ctx, KField{p->K, {}}, p->fs, p->xs, c.times, p->sim, p->opt, c.delta);
    }
  } else if (kind == "verify-cor12") {
    auto P = make_semigroup(*p);
    r.reports = verify_cor12(ctx, *P, p->K, p->phi_sup, p->fs, p->xs, p->ys, c.times);
  } else if (kind == "verify-xi") {
    auto P = make_semigroup(*p);
    r.reports = verify_xi_consequences(ctx, *P, parse_xi(c.xi), c.xi, p->fs, p->xs, p->ys, c.times);
  } else if (kind == "verify-poincare") {
    r.reports = verify_poincare(ctx, p->K, p->phi_sup, p->fs);
  } else if (kind == "verify-logsobolev") {
    r.reports = verify_logsobolev(ctx, p->K, p->phi_sup, p->fs);
  } else if (kind == "verify-hwi") {
    r.reports = verify_hwi_1d(ctx, p->K, p->phi_sup, p->fs, c.hwi_nodes);
  } else if (kind == "verify-kernel") {
    r.reports = verify_heat_kernel(ctx, p->K, p->phi_sup, chart_coordinates(p->xs), chart_coordinates(p->ys), c.times,
                                   c.kernel_intervals);
  } else if (kind == "verify-ls1") {
    r.reports = verify_semigroup_logsobolev(ctx, p->K, p->phi_sup, p->fs, p->xs, c.times, p->sim, p->opt,
                                            c.ls1_nodes);
  }
  Emitter out{r, c.h};
  for (const auto& rep : r.reports) {
    out.row(rep.id + ".lhs", rep.where, std::nullopt, rep.lhs, rep.stat_tol / 3, 0);
    out.row(rep.id + ".rhs", rep.where, std::nullopt, rep.rhs, rep.oracle_tol, 0);
  }
  count_reports(r);
  r.summary += ", K = " + brief(p->K);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

ExperimentResult run_experiment(ExperimentConfig c, const std::string& kind, const RunFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  if (flags.seed) c.seed = *flags.seed;
  if (c.kind.empty()) c.kind = kind;
  ExperimentResult r;
  r.label = c.label;
  r.kind = kind;
  r.digest = c.digest();
  r.seed = c.seed;
  if (kind == "geometry-check") run_geometry(c, r);
  else if (kind == "class-d") run_class_d(c, flags, r);
  else if (kind == "curvature-bound") run_curvature(c, r);
  else if (kind == "simulate") run_simulate(c, flags, r);
  else if (kind == "local-time") run_local_time(c, flags, r);
  else if (kind == "girsanov-test") run_girsanov(c, flags, r);
  else if (kind.rfind("verify-", 0) == 0) run_verify(c, kind, flags, r);
  else throw ConfigError("unknown subcommand '" + kind + "'");
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<ExperimentConfig> select(const SuiteConfig& suite, const std::string& subcommand) {
  std::vector<ExperimentConfig> out;
  for (const auto& c : suite.experiments) {
    if (subcommand == "all" ? !c.kind.empty() : (c.kind == subcommand || c.kind.empty())) out.push_back(c);
  }
  if (out.empty()) throw ConfigError("no experiment section for '" + subcommand + "'");
  return out;
}

std::string results_csv(const std::vector<ExperimentResult>& results) {
  std::string s = "experiment,estimator,x,t,mean,stderr,n,h,seed,digest\n";
  for (const auto& r : results)
    for (const auto& row : r.rows) {
      s += csv_field(row.experiment) + "," + csv_field(row.estimator) + "," + csv_field(row.x) + "," +
           (row.t ? repr(*row.t) : "") + "," + repr(row.mean) + "," + repr(row.stderr_) + "," +
           std::to_string(row.n) + "," + repr(row.h) + "," + std::to_string(row.seed) + "," + row.digest + "\n";
    }
  return s;
}

std::string reports_jsonl(const std::vector<ExperimentResult>& results) {
  std::string s;
  for (const auto& r : results)
    for (const auto& rep : r.reports) s += rep.to_json() + "\n";
  return s;
}

}  // namespace reflab
