#include "reflab/estimators.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "reflab/parallel.hpp"

namespace reflab {

namespace {

struct ChunkResult {
  Moments moments;
  std::uint64_t attempted = 0, aborted = 0;
  std::vector<PathRecord> dumped;
};

double grad_norm(const ManifoldSpec& m, const ScalarField& f, const Vec& x) {
  return std::sqrt(std::max(0.0, gradient_norm_sq(m, f, x)));
}

}  // namespace

McEstimate McRun::estimate(int channel) const {
  McEstimate e = moments.estimate(channel);
  e.seed = seed;
  e.wall_seconds = wall_seconds;
  e.unreliable = unreliable();
  return e;
}

double combined_std_error(const McEstimate& a, const McEstimate& b) {
  return std::hypot(a.std_error(), b.std_error());
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

McRun run_plan(const McPlan& plan, const RunOptions& opt) {
  if (plan.steppers.empty() || plan.steppers.size() != plan.starts.size())
    throw std::invalid_argument("run_plan: one start per leg required");
  const auto t0 = std::chrono::steady_clock::now();
  const bool dumping = static_cast<bool>(opt.dump);
  auto chunks = run_chunks(opt.n, opt.jobs, opt.chunk, [&](std::uint64_t begin, std::uint64_t end) {
    ChunkResult r;
    r.moments = Moments(plan.channels);
    std::vector<PathRecord> legs(plan.steppers.size());
    std::vector<double> values(plan.channels);
    for (std::uint64_t p = begin; p < end; ++p) {
      bool aborted = false;
      for (std::size_t k = 0; k < legs.size(); ++k) {
        legs[k] = simulate_path(*plan.steppers[k], plan.starts[k], plan.times, p);
        aborted = aborted || legs[k].aborted;
      }
      ++r.attempted;
      if (dumping) r.dumped.push_back(legs[0]);
      if (aborted) {
        ++r.aborted;
        continue;
      }
      plan.evaluate(legs, values.data());
      r.moments.add(values.data());
    }
    return r;
  });
  McRun run;
  run.moments = Moments(plan.channels);
  for (const auto& c : chunks) {
    run.moments.merge(c.moments);
    run.attempted += c.attempted;
    run.aborted += c.aborted;
    if (dumping)
      for (const auto& rec : c.dumped) opt.dump(rec);
  }
  run.seed = plan.steppers.front()->config().seed;
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

EstimateTable estimate_Pt(const ManifoldSpec& m, const SimConfig& cfg, const std::vector<ScalarField>& fs,
                          const Vec& x, const std::vector<double>& ts, const RunOptions& opt) {
  const Stepper stepper(m, cfg);
  const int nf = static_cast<int>(fs.size()), nt = static_cast<int>(ts.size());
  McPlan plan;
  plan.steppers = {&stepper};
  plan.starts = {x};
  plan.times = ts;
  plan.channels = nf * nt;
  plan.evaluate = [&](const std::vector<PathRecord>& legs, double* out) {
    for (int j = 0; j < nt; ++j)
      for (int i = 0; i < nf; ++i) out[i * nt + j] = fs[i](legs[0].snapshots[j].x);
  };
  const McRun run = run_plan(plan, opt);
  EstimateTable table(nf, std::vector<McEstimate>(nt));
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nt; ++j) table[i][j] = run.estimate(i * nt + j);
  return table;
}

McEstimate estimate_Pt(const ManifoldSpec& m, const SimConfig& cfg, const ScalarField& f, const Vec& x, double t,
                       const RunOptions& opt) {
  return estimate_Pt(m, cfg, std::vector<ScalarField>{f}, x, std::vector<double>{t}, opt)[0][0];
}

std::vector<std::vector<GradEstimate>> estimate_grad_Pt(const ManifoldSpec& m, const SimConfig& cfg,
                                                        const std::vector<ScalarField>& fs, const Vec& x,
                                                        const std::vector<double>& ts, double delta,
                                                        const RunOptions& opt) {
  if (!(delta > 0.0)) throw std::invalid_argument("gradient step must be positive");
  const int d = m.dim;
  const bool on_boundary = std::abs(m.boundary(x)) <= m.boundary_tolerance();

  // directions with their two evaluation points and divisor
  struct Direction {
    Vec plus, minus;
    double span;
  };
  std::vector<Direction> dirs;
  bool one_sided = false;
  Mat ginv;
  if (on_boundary) {
    if (d == 1) throw std::invalid_argument("gradient at a 1-D boundary point is zero by the Neumann condition");
    const Vec T = unit_tangent(m, x, inward_normal(m, x));
    auto onto = [&](Vec y) { return m.boundary(y) < 0.0 ? project_to_boundary(m, y).point : y; };
    dirs.push_back({onto(x + delta * T), onto(x - delta * T), 2.0 * delta});
    ginv = Mat::Identity(1, 1);  // derivative along a g-unit vector
  } else {
    ginv = metric_inverse_at(m, x);
    for (int i = 0; i < d; ++i) {
      const Vec e = Vec::Unit(d, i) * delta;
      const bool up = m.boundary(x + e) >= 0.0, down = m.boundary(x - e) >= 0.0;
      if (up && down) dirs.push_back({x + e, x - e, 2.0 * delta});
      else if (up) dirs.push_back({x + e, x, delta});
      else if (down) dirs.push_back({x, x - e, delta});
      else throw std::invalid_argument("gradient stencil leaves M on both sides");
      one_sided = one_sided || !(up && down);
    }
  }
  const int nd = static_cast<int>(dirs.size());

  const Stepper stepper(m, cfg);
  McPlan plan;
  for (const auto& dir : dirs) {
    plan.steppers.push_back(&stepper);
    plan.starts.push_back(dir.plus);
    plan.steppers.push_back(&stepper);
    plan.starts.push_back(dir.minus);
  }
  plan.times = ts;
  const int nf = static_cast<int>(fs.size()), nt = static_cast<int>(ts.size());
  plan.channels = nf * nt * nd;
  plan.evaluate = [&](const std::vector<PathRecord>& legs, double* out) {
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nt; ++j)
        for (int k = 0; k < nd; ++k) {
          const double fp = fs[i](legs[2 * k].snapshots[j].x);
          const double fm = fs[i](legs[2 * k + 1].snapshots[j].x);
          out[(i * nt + j) * nd + k] = (fp - fm) / dirs[k].span;
        }
  };
  const McRun run = run_plan(plan, opt);

  std::vector<std::vector<GradEstimate>> out(nf, std::vector<GradEstimate>(nt));
  const double n = static_cast<double>(run.moments.count());
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nt; ++j) {
      const int base = (i * nt + j) * nd;
      Vec D(nd);
      Mat S(nd, nd);
      for (int a = 0; a < nd; ++a) {
        D[a] = run.moments.mean(base + a);
        for (int b = 0; b < nd; ++b) S(a, b) = run.moments.covariance(base + a, base + b) / std::max(1.0, n);
      }
      const double sq = D.dot(ginv * D);
      const double nrm = std::sqrt(sq);
      const double floor = (ginv * S).trace();
      double se;
      if (nrm > 10.0 * std::sqrt(floor)) {
        const Vec a = ginv * D / nrm;
        se = std::sqrt(std::max(0.0, a.dot(S * a)));
      } else {
        se = std::sqrt(std::max(0.0, floor));
      }
      GradEstimate g;
      g.norm = McEstimate::from_mean_se(nrm, se, run.moments.count());
      g.norm_sq = McEstimate::from_mean_se(sq - floor, 2.0 * nrm * se + floor, run.moments.count());
      for (auto* e : {&g.norm, &g.norm_sq}) {
        e->seed = run.seed;
        e->wall_seconds = run.wall_seconds;
        e->unreliable = run.unreliable();
      }
      g.one_sided = one_sided;
      g.tangential = on_boundary;
      out[i][j] = g;
    }
  return out;
}

namespace {

EstimateTable weighted_table(const McRun& run, int nf, int nt) {
  // channel layout: [f][t] values, then one weight channel per t
  EstimateTable table(nf, std::vector<McEstimate>(nt));
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nt; ++j) {
      McEstimate e = run.estimate(i * nt + j);
      const int w = nf * nt + j;
      e.max_weight = run.moments.max(w);
      e.mean_weight = run.moments.mean(w);
      table[i][j] = e;
    }
  return table;
}

}  // namespace

EstimateTable rhs_thm_weighted(const ManifoldSpec& m, const PhiField& phi, const KField& K,
                               const std::vector<ScalarField>& fs, const Vec& x, const std::vector<double>& ts,
                               const SimConfig& cfg_in, const RunOptions& opt) {
  SimConfig cfg = cfg_in;
  cfg.variant = DriftVariant::base;
  cfg.phi = &phi;
  cfg.stoch_field = nullptr;
  cfg.tilt_field = nullptr;
  cfg.integrands.clear();
  const bool field_weight = !phi.constant || K.field;
  if (!phi.constant) {
    const double h = cfg.geo_step;
    cfg.stoch_field = [&m, &phi, h](const Vec& y) { return grad_log_phi(m, phi, y, h); };
  }
  if (field_weight) {
    const double h = cfg.geo_step;
    cfg.integrands.push_back([&m, &phi, &K, h](const Vec& y) { return K.at(y) + grad_log_phi_sq(m, phi, y, h); });
  }
  const Stepper stepper(m, cfg);
  const int nf = static_cast<int>(fs.size()), nt = static_cast<int>(ts.size());
  const double phi_x = phi(x);
  McPlan plan;
  plan.steppers = {&stepper};
  plan.starts = {x};
  plan.times = ts;
  plan.channels = nf * nt + nt;
  plan.evaluate = [&](const std::vector<PathRecord>& legs, double* out) {
    for (int j = 0; j < nt; ++j) {
      const Snapshot& s = legs[0].snapshots[j];
      const double expo = field_weight ? -std::sqrt(2.0) * s.stoch_integral - s.integrals[0] : -K.constant * s.t;
      const double w = std::exp(expo);
      const double ratio = phi(s.x) / phi_x;
      for (int i = 0; i < nf; ++i) out[i * nt + j] = ratio * grad_norm(m, fs[i], s.x) * w;
      out[nf * nt + j] = w;
    }
  };
  return weighted_table(run_plan(plan, opt), nf, nt);
}

EstimateTable rhs_thm_tilted(const ManifoldSpec& m, const PhiField& phi, const KField& K,
                             const std::vector<ScalarField>& fs, const Vec& x, const std::vector<double>& ts,
                             const SimConfig& cfg_in, const RunOptions& opt) {
  SimConfig cfg = cfg_in;
  cfg.variant = DriftVariant::phi;
  cfg.phi = &phi;
  cfg.stoch_field = nullptr;
  cfg.tilt_field = nullptr;
  cfg.integrands.clear();
  if (K.field) cfg.integrands.push_back([&K](const Vec& y) { return K.at(y); });
  const Stepper stepper(m, cfg);
  const int nf = static_cast<int>(fs.size()), nt = static_cast<int>(ts.size());
  const double phi_x = phi(x);
  McPlan plan;
  plan.steppers = {&stepper};
  plan.starts = {x};
  plan.times = ts;
  plan.channels = nf * nt + nt;
  plan.evaluate = [&](const std::vector<PathRecord>& legs, double* out) {
    for (int j = 0; j < nt; ++j) {
      const Snapshot& s = legs[0].snapshots[j];
      const double w = std::exp(K.field ? -s.integrals[0] : -K.constant * s.t);
      const double ratio = phi(s.x) / phi_x;
      for (int i = 0; i < nf; ++i) out[i * nt + j] = ratio * grad_norm(m, fs[i], s.x) * w;
      out[nf * nt + j] = w;
    }
  };
  return weighted_table(run_plan(plan, opt), nf, nt);
}

std::vector<McEstimate> local_time_mean(const ManifoldSpec& m, const SimConfig& cfg_in, const Vec& x,
                                        const std::vector<double>& ts, double radius, const RunOptions& opt) {
  SimConfig cfg = cfg_in;
  cfg.exit_radii = {radius > 0.0 ? radius : 0.5 * m.chart.diameter()};
  const Stepper stepper(m, cfg);
  const int nt = static_cast<int>(ts.size());
  McPlan plan;
  plan.steppers = {&stepper};
  plan.starts = {x};
  plan.times = ts;
  plan.channels = nt;
  plan.evaluate = [&](const std::vector<PathRecord>& legs, double* out) {
    for (int j = 0; j < nt; ++j) out[j] = legs[0].snapshots[j].stopped_local_time(0);
  };
  const McRun run = run_plan(plan, opt);
  std::vector<McEstimate> out;
  for (int j = 0; j < nt; ++j) out.push_back(run.estimate(j));
  return out;
}

GirsanovComparison girsanov_test(const ManifoldSpec& m, const PhiField& phi, const ScalarField& f, const Vec& x,
                                 double t, double radius, const SimConfig& cfg_in, const RunOptions& opt) {
  const double h = cfg_in.geo_step;
  SimConfig base = cfg_in;
  base.variant = DriftVariant::base;
  base.phi = &phi;
  base.stoch_field = nullptr;
  base.integrands = {f};
  base.exit_radii = {radius};
  if (!phi.constant)
    base.tilt_field = [&m, &phi, h](const Vec& y) { return Vec(-std::sqrt(2.0) * grad_log_phi(m, phi, y, h)); };
  else
    base.tilt_field = nullptr;
  SimConfig tilt = base;
  tilt.variant = DriftVariant::phi;
  tilt.tilt_field = nullptr;
  tilt.seed = derive_seed(cfg_in.seed, 1);

  const Stepper sb(m, base), st(m, tilt);
  GirsanovComparison out;

  McPlan pw;
  pw.steppers = {&sb};
  pw.starts = {x};
  pw.times = {t};
  pw.channels = 4;
  pw.evaluate = [&](const std::vector<PathRecord>& legs, double* o) {
    const Snapshot& s = legs[0].snapshots[0];
    const double R = std::exp(s.log_weight);
    o[0] = f(s.x) * R;
    o[1] = s.integrals[0] * R;
    o[2] = (s.survived(0) ? 1.0 : 0.0) * R;
    o[3] = R;
  };
  const McRun rw = run_plan(pw, opt);
  for (int k = 0; k < 3; ++k) out.weighted.push_back(rw.estimate(k));
  out.mean_weight = rw.estimate(3);
  out.mean_weight.max_weight = rw.moments.max(3);
  out.mean_weight.mean_weight = rw.moments.mean(3);

  McPlan pt = pw;
  pt.steppers = {&st};
  pt.channels = 3;
  pt.evaluate = [&](const std::vector<PathRecord>& legs, double* o) {
    const Snapshot& s = legs[0].snapshots[0];
    o[0] = f(s.x);
    o[1] = s.integrals[0];
    o[2] = s.survived(0) ? 1.0 : 0.0;
  };
  const McRun rt = run_plan(pt, opt);
  for (int k = 0; k < 3; ++k) out.tilted.push_back(rt.estimate(k));
  return out;
}

McEstimate richardson(const McEstimate& coarse, const McEstimate& fine, double order) {
  const double r = std::pow(2.0, order);
  const double mean = (r * fine.mean() - coarse.mean()) / (r - 1.0);
  const double se = std::hypot(r * fine.std_error(), coarse.std_error()) / (r - 1.0);
  McEstimate e = McEstimate::from_mean_se(mean, se, std::min(coarse.n, fine.n));
  e.seed = fine.seed;
  e.wall_seconds = coarse.wall_seconds + fine.wall_seconds;
  e.unreliable = coarse.unreliable || fine.unreliable;
  return e;
}

}  // namespace reflab
