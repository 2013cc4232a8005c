#include "reflab/sampler.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace reflab {

const char* to_string(DriftVariant v) {
  switch (v) {
    case DriftVariant::base: return "base";
    case DriftVariant::phi: return "phi";
    case DriftVariant::phi4: return "phi4";
  }
  return "?";
}

DriftVariant parse_drift_variant(const std::string& s) {
  if (s == "base") return DriftVariant::base;
  if (s == "phi") return DriftVariant::phi;
  if (s == "phi4") return DriftVariant::phi4;
  throw ConfigError("unknown drift variant '" + s + "' (expected base, phi or phi4)");
}

std::uint64_t steps_for(double t, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  if (t < 0.0) throw std::invalid_argument("negative time");
  const double q = t / h;
  const double n = std::round(q);
  if (std::abs(q - n) > 1e-6) throw std::invalid_argument("time " + std::to_string(t) + " is not a multiple of h");
  return static_cast<std::uint64_t>(n);
}

double girsanov_logweight_update(double log_weight, const Vec& tilt, const Mat& g, const Mat& frame, const Vec& gauss,
                                 double h) {
  const Vec gz = g * tilt;
  return log_weight + gz.dot(frame * gauss) * std::sqrt(h) - 0.5 * tilt.dot(gz) * h;
}

Stepper::Stepper(const ManifoldSpec& m, const SimConfig& cfg)
    : m_(m), cfg_(cfg), d_(m.dim), sqrt_h_(std::sqrt(cfg.h)), has_drift_(static_cast<bool>(m.drift)) {
  if (!(cfg.h > 0.0)) throw std::invalid_argument("step size must be positive");
  if (cfg.scheme != "projection") throw ConfigError("unknown reflection scheme '" + cfg.scheme + "'");
  needs_phi_ = cfg.variant != DriftVariant::base;
  phi_factor_ = cfg.variant == DriftVariant::phi ? 2.0 : 4.0;
  if (needs_phi_ && !cfg.phi) throw ConfigError("drift variant needs a phi field");
  if (needs_phi_ && cfg.phi->constant) needs_phi_ = false;
}

Mat Stepper::metric(const Vec& x) const { return m_.flat ? Mat(Mat::Identity(d_, d_)) : m_.metric(x); }

Mat Stepper::metric_inverse(const Vec& x) const {
  if (m_.flat) return Mat::Identity(d_, d_);
  return m_.metric_inverse_exact ? m_.metric_inverse_exact(x) : Mat(m_.metric(x).inverse());
}

Christoffel Stepper::connection(const Vec& x) const {
  return m_.christoffel_exact ? m_.christoffel_exact(x) : christoffel(m_, x, cfg_.geo_step);
}

Mat Stepper::orthonormalize(const Vec& x, const Mat& seed) const {
  if (m_.flat) return Mat::Identity(d_, d_);
  const Mat g = metric(x);
  Mat u = seed;
  for (int a = 0; a < d_; ++a) {
    Vec v = u.col(a);
    for (int b = 0; b < a; ++b) v -= u.col(b).dot(g * v) * u.col(b);
    u.col(a) = v / std::sqrt(v.dot(g * v));
  }
  return u;
}

PathState Stepper::initial_state(const Vec& x0) const {
  if (!m_.inside(x0) && m_.boundary(x0) < -m_.boundary_tolerance())
    throw GeometryError("starting point outside M");
  PathState s;
  s.x = x0;
  s.origin = x0;
  s.frame = orthonormalize(x0, Mat::Identity(d_, d_));
  s.integrals.assign(cfg_.integrands.size(), 0.0);
  s.exit_times.assign(cfg_.exit_radii.size(), std::numeric_limits<double>::infinity());
  s.local_at_exit.assign(cfg_.exit_radii.size(), 0.0);
  return s;
}

void Stepper::step(PathState& s, const Vec& gauss) const {
  const Vec& x = s.x;
  const Vec incr = s.frame * gauss * sqrt_h_;
  const double h = cfg_.h;

  // left-point integrals
  if (cfg_.stoch_field || cfg_.tilt_field) {
    const Mat g = metric(x);
    const Vec gi = g * incr;
    if (cfg_.stoch_field) s.stoch_integral += cfg_.stoch_field(x).dot(gi);
    if (cfg_.tilt_field) {
      const Vec z = cfg_.tilt_field(x);
      s.log_weight += z.dot(gi) - 0.5 * z.dot(g * z) * h;
    }
  }
  for (std::size_t k = 0; k < cfg_.integrands.size(); ++k) s.integrals[k] += cfg_.integrands[k](x) * h;

  Vec drift = has_drift_ ? m_.drift(x) : Vec(Vec::Zero(d_));
  if (needs_phi_) drift -= phi_factor_ * grad_log_phi(m_, *cfg_.phi, x, cfg_.geo_step);
  Christoffel gamma;
  if (!m_.flat) {
    gamma = connection(x);
    drift -= gamma.contracted(metric_inverse(x));
  }

  Vec y = x + std::sqrt(2.0) * incr + drift * h;
  y = m_.chart.wrap(y);
  if (!m_.chart.contains(y)) {
    s.aborted = true;
    s.t += h;
    return;
  }
  if (m_.boundary(y) < 0.0) {
    const Projection p = project_to_boundary(m_, y);
    y = p.point;
    s.local_time += p.length;
  }

  if (!m_.flat) {
    Mat u = s.frame;
    if (cfg_.transport_frame) {
      const Vec dx = y - x;
      for (int a = 0; a < d_; ++a) u.col(a) -= gamma.apply(dx, s.frame.col(a));
    } else {
      u = Mat::Identity(d_, d_);
    }
    s.frame = orthonormalize(y, u);
  }
  s.x = y;
  s.t += h;

  for (std::size_t k = 0; k < cfg_.exit_radii.size(); ++k) {
    if (std::isfinite(s.exit_times[k])) continue;
    if (distance(m_, s.origin, y) >= cfg_.exit_radii[k]) {
      s.exit_times[k] = s.t;
      s.local_at_exit[k] = s.local_time;
    }
  }
}

}  // namespace reflab

namespace reflab {

namespace {

Snapshot make_snapshot(double t, const Vec& x, double l, double lw, double si, const PathState& s) {
  Snapshot snap;
  snap.t = t;
  snap.x = x;
  snap.local_time = l;
  snap.log_weight = lw;
  snap.stoch_integral = si;
  snap.integrals = s.integrals;
  snap.exit_times = s.exit_times;
  snap.local_at_exit = s.local_at_exit;
  return snap;
}

PathRecord run_generic(const Stepper& stepper, const Vec& x0, const std::vector<double>& times,
                       std::uint64_t path_index) {
  const double h = stepper.config().h;
  const int d = stepper.manifold().dim;
  PathRecord rec;
  rec.path_index = path_index;
  PathState s = stepper.initial_state(x0);
  NormalStream rng(stepper.config().seed, path_index);
  Vec gauss(d);
  std::uint64_t done = 0;
  for (double t : times) {
    const std::uint64_t target = steps_for(t, h);
    if (target < done) throw std::invalid_argument("snapshot times must be sorted");
    for (; done < target && !s.aborted; ++done) {
      for (int i = 0; i < d; ++i) gauss[i] = rng.next();
      stepper.step(s, gauss);
    }
    if (s.aborted) {
      rec.aborted = true;
      break;
    }
    rec.snapshots.push_back(make_snapshot(t, s.x, s.local_time, s.log_weight, s.stoch_integral, s));
  }
  return rec;
}

// Same scheme as Stepper::step with the built-in closed forms inlined and
// fixed-size types; registered fields still go through their callbacks.
template <int D, BuiltinKind K>
PathRecord run_builtin(const Stepper& stepper, const Vec& x0, const std::vector<double>& times,
                       std::uint64_t path_index) {
  using V = Eigen::Matrix<double, D, 1>;
  using M = Eigen::Matrix<double, D, D>;
  const ManifoldSpec& m = stepper.manifold();
  const SimConfig& cfg = stepper.config();
  const double h = cfg.h, sqrt_h = std::sqrt(h), sqrt2 = std::sqrt(2.0);
  const auto& par = m.builtin_params;
  const bool use_metric = cfg.stoch_field || cfg.tilt_field;
  const bool variant = cfg.variant != DriftVariant::base && cfg.phi && !cfg.phi->constant;
  const double variant_factor = cfg.variant == DriftVariant::phi ? 2.0 : 4.0;
  const bool drift_callback = K != BuiltinKind::interval && static_cast<bool>(m.drift);
  const V lo = m.chart.lo, hi = m.chart.hi;

  PathRecord rec;
  rec.path_index = path_index;
  PathState s = stepper.initial_state(x0);
  V x = x0;
  const V origin = x;
  M frame = s.frame;
  double l = 0.0, lw = 0.0, si = 0.0;
  const std::size_t n_int = cfg.integrands.size(), n_exit = cfg.exit_radii.size();
  NormalStream rng(cfg.seed, path_index);

  auto scale = [&](const V& u) {
    if constexpr (K == BuiltinKind::hemisphere) return 2.0 * par[0] / (1.0 + u.squaredNorm());
    else return 1.0;
  };

  std::uint64_t done = 0;
  bool aborted = false;
  for (double t_snap : times) {
    const std::uint64_t target = steps_for(t_snap, h);
    if (target < done) throw std::invalid_argument("snapshot times must be sorted");
    for (; done < target; ++done) {
      V z;
      for (int i = 0; i < D; ++i) z[i] = rng.next();
      const V incr = frame * z * sqrt_h;

      if (use_metric || n_int) {
        const Vec xv = x;
        const double lam2 = K == BuiltinKind::hemisphere ? scale(x) * scale(x) : 1.0;
        if (cfg.stoch_field) si += lam2 * cfg.stoch_field(xv).dot(Vec(incr));
        if (cfg.tilt_field) {
          const Vec zt = cfg.tilt_field(xv);
          lw += lam2 * (zt.dot(Vec(incr)) - 0.5 * zt.squaredNorm() * h);
        }
        for (std::size_t k = 0; k < n_int; ++k) s.integrals[k] += cfg.integrands[k](xv) * h;
      }

      V drift = V::Zero();
      if constexpr (K == BuiltinKind::interval) drift[0] = -par[1] * x[0];
      if (drift_callback) drift += V(m.drift(Vec(x)));
      if (variant) drift -= variant_factor * V(grad_log_phi(m, *cfg.phi, Vec(x), cfg.geo_step));
      // the contracted connection of a conformal metric vanishes in 2-D

      V y = x + sqrt2 * incr + drift * h;
      if ((y.array() < lo.array()).any() || (y.array() > hi.array()).any()) {
        aborted = true;
        break;
      }
      if constexpr (K == BuiltinKind::interval) {
        if (y[0] < 0.0) {
          l += -y[0];
          y[0] = 0.0;
        } else if (y[0] > par[0]) {
          l += y[0] - par[0];
          y[0] = par[0];
        }
      } else if constexpr (K == BuiltinKind::disk) {
        const double r = y.norm();
        if (r > par[0]) {
          l += r - par[0];
          y *= par[0] / r;
        }
      } else if constexpr (K == BuiltinKind::annulus) {
        const double r = y.norm();
        if (r < par[0]) {
          l += par[0] - r;
          y *= par[0] / r;
        } else if (r > par[1]) {
          l += r - par[1];
          y *= par[1] / r;
        }
      } else if constexpr (K == BuiltinKind::hemisphere) {
        const double r = y.norm();
        if (r > 1.0) {
          l += 2.0 * par[0] * (std::atan(r) - 0.25 * std::numbers::pi);
          y /= r;
        }
        if (cfg.transport_frame) {
          // Gamma^k_ij X^i Y^j = X^k (s.Y) + Y^k (s.X) - (X.Y) s^k with s = grad sigma
          const V sg = -2.0 * x / (1.0 + x.squaredNorm());
          const V dx = y - x;
          M u = frame;
          for (int a = 0; a < D; ++a) {
            const V c = frame.col(a);
            u.col(a) -= dx * sg.dot(c) + c * sg.dot(dx) - dx.dot(c) * sg;
          }
          frame = u;
        } else {
          frame = M::Identity();
        }
        // Gram-Schmidt in g = lambda^2 I
        const double lam = scale(y);
        frame.col(0).normalize();
        if constexpr (D == 2) {
          frame.col(1) -= frame.col(0).dot(frame.col(1)) * frame.col(0);
          frame.col(1).normalize();
        }
        frame /= lam;
      }
      x = y;
      const double t_now = (done + 1) * h;
      for (std::size_t k = 0; k < n_exit; ++k) {
        if (std::isfinite(s.exit_times[k])) continue;
        double dist;
        if constexpr (K == BuiltinKind::interval || K == BuiltinKind::disk) dist = (x - origin).norm();
        else dist = m.distance(Vec(origin), Vec(x));
        if (dist >= cfg.exit_radii[k]) {
          s.exit_times[k] = t_now;
          s.local_at_exit[k] = l;
        }
      }
    }
    if (aborted) {
      rec.aborted = true;
      break;
    }
    rec.snapshots.push_back(make_snapshot(t_snap, Vec(x), l, lw, si, s));
  }
  return rec;
}

}  // namespace

PathRecord simulate_path(const Stepper& stepper, const Vec& x0, const std::vector<double>& times,
                         std::uint64_t path_index) {
  const ManifoldSpec& m = stepper.manifold();
  switch (m.builtin) {
    case BuiltinKind::interval: return run_builtin<1, BuiltinKind::interval>(stepper, x0, times, path_index);
    case BuiltinKind::disk: return run_builtin<2, BuiltinKind::disk>(stepper, x0, times, path_index);
    case BuiltinKind::annulus: return run_builtin<2, BuiltinKind::annulus>(stepper, x0, times, path_index);
    case BuiltinKind::hemisphere: return run_builtin<2, BuiltinKind::hemisphere>(stepper, x0, times, path_index);
    case BuiltinKind::none: break;
  }
  return run_generic(stepper, x0, times, path_index);
}

/// Reference loop through Stepper::step, regardless of any builtin tag.
PathRecord simulate_path_generic(const Stepper& stepper, const Vec& x0, const std::vector<double>& times,
                                 std::uint64_t path_index) {
  return run_generic(stepper, x0, times, path_index);
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "path dump assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

}  // namespace

void write_path_dump_header(std::ostream& out, int dim) {
  out.write("REFLPATH", 8);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
}

void write_path_dump_records(std::ostream& out, const PathRecord& rec) {
  for (const auto& s : rec.snapshots) {
    put<std::uint64_t>(out, rec.path_index);
    put<double>(out, s.t);
    for (int i = 0; i < s.x.size(); ++i) put<double>(out, s.x[i]);
    put<double>(out, s.local_time);
    put<double>(out, s.log_weight);
  }
}

}  // namespace reflab
