#include "doctest.h"

#include <cmath>
#include <numbers>

#include "reflab/builtins.hpp"
#include "reflab/estimators.hpp"

using namespace reflab;
namespace bi = reflab::builtins;

namespace {

double theta(const ManifoldSpec& m, const Vec& x) { return bi::hemisphere_polar_angle(m, x); }

}  // namespace

TEST_CASE("half-line local time mean") {
  const auto hl = bi::half_line();
  SimConfig cfg;
  cfg.h = 1e-4;
  cfg.seed = 3;
  RunOptions opt;
  opt.n = 4000;
  const std::vector<double> ts = {0.05, 0.25, 1.0};
  const auto est = local_time_mean(hl, cfg, vec1(0.0), ts, 0.0, opt);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double exact = 2.0 * std::sqrt(ts[k] / std::numbers::pi);
    CHECK(std::abs(est[k].mean() - exact) < 4.0 * est[k].std_error() + 0.01);
  }
}

TEST_CASE("pooling does not depend on the number of workers") {
  const auto d = bi::disk(1.0);
  SimConfig cfg;
  cfg.h = 1e-3;
  cfg.seed = 17;
  const ScalarField f = [](const Vec& x) { return x.squaredNorm(); };
  RunOptions a;
  a.n = 600;
  a.chunk = 64;
  RunOptions b = a;
  b.jobs = 3;
  const auto ea = estimate_Pt(d, cfg, f, vec2(0.1, 0.2), 0.2, a);
  const auto eb = estimate_Pt(d, cfg, f, vec2(0.1, 0.2), 0.2, b);
  CHECK(ea.mean() == eb.mean());
  CHECK(ea.std_error() == eb.std_error());
  RunOptions c = a;
  c.chunk = 7;
  const auto ec = estimate_Pt(d, cfg, f, vec2(0.1, 0.2), 0.2, c);
  CHECK(ec.mean() == doctest::Approx(ea.mean()).epsilon(1e-13));
}

TEST_CASE("hemisphere: P_t sin^2 from the pole") {
  const auto hemi = bi::upper_hemisphere();
  SimConfig cfg;
  cfg.h = 1e-3;
  cfg.seed = 1;
  RunOptions opt;
  opt.n = 3000;
  const ScalarField f = [&](const Vec& x) { return std::pow(std::sin(theta(hemi, x)), 2); };
  const auto e = estimate_Pt(hemi, cfg, f, vec2(0.0, 0.0), 0.3, opt);
  const double exact = 2.0 / 3.0 * (1.0 - std::exp(-1.8));
  CHECK(std::abs(e.mean() - exact) < 4.0 * e.std_error() + 0.005);
}

TEST_CASE("CRN gradient at t = 0 is the deterministic gradient") {
  const auto d = bi::disk(1.0);
  SimConfig cfg;
  cfg.h = 1e-3;
  RunOptions opt;
  opt.n = 50;
  const ScalarField f = [](const Vec& x) { return x[0] * x[0] + 3.0 * x[1]; };
  const auto g = estimate_grad_Pt(d, cfg, {f}, vec2(0.3, 0.2), {0.0}, 1e-3, opt)[0][0];
  CHECK(g.norm.mean() == doctest::Approx(std::hypot(0.6, 3.0)).epsilon(1e-9));
  CHECK(g.norm.std_error() < 1e-12);
  CHECK_FALSE(g.tangential);
  // boundary point: tangential derivative of x1 at (1, 0) is 1 in magnitude
  const ScalarField y = [](const Vec& x) { return x[1]; };
  const auto gb = estimate_grad_Pt(d, cfg, {y}, vec2(1.0, 0.0), {0.0}, 1e-3, opt)[0][0];
  CHECK(gb.tangential);
  CHECK(gb.norm.mean() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("CRN gradient on the OU half-line") {
  // f(x) = x, far from 0: d/dx P_t f = exp(-t) up to reflection effects
  const auto hl = bi::half_line(1.0, 12.0);
  SimConfig cfg;
  cfg.h = 1e-3;
  cfg.seed = 4;
  RunOptions opt;
  opt.n = 2000;
  const ScalarField f = [](const Vec& x) { return x[0]; };
  const auto g = estimate_grad_Pt(hl, cfg, {f}, vec1(6.0), {0.5}, 1e-2, opt)[0][0];
  CHECK(std::abs(g.norm.mean() - std::exp(-0.5)) < 4.0 * g.norm.std_error() + 1e-3);
}

TEST_CASE("Girsanov weights: mean one and agreement with the tilted process") {
  const auto an = bi::annulus(1.0, 2.0);
  const PhiField phi = phi_radial_exp({1.0, -0.5}, 1.0);
  SimConfig cfg;
  cfg.h = 1e-3;
  cfg.seed = 21;
  RunOptions opt;
  opt.n = 3000;
  const ScalarField f = [](const Vec& x) { return x[0]; };
  const auto res = girsanov_test(an, phi, f, vec2(0.0, 1.2), 0.3, 0.4, cfg, opt);
  CHECK(std::abs(res.mean_weight.mean() - 1.0) < 4.0 * res.mean_weight.std_error() + 0.01);
  for (int k = 0; k < 3; ++k) {
    const double se = combined_std_error(res.weighted[k], res.tilted[k]);
    CHECK(std::abs(res.weighted[k].mean() - res.tilted[k].mean()) < 4.0 * se + 0.01);
  }
}

TEST_CASE("weighted and tilted right-hand sides agree") {
  const auto an = bi::annulus(1.0, 2.0);
  const PhiField phi = phi_radial_exp({1.0, -0.5}, 1.0);
  SimConfig cfg;
  cfg.h = 1e-3;
  cfg.seed = 8;
  RunOptions opt;
  opt.n = 3000;
  const ScalarField f = [](const Vec& x) { return x[0] + 0.5 * x[1]; };
  KField K{-1.0, {}};
  const auto w = rhs_thm_weighted(an, phi, K, {f}, vec2(0.0, 1.3), {0.2}, cfg, opt)[0][0];
  const auto t = rhs_thm_tilted(an, phi, K, {f}, vec2(0.0, 1.3), {0.2}, cfg, opt)[0][0];
  CHECK(std::abs(w.mean() - t.mean()) < 4.0 * combined_std_error(w, t) + 0.01);
  CHECK(w.mean_weight > 0.0);
  CHECK(w.max_weight >= w.mean_weight);
}

TEST_CASE("Richardson extrapolation removes a first-order bias") {
  const auto coarse = McEstimate::from_mean_se(1.0 + 0.2, 0.01, 100);
  const auto fine = McEstimate::from_mean_se(1.0 + 0.1, 0.01, 100);
  const auto r = richardson(coarse, fine, 1.0);
  CHECK(r.mean() == doctest::Approx(1.0));
  CHECK(r.std_error() == doctest::Approx(std::sqrt(5.0) * 0.01).epsilon(1e-6));
  CHECK(combined_std_error(coarse, fine) == doctest::Approx(std::sqrt(2.0) * 0.01).epsilon(1e-6));
}
