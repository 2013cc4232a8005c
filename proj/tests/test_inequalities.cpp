#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "reflab/builtins.hpp"
#include "reflab/inequalities.hpp"

using namespace reflab;
namespace bi = reflab::builtins;

namespace {

struct Setup {
  ManifoldSpec m;
  PhiField phi;
  CurvatureBoundReport curvature;
  ClassDReport class_d;
  CheckContext ctx;
};

// heap-allocated so the context can point into it
std::unique_ptr<Setup> setup(ManifoldSpec m, PhiField phi, int p, int per_axis, double h) {
  auto s = std::make_unique<Setup>();
  s->m = std::move(m);
  s->phi = std::move(phi);
  s->curvature = curvature_lower_bound(s->m, s->phi, p, per_axis, h);
  s->class_d = class_D_check(s->m, s->phi);
  s->ctx.m = &s->m;
  s->ctx.phi = &s->phi;
  s->ctx.experiment = "unit";
  s->ctx.hypotheses = check_hypotheses(s->curvature.K, s->curvature, s->class_d);
  return s;
}

int count(const std::vector<CheckReport>& rs, Verdict v) {
  int n = 0;
  for (const auto& r : rs) n += r.verdict == v;
  return n;
}

}  // namespace

TEST_CASE("expm1_over is continuous through a = 0") {
  CHECK(expm1_over(0.0, 0.3) == doctest::Approx(0.3));
  CHECK(expm1_over(1e-9, 0.3) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(expm1_over(2.0, 0.5) == doctest::Approx((std::exp(1.0) - 1) / 2).epsilon(1e-14));
  CHECK(expm1_over(-2.0, 0.5) == doctest::Approx((1 - std::exp(-1.0)) / 2).epsilon(1e-14));
  // property: both sides of the switch agree to series accuracy
  for (double t : {0.01, 0.1, 1.0}) {
    const double a = 0.99e-6 / t, b = 1.01e-6 / t;
    CHECK(expm1_over(a, t) == doctest::Approx(expm1_over(b, t)).epsilon(1e-7));
  }
}

TEST_CASE("verdict rules") {
  Hypotheses ok{"c1", "d1", {}};
  Hypotheses missing{"c1", "", {"no class-D report"}};
  CheckReport r;
  r.lhs = 1.0;
  r.rhs = 0.9;
  r.stat_tol = 0.05;
  render(r, ok);
  CHECK(r.verdict == Verdict::violated);
  r.stat_tol = 0.2;
  render(r, ok);
  CHECK(r.verdict == Verdict::holds);
  CHECK(r.hypotheses.size() == 2);
  render(r, missing);
  CHECK(r.verdict == Verdict::inconclusive);
  CHECK(r.reason.find("class-D") != std::string::npos);
  r.lhs = 2.0;
  render(r, missing);
  CHECK(r.verdict == Verdict::violated);
  CHECK(r.to_json().find("\"verdict\":\"VIOLATED\"") != std::string::npos);
}

TEST_CASE("hypotheses reject a K above the certified bound") {
  auto s = setup(bi::half_line(1.0), phi_one(), 2, 64, 1e-4);
  CHECK(s->ctx.hypotheses.verified());
  CHECK_FALSE(check_hypotheses(s->curvature.K + 0.1, s->curvature, s->class_d).verified());
  CHECK(check_hypotheses(s->curvature.K - 0.5, s->curvature, s->class_d).verified());
}

TEST_CASE("Poincare on the OU half-line") {
  auto s = setup(bi::half_line(1.0), phi_one(), 2, 64, 1e-4);
  const auto rs = verify_poincare(s->ctx, s->curvature.K, 1.0,
                                  {make_test_function(s->m, "coordinate"), make_test_function(s->m, "constant:2")});
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].verdict == Verdict::holds);
  CHECK(std::abs(rs[0].lhs - (1 - 2 / std::numbers::pi)) < 1e-6);
  CHECK(std::abs(rs[0].margin() - 2 / std::numbers::pi) < 1e-6);
  CHECK(rs[0].oracle_tol < 1e-8);
  CHECK(rs[1].verdict == Verdict::holds);
  CHECK(std::abs(rs[1].lhs) < 1e-12);
  const auto bad = verify_poincare(s->ctx, -0.5, 1.0, {make_test_function(s->m, "coordinate")});
  CHECK(bad[0].verdict == Verdict::inconclusive);
}

TEST_CASE("log-Sobolev on the OU half-line") {
  auto s = setup(bi::half_line(1.0), phi_one(), 2, 64, 1e-4);
  const auto rs = verify_logsobolev(s->ctx, s->curvature.K, 1.0,
                                    {make_test_function(s->m, "affine_positive:1"),
                                     make_test_function(s->m, "quadratic"), make_test_function(s->m, "exp_mix")});
  CHECK(count(rs, Verdict::holds) == 3);
  for (const auto& r : rs) CHECK(r.margin() > 0.0);
}

TEST_CASE("HWI on a flat interval") {
  auto s = setup(bi::interval(std::numbers::pi), phi_one(), 2, 64, 1e-4);
  CHECK(std::abs(s->curvature.K) < 1e-6);
  const double K = std::min(s->curvature.K, 0.0);
  const auto rs = verify_hwi_1d(s->ctx, K, 1.0,
                                {make_test_function(s->m, "constant:1"), make_test_function(s->m, "affine_positive:2")});
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].verdict == Verdict::holds);
  CHECK(std::abs(rs[0].lhs) < 1e-10);
  CHECK(std::abs(rs[0].rhs) < 1e-6);
  CHECK(rs[1].verdict == Verdict::holds);
  CHECK(verify_hwi_1d(s->ctx, 0.5, 1.0, {make_test_function(s->m, "constant:1")})[0].verdict == Verdict::inconclusive);
}

TEST_CASE("heat kernel bounds on the OU half-line") {
  auto s = setup(bi::half_line(1.0), phi_one(), 2, 64, 1e-4);
  const auto rs = verify_heat_kernel(s->ctx, s->curvature.K, 1.0, {0.0, 0.5, 1.5}, {0.0, 1.0, 2.0}, {0.1, 0.5});
  CHECK(count(rs, Verdict::holds) == static_cast<int>(rs.size()));
  for (const auto& r : rs) CHECK(r.oracle_tol < 1e-3 * (1 + std::abs(r.lhs)));
}

TEST_CASE("semigroup bounds on the OU half-line by the PDE oracle") {
  auto s = setup(bi::half_line(1.0), phi_one(), 2, 64, 1e-4);
  auto P = pde_semigroup(s->m, {400, 3, 1e-3});
  const auto f = make_test_function(s->m, "quadratic");
  const auto rs = verify_cor12(s->ctx, *P, s->curvature.K, 1.0, {f}, {vec1(0.2)}, {vec1(1.0)}, {0.3});
  REQUIRE(rs.size() == 4);
  for (const auto& r : rs) {
    CHECK(r.verdict == Verdict::holds);
    CHECK(r.margin() > 0.0);
  }
  // weakening K never turns HOLDS into VIOLATED
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> drop(0.0, 3.0);
  for (int k = 0; k < 5; ++k) {
    const double Kp = s->curvature.K - drop(gen);
    const auto weaker = verify_cor12(s->ctx, *P, Kp, 1.0, {f}, {vec1(0.2)}, {vec1(1.0)}, {0.3});
    for (const auto& r : weaker)
      if (r.id == "cor12.1") CHECK(r.verdict == Verdict::holds);
  }
  const auto xi = verify_xi_consequences(s->ctx, *P, [](double t) { return std::exp(-2 * t); }, "exp(-2t)", {f},
                                         {vec1(0.0), vec1(0.7)}, {vec1(1.2)}, {0.0, 0.2});
  CHECK(count(xi, Verdict::holds) == static_cast<int>(xi.size()));
  for (const auto& r : xi)
    if (r.where.find("t=0 ") != std::string::npos) CHECK(std::abs(r.lhs - r.rhs) < 1e-9);
  CHECK_THROWS_AS(verify_xi_consequences(s->ctx, *P, [](double) { return 0.0; }, "0", {f}, {vec1(0.1)}, {}, {0.1}),
                  ConfigError);
}

TEST_CASE("hemisphere bounds by the spectral oracle") {
  auto s = setup(bi::upper_hemisphere(), phi_one(), 2, 24, 1e-3);
  CHECK(s->curvature.K == doctest::Approx(1.0).epsilon(1e-3));
  auto P = spectral_semigroup(s->m);
  const auto f = make_test_function(s->m, "sin2");
  const Vec x = s->m.from_natural(vec2(std::numbers::pi / 4, 0.0));
  const auto rs = verify_cor12(s->ctx, *P, s->curvature.K, 1.0, {f}, {x}, {}, {0.05, 0.1});
  CHECK(count(rs, Verdict::holds) == 6);
  auto grad = P->gradient_norms({observe(f)}, {x}, {0.1});
  CHECK(grad[0][0][0].value == doctest::Approx(std::exp(-0.6)).epsilon(1e-9));
}

TEST_CASE("annulus negative test: the oracle and MC both violate") {
  auto s = setup(bi::annulus(1.0, 2.0), phi_one(), 1, 24, 1e-3);
  CHECK_FALSE(s->class_d.passed());
  SimConfig cfg;
  cfg.h = 1e-5;
  cfg.seed = 3;
  RunOptions opt;
  opt.n = 1500;
  const auto rs = verify_gradient_negative(s->ctx, 1.0, 2.0, {0.005, 0.01}, {400, 3, 1e-5}, cfg, opt);
  REQUIRE(rs.size() == 4);
  for (const auto& r : rs) {
    CHECK(r.negative);
    CHECK(r.verdict == Verdict::violated);
  }
}

TEST_CASE("gradient estimate holds on the hemisphere in both forms") {
  auto s = setup(bi::upper_hemisphere(), phi_one(), 1, 24, 1e-3);
  SimConfig cfg;
  cfg.h = 1e-3;
  cfg.seed = 12;
  RunOptions opt;
  opt.n = 2000;
  const Vec x = s->m.from_natural(vec2(std::numbers::pi / 4, 0.0));
  KField K{s->curvature.K, {}};
  const auto rs = verify_gradient_thm11(s->ctx, K, {make_test_function(s->m, "sin2")}, {x}, {0.1}, cfg, opt);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].verdict == Verdict::holds);
  CHECK(rs[1].verdict == Verdict::holds);
  CHECK(rs[0].lhs == doctest::Approx(std::exp(-0.6)).epsilon(0.03));
}

TEST_CASE("semigroup log-Sobolev: constants give equality") {
  auto s = setup(bi::half_line(1.0), phi_one(), 2, 64, 1e-4);
  SimConfig cfg;
  cfg.h = 1e-3;
  RunOptions opt;
  opt.n = 400;
  const auto rs = verify_semigroup_logsobolev(s->ctx, s->curvature.K, 1.0,
                                              {make_test_function(s->m, "constant:2"),
                                               make_test_function(s->m, "affine_positive:1")},
                                              {vec1(0.5)}, {0.07}, cfg, opt);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].verdict == Verdict::holds);
  CHECK(rs[0].lhs == doctest::Approx(rs[0].rhs).epsilon(1e-12));
  CHECK(rs[1].verdict == Verdict::holds);
  CHECK_THROWS(verify_semigroup_logsobolev(s->ctx, 1.0, 1.0, {make_test_function(s->m, "constant:2")},
                                           {vec1(0.5)}, {0.0705}, cfg, opt));
}
