#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "reflab/builtins.hpp"
#include "reflab/phi.hpp"

using namespace reflab;
namespace bi = reflab::builtins;

namespace {

PhiField annulus_phi() { return phi_radial_exp({1.0, -0.5}, 1.0); }

// radial reduction: for psi(r) = (r-1) - (r-1)^2/2 on the flat plane,
// phi^p L phi^{-p} = p^2 psi'^2 - p (psi'' + psi'/r)
double radial_modified(double r, int p) {
  const double d1 = 2.0 - r, d2 = -1.0;
  return -(p * p * d1 * d1 - p * (d2 + d1 / r)) / p;
}

}  // namespace

TEST_CASE("modified Ricci reduces to Bakry-Emery for constant phi") {
  const auto ou = bi::half_line(1.0);
  const auto one = phi_one();
  CHECK(modified_ricci(ou, one, 1, vec1(0.7), vec1(1.0)) == doctest::Approx(1.0).epsilon(1e-9));
  const auto hemi = bi::upper_hemisphere();
  const Vec u = vec2(0.2, 0.5), X = vec2(0.3, -0.8);
  CHECK(modified_ricci(hemi, one, 2, u, X) == X.dot(bakry_emery_form(hemi, u) * X));
  CHECK_THROWS_AS(modified_ricci(ou, one, 3, vec1(0.5), vec1(1.0)), std::invalid_argument);
}

TEST_CASE("annulus weight: modified Ricci against the radial reduction") {
  const auto an = bi::annulus(1.0, 2.0);
  const auto phi = annulus_phi();
  for (double r : {1.0, 1.25, 1.6, 2.0}) {
    for (int p : {1, 2}) {
      const Vec x = vec2(r * std::cos(0.3), r * std::sin(0.3));
      CHECK(modified_ricci(an, phi, p, x, vec2(0.0, 1.0)) == doctest::Approx(radial_modified(r, p)).epsilon(1e-7));
    }
  }
  const Vec x1 = vec2(1.0, 0.0);
  CHECK(modified_ricci(an, phi, 1, x1, vec2(1.0, 0.0)) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("property: modified Ricci is quadratic in X") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> G;
  const auto an = bi::annulus(1.0, 2.0);
  const auto hemi = bi::upper_hemisphere();
  const auto phi = annulus_phi();
  for (int k = 0; k < 50; ++k) {
    const Vec X = vec2(G(rng), G(rng));
    const Vec x = vec2(1.3 + 0.1 * G(rng), 0.2 * G(rng));
    const double a = modified_ricci(an, phi, 1, x, X), b = modified_ricci(an, phi, 1, x, 2.0 * X);
    CHECK(b == doctest::Approx(4.0 * a).epsilon(1e-13));
    const Vec u = vec2(0.3 * G(rng), 0.3 * G(rng));
    CHECK(modified_ricci(hemi, phi_one(), 2, u, 2.0 * X) ==
          doctest::Approx(4.0 * modified_ricci(hemi, phi_one(), 2, u, X)).epsilon(1e-13));
  }
}

TEST_CASE("class D membership") {
  const auto d = bi::disk(1.0);
  const auto rd = class_D_check(d, phi_one());
  CHECK(rd.inf_status == Status::pass);
  CHECK(rd.normal_status == Status::pass);
  CHECK(rd.convexity_status == Status::pass);
  CHECK(rd.min_convexity == doctest::Approx(1.0).epsilon(1e-3));

  const auto an = bi::annulus(1.0, 2.0);
  const auto r1 = class_D_check(an, phi_one());
  CHECK(r1.convexity_status == Status::fail);
  CHECK(r1.min_convexity == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(r1.min_convexity_point.norm() == doctest::Approx(1.0));

  const auto r2 = class_D_check(an, annulus_phi());
  CHECK(r2.inf_status == Status::pass);
  CHECK(r2.inf_phi == doctest::Approx(1.0));
  CHECK(r2.convexity_status == Status::pass);
  CHECK(std::abs(r2.min_convexity) < 1e-8);
  CHECK(r2.normal_status == Status::warn);
  CHECK(r2.max_abs_N_phi == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r2.passed());

  ClassDOptions strict;
  strict.strict = true;
  const auto r3 = class_D_check(an, annulus_phi(), strict);
  CHECK(r3.normal_status == Status::fail);
  CHECK_FALSE(r3.passed());

  // phi bounded away from 1 fails (a)
  const auto r4 = class_D_check(d, phi_radial_exp({0.0, 0.0}, 0.0));
  CHECK(r4.inf_status == Status::pass);
  const auto big = phi_radial_exp({0.5}, -1.0);  // phi >= e^{0.5}
  CHECK(class_D_check(an, big).inf_status == Status::fail);
  CHECK(r2.digest() == class_D_check(an, annulus_phi()).digest());
}

TEST_CASE("curvature lower bounds") {
  const auto hemi = bi::upper_hemisphere();
  const auto kh = curvature_lower_bound(hemi, phi_one(), 2, 16);
  CHECK(kh.K == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(kh.margin == doctest::Approx(1e-5));

  const auto ou = bi::half_line(1.0);
  const auto ko = curvature_lower_bound(ou, phi_one(), 2, 32);
  CHECK(ko.raw_min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ko.K == doctest::Approx(1.0 - 1e-5).epsilon(1e-9));

  // dense 1-D radial evaluation: min over [1,2] of 2/r - 2 - (2-r)^2
  double ref1 = 1e9, ref2 = 1e9;
  for (int i = 0; i <= 100000; ++i) {
    const double r = 1.0 + i * 1e-5;
    ref1 = std::min(ref1, radial_modified(r, 1));
    ref2 = std::min(ref2, radial_modified(r, 2));
  }
  CHECK(ref1 == doctest::Approx(-1.0));
  CHECK(ref2 == doctest::Approx(-2.0));
  const auto an = bi::annulus(1.0, 2.0);
  const auto ka = curvature_lower_bound(an, annulus_phi(), 1, 16);
  CHECK(ka.raw_min == doctest::Approx(ref1).epsilon(1e-7));
  CHECK(ka.K <= ref1);
  const auto kb = curvature_lower_bound(an, annulus_phi(), 2, 16);
  CHECK(kb.raw_min == doctest::Approx(ref2).epsilon(1e-7));

  // refinement never reports a larger K by more than the margin
  const auto kc = curvature_lower_bound(an, annulus_phi(), 1, 24);
  CHECK(kc.K <= ka.K + ka.margin);
  for (std::size_t i = 0; i < ka.points.size(); ++i) CHECK(ka.K <= ka.min_eigenvalues[i]);

  CHECK_THROWS_AS(curvature_lower_bound(an, annulus_phi(), 1, 7), std::invalid_argument);
}

TEST_CASE("conformal second fundamental form") {
  const auto d = bi::disk(2.0);
  const Vec p = vec2(0.0, 2.0);
  CHECK(conformal_second_fundamental_form(d, phi_one(), p, vec2(1.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-3));
  const auto an = bi::annulus(1.0, 2.0);
  const auto phi = annulus_phi();
  CHECK(std::abs(conformal_second_fundamental_form(an, phi, vec2(1.0, 0.0), vec2(0.0, 1.0))) < 1e-6);
  CHECK(conformal_second_fundamental_form(an, phi, vec2(0.0, 2.0), vec2(1.0, 0.0)) ==
        doctest::Approx(std::exp(-0.5) * 0.5).epsilon(1e-3));
  // when (c) passes, the conformal form is non-negative on the whole boundary
  for (const Vec& x : sample_boundary(an, 64)) {
    const Vec T = unit_tangent(an, x, inward_normal(an, x));
    CHECK(conformal_second_fundamental_form(an, phi, x, T) >= -1e-6);
  }
  CHECK(phi_sup(an, phi) == doctest::Approx(std::exp(0.5)));
}
