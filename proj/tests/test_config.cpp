#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "reflab/config.hpp"
#include "reflab/digest.hpp"
#include "reflab/experiments.hpp"

using namespace reflab;

namespace {

double awkward(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> pick(0, 4);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  switch (pick(gen)) {
    case 0: return 0.1;
    case 1: return std::numbers::pi / 7;
    case 2: return std::ldexp(u(gen), -60);
    case 3: return 1.0 / 3.0;
    default: return u(gen);
  }
}

ExperimentConfig random_config(std::mt19937_64& gen, int label) {
  std::uniform_int_distribution<int> small(1, 4);
  std::uniform_int_distribution<std::uint64_t> big(0, ~0ULL);
  static const char* manifolds[] = {"interval", "half_line", "disk", "annulus", "hemisphere"};
  static const char* kinds[] = {"", "simulate", "verify-cor12", "local-time"};
  static const char* fnames[] = {"sin2", "coordinate:1", "cos_mode:2", "affine_positive:1.5", "exp_mix"};
  ExperimentConfig c;
  c.label = "e" + std::to_string(label);
  c.kind = kinds[small(gen) - 1];
  c.manifold = manifolds[small(gen)];
  c.length = std::abs(awkward(gen)) + 0.5;
  c.ou_rate = awkward(gen);
  c.radius = 1.0 + std::abs(awkward(gen));
  c.r_in = 0.5;
  c.r_out = 0.5 + c.radius;
  c.phi = small(gen) % 2 ? "one" : "radial_exp";
  for (int k = small(gen); k > 0; --k) c.phi_coeffs.push_back(awkward(gen));
  c.p = small(gen);
  c.K = small(gen) % 2 ? "auto" : repr(awkward(gen));
  c.negative = small(gen) % 2;
  for (int k = small(gen); k > 0; --k) c.functions.push_back(fnames[small(gen)]);
  const int d = c.manifold == std::string("interval") || c.manifold == std::string("half_line") ? 1 : 2;
  for (int k = small(gen); k > 0; --k) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = awkward(gen);
    (k % 2 ? c.points : c.ys).push_back(x);
  }
  for (int k = small(gen); k > 0; --k) c.times.push_back(std::abs(awkward(gen)));
  c.n = 2 + big(gen) % 1000000;
  c.h = std::ldexp(1.0, -small(gen) * 5);
  c.seed = big(gen);
  c.delta = 1e-3 * small(gen);
  c.bias = std::abs(awkward(gen));
  c.xi = small(gen) % 2 ? "exp:-2" : "const:0.5";
  return c;
}

}  // namespace

TEST_CASE("property: configs round-trip through the text form") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    SuiteConfig suite;
    for (int k = 0; k < 3; ++k) suite.experiments.push_back(random_config(gen, k));
    const std::string text = suite.serialize();
    const SuiteConfig back = parse_config(text);
    REQUIRE(back.experiments.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(back.experiments[k] == suite.experiments[k]);
      CHECK(back.experiments[k].digest() == suite.experiments[k].digest());
    }
    CHECK(back.serialize() == text);
  }
}

TEST_CASE("digest changes with any field") {
  ExperimentConfig a;
  const std::string d = a.digest();
  ExperimentConfig b = a;
  b.seed = 1;
  CHECK(b.digest() != d);
  b = a;
  b.times = {0.1};
  CHECK(b.digest() != d);
  b = a;
  b.h = std::nextafter(a.h, 1.0);
  CHECK(b.digest() != d);
  CHECK(ExperimentConfig{}.digest() == d);
}

TEST_CASE("defaults are inherited and sections override") {
  const auto s = parse_config(R"(
# comment
[defaults]
manifold = hemisphere
n = 500   # trailing comment
times = 0.1, 0.2

[experiment a]
points = pi/4 0; 0 0

[experiment b]
manifold = half_line
points = 0
n = 7
)");
  REQUIRE(s.experiments.size() == 2);
  CHECK(s.experiments[0].manifold == "hemisphere");
  CHECK(s.experiments[0].n == 500);
  CHECK(s.experiments[0].points[0][0] == doctest::Approx(std::numbers::pi / 4));
  CHECK(s.experiments[0].points.size() == 2);
  CHECK(s.experiments[1].manifold == "half_line");
  CHECK(s.experiments[1].n == 7);
  CHECK(s.experiments[1].times == std::vector<double>{0.1, 0.2});
}

TEST_CASE("field-level diagnostics") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text, "t.cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[experiment a]\nnn = 3\n").find("t.cfg:2: unknown key 'nn'") != std::string::npos);
  CHECK(message("[experiment a]\nn = -3\n").find("field 'n'") != std::string::npos);
  CHECK(message("[experiment a]\nh = 1e-3x\n").find("field 'h'") != std::string::npos);
  CHECK(message("[experiment a]\nmanifold = torus\n").find("field 'manifold'") != std::string::npos);
  CHECK(message("[experiment a]\nmanifold = disk\npoints = 0.1\n").find("2 coordinates") != std::string::npos);
  CHECK(message("[experiment a]\nK = big\n").find("field 'K'") != std::string::npos);
  CHECK(message("[experiment a]\n[experiment a]\n").find("duplicate label") != std::string::npos);
  CHECK(message("[experiment a\n").find("unterminated") != std::string::npos);
  CHECK(message("[experiment a]\nkind = verify-everything\n").find("field 'kind'") != std::string::npos);
  CHECK(message("[experiment a]\nh = 0\nn = 1\n").find("field 'h'") != std::string::npos);
}

TEST_CASE("subcommand selection") {
  const auto s = parse_config("[experiment a]\nkind = simulate\n[experiment b]\n[experiment c]\nkind = class-d\n");
  CHECK(select(s, "all").size() == 2);
  CHECK(select(s, "simulate").size() == 2);
  CHECK(select(s, "class-d").size() == 2);
  CHECK_THROWS_AS(select(parse_config("[experiment a]\nkind = simulate\n"), "class-d"), ConfigError);
}

TEST_CASE("every row carries the digest and seed") {
  const auto s = parse_config(R"(
[experiment lt]
kind = local-time
manifold = half_line
points = 0
times = 0.01 0.02
n = 200
h = 1e-3
seed = 9
)");
  RunFlags flags;
  const auto r = run_experiment(s.experiments[0], "local-time", flags);
  CHECK(r.digest == s.experiments[0].digest());
  REQUIRE_FALSE(r.rows.empty());
  for (const auto& row : r.rows) {
    CHECK(row.digest == r.digest);
    CHECK(row.seed == 9);
  }
  flags.seed = 11;
  const auto r2 = run_experiment(s.experiments[0], "local-time", flags);
  CHECK(r2.seed == 11);
  CHECK(r2.digest != r.digest);

  const std::string csv = results_csv({r});
  CHECK(csv.rfind("experiment,estimator,x,t,mean,stderr,n,h,seed,digest\n", 0) == 0);
  CHECK(csv.find("lt,local_time,0,0.01,") != std::string::npos);
  CHECK(r.files.size() == 1);
}

TEST_CASE("negative class-D sections fail when the check passes") {
  const auto s = parse_config(R"(
[experiment flat]
kind = class-d
manifold = annulus
negative = true
[experiment weighted]
kind = class-d
manifold = annulus
phi = radial_exp
phi_coeffs = 1 -0.5
negative = true
)");
  CHECK(run_experiment(s.experiments[0], "class-d", {}).failures == 0);
  CHECK(run_experiment(s.experiments[1], "class-d", {}).failures == 1);
}
