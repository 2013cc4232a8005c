// Acceptance criteria AC1-AC12, one PASS/FAIL line each.
//
// usage: acceptance [--jobs N] [--only AC3,AC4]
// Experiments come from configs/acceptance.cfg; AC12 drives the CLI binary
// on configs/suite.cfg.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "reflab/digest.hpp"
#include "reflab/experiments.hpp"
#include "reflab/quadrature.hpp"

namespace fs = std::filesystem;
using namespace reflab;

namespace {

// tolerances pinned from the acceptance criteria
constexpr double kBochnerRel = 1e-4;
constexpr int kBochnerPoints = 50;
constexpr double kBochnerSeconds = 10.0;
constexpr double kCatalogAbs = 1e-3;
constexpr double kCatalogSeconds = 5.0;
constexpr double kLocalTimeRel = 0.05;
constexpr std::uint64_t kPaths = 100000;
constexpr double kLocalTimeStep = 1e-5;
constexpr double kMcSeconds = 300.0;
constexpr double kSigmas = 3.0;
constexpr double kSemigroupStderr = 2e-3;
constexpr double kNegativeHorizon = 0.01;
constexpr double kPoincareAbs = 1e-6;
constexpr double kOracleAbs = 1e-6;

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
  void note(const std::string& s) {
    if (pass) detail += (detail.empty() ? "" : "; ") + s;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Lab {
 public:
  Lab(SuiteConfig suite, int jobs) : suite_(std::move(suite)) { flags_.jobs = jobs; }

  const ExperimentResult& get(const std::string& label) {
    auto it = cache_.find(label);
    if (it != cache_.end()) return it->second;
    for (const auto& c : suite_.experiments)
      if (c.label == label) return cache_.emplace(label, run_experiment(c, c.kind, flags_)).first->second;
    throw ConfigError("acceptance config has no experiment '" + label + "'");
  }

 private:
  SuiteConfig suite_;
  RunFlags flags_;
  std::map<std::string, ExperimentResult> cache_;
};

std::vector<const ResultRow*> rows(const ExperimentResult& r, const std::string& estimator) {
  std::vector<const ResultRow*> out;
  for (const auto& row : r.rows)
    if (row.estimator == estimator) out.push_back(&row);
  return out;
}

const ResultRow* row_at(const ExperimentResult& r, const std::string& estimator, const std::string& x, double t) {
  for (const auto& row : r.rows)
    if (row.estimator == estimator && row.x == x && row.t && std::abs(*row.t - t) < 1e-12) return &row;
  return nullptr;
}

std::vector<const CheckReport*> reports(const ExperimentResult& r, const std::string& id) {
  std::vector<const CheckReport*> out;
  for (const auto& rep : r.reports)
    if (rep.id == id) out.push_back(&rep);
  return out;
}

const char* kBochner[] = {"bochner-disk", "bochner-annulus", "bochner-hemisphere", "bochner-ou"};

Outcome ac1(Lab& lab) {
  Outcome o;
  double worst = 0.0, wall = 0.0;
  for (const char* label : kBochner) {
    const auto& r = lab.get(label);
    wall += r.wall_seconds;
    std::map<std::string, int> per_function;
    for (const auto& row : r.rows) {
      if (row.estimator.rfind("gamma2.lhs:", 0) != 0) continue;
      const std::string f = row.estimator.substr(11);
      const ResultRow* rhs = nullptr;
      for (const auto& other : r.rows)
        if (other.estimator == "gamma2.rhs:" + f && other.x == row.x) rhs = &other;
      if (!rhs) {
        o.fail(std::string(label) + ": missing rhs");
        continue;
      }
      const double rel = std::abs(row.mean - rhs->mean) / (1 + std::abs(rhs->mean));
      worst = std::max(worst, rel);
      if (rel > kBochnerRel) o.fail(std::string(label) + " " + f + " at " + row.x + ": " + fmt(rel));
      ++per_function[f];
    }
    if (per_function.size() < 3) o.fail(std::string(label) + ": fewer than 3 test functions");
    for (const auto& [f, n] : per_function)
      if (n < kBochnerPoints) o.fail(std::string(label) + " " + f + ": only " + std::to_string(n) + " points");
  }
  if (wall >= kBochnerSeconds) o.fail("runtime " + fmt(wall) + " s");
  o.note("max relative residual " + fmt(worst) + ", " + fmt(wall) + " s");
  return o;
}

Outcome ac2(Lab& lab) {
  Outcome o;
  struct Expect {
    const char* label;
    double ric;
    std::function<double(double r)> ii;  // by chart radius of the boundary point
  };
  const Expect cases[] = {
      {"bochner-disk", 0.0, [](double) { return 1.0; }},
      {"bochner-annulus", 0.0, [](double r) { return r < 1.5 ? -1.0 : 0.5; }},
      {"bochner-hemisphere", 1.0, [](double) { return 0.0; }},
      {"bochner-ou", 0.0, [](double) { return 0.0; }},
  };
  double worst = 0.0, wall = 0.0;
  for (const auto& e : cases) {
    const auto& r = lab.get(e.label);
    wall += r.wall_seconds;
    const auto ric = rows(r, "ricci");
    const auto ii = rows(r, "second_fundamental_form");
    if (ric.empty() || ii.empty()) o.fail(std::string(e.label) + ": no catalog rows");
    for (const auto* row : ric) {
      worst = std::max(worst, std::abs(row->mean - e.ric));
      if (std::abs(row->mean - e.ric) > kCatalogAbs) o.fail(std::string(e.label) + " Ric at " + row->x);
    }
    for (const auto* row : ii) {
      std::istringstream in(row->x);
      double a = 0, b = 0;
      in >> a >> b;
      const double expect = e.ii(std::hypot(a, b));
      worst = std::max(worst, std::abs(row->mean - expect));
      if (std::abs(row->mean - expect) > kCatalogAbs) o.fail(std::string(e.label) + " II at " + row->x);
    }
  }
  // the shared geometry-check run also covers the Bochner table
  if (wall >= kCatalogSeconds) o.fail("runtime " + fmt(wall) + " s");
  o.note("max catalog error " + fmt(worst) + ", " + fmt(wall) + " s");
  return o;
}

Outcome ac3(Lab& lab) {
  Outcome o;
  const auto& r = lab.get("local-time");
  std::string ratios;
  for (double t : {0.05, 0.25, 1.0}) {
    const ResultRow* row = row_at(r, "local_time", "0", t);
    if (!row) {
      o.fail("no estimate at t = " + fmt(t));
      continue;
    }
    const double ref = 2 * std::sqrt(t / std::numbers::pi);
    if (row->n != kPaths || row->h != kLocalTimeStep) o.fail("run is not at n = 1e5, h = 1e-5");
    if (std::abs(row->mean - ref) > kLocalTimeRel * ref) o.fail("t = " + fmt(t) + ": ratio " + fmt(row->mean / ref));
    ratios += (ratios.empty() ? "" : " ") + fmt(row->mean / ref);
  }
  if (r.wall_seconds >= kMcSeconds) o.fail("runtime " + fmt(r.wall_seconds) + " s");
  o.note("ratios " + ratios + ", " + fmt(r.wall_seconds) + " s");
  return o;
}

Outcome ac4(Lab& lab) {
  Outcome o;
  const auto& r = lab.get("hemisphere-semigroup");
  double worst_z = 0.0, worst_se = 0.0;
  int checked = 0;
  for (const auto* row : rows(r, "P_t:sin2")) {
    std::istringstream in(row->x);
    double theta = 0;
    in >> theta;
    const double c = std::cos(theta);
    const double exact = 2.0 / 3.0 - 2.0 / 3.0 * std::exp(-6 * *row->t) * legendre_values(2, c)[2];
    const double z = std::abs(row->mean - exact) / row->stderr_;
    worst_z = std::max(worst_z, z);
    worst_se = std::max(worst_se, row->stderr_);
    if (row->n != kPaths) o.fail("n != 1e5");
    if (z > kSigmas) o.fail("theta " + fmt(theta) + ", t " + fmt(*row->t) + ": z = " + fmt(z));
    if (row->stderr_ > kSemigroupStderr) o.fail("stderr " + fmt(row->stderr_));
    ++checked;
  }
  if (checked != 6) o.fail("expected 6 estimates, got " + std::to_string(checked));
  if (r.wall_seconds >= kMcSeconds) o.fail("runtime " + fmt(r.wall_seconds) + " s");
  o.note("max z " + fmt(worst_z) + ", max stderr " + fmt(worst_se) + ", " + fmt(r.wall_seconds) + " s");
  return o;
}

Outcome ac5(Lab& lab) {
  Outcome o;
  const auto& r = lab.get("girsanov-annulus");
  double worst = 0.0;
  int pairs = 0;
  for (const char* name : {"terminal", "integral", "survival"}) {
    const auto w = rows(r, std::string("weighted:") + name), t = rows(r, std::string("tilted:") + name);
    if (w.empty() || w.size() != t.size()) {
      o.fail(std::string("missing ") + name);
      continue;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double z = std::abs(w[i]->mean - t[i]->mean) / std::hypot(w[i]->stderr_, t[i]->stderr_);
      worst = std::max(worst, z);
      if (z > kSigmas) o.fail(std::string(name) + ": z = " + fmt(z));
      if (w[i]->n != kPaths || t[i]->n != kPaths) o.fail("n != 1e5");
      ++pairs;
    }
  }
  for (const auto* m : rows(r, "mean_weight")) {
    const double z = std::abs(m->mean - 1) / m->stderr_;
    if (z > kSigmas) o.fail("E R = " + fmt(m->mean) + ", z = " + fmt(z));
    o.note("E R = " + fmt(m->mean) + " +- " + fmt(m->stderr_));
  }
  o.note(std::to_string(pairs) + " functionals, max z " + fmt(worst));
  return o;
}

Outcome ac6(Lab& lab) {
  Outcome o;
  for (const char* label : {"thm11-hemisphere", "thm11-annulus"}) {
    const auto& r = lab.get(label);
    const auto w = reports(r, "thm11.weighted"), t = reports(r, "thm11.tilted");
    if (w.empty() || w.size() != t.size()) o.fail(std::string(label) + ": missing reports");
    for (const auto* rep : w)
      if (rep->verdict != Verdict::holds)
        o.fail(std::string(label) + " weighted " + rep->where + ": " + to_string(rep->verdict) + " " + rep->reason);
    for (const auto* rep : t)
      if (rep->verdict != Verdict::holds)
        o.fail(std::string(label) + " tilted " + rep->where + ": " + to_string(rep->verdict) + " " + rep->reason);
    double margin = 1e300;
    for (const auto& rep : r.reports) margin = std::min(margin, rep.margin() + rep.tolerance());
    o.note(std::string(label) + " " + std::to_string(r.reports.size()) + " HOLDS, min slack " + fmt(margin));
  }
  return o;
}

Outcome ac7(Lab& lab) {
  Outcome o;
  const auto& r = lab.get("thm11-negative");
  auto violated_early = [&](const std::string& id) {
    for (const auto* rep : reports(r, id)) {
      const auto at = rep->where.find("t=");
      const double t = at == std::string::npos ? 1e9 : std::stod(rep->where.substr(at + 2));
      if (rep->verdict == Verdict::violated && t <= kNegativeHorizon) return true;
    }
    return false;
  };
  if (!violated_early("thm11.negative.oracle")) o.fail("mode oracle does not certify a violation for t <= 0.01");
  if (!violated_early("thm11.negative.mc")) o.fail("MC does not reproduce the violation beyond 3 stderr");
  for (const auto& rep : r.reports)
    o.note(rep.id.substr(15) + " " + rep.where.substr(rep.where.find("t=")) + " excess " + fmt(-rep.margin()) +
           " tol " + fmt(rep.tolerance()));
  return o;
}

Outcome ac8(Lab& lab) {
  Outcome o;
  const auto rs = reports(lab.get("poincare-ou"), "poincare");
  if (rs.size() != 1) {
    o.fail("expected one report");
    return o;
  }
  const auto& r = *rs[0];
  const double exact = 1 - 2 / std::numbers::pi;
  if (std::abs(r.lhs - exact) > kPoincareAbs) o.fail("lhs " + repr(r.lhs));
  if (r.oracle_tol > kPoincareAbs) o.fail("quadrature error " + fmt(r.oracle_tol));
  if (std::abs(r.rhs - 1) > kPoincareAbs) o.fail("rhs " + repr(r.rhs));
  if (std::abs(r.margin() - 2 / std::numbers::pi) > kPoincareAbs) o.fail("margin " + repr(r.margin()));
  if (r.verdict != Verdict::holds) o.fail(to_string(r.verdict));
  o.note("lhs " + repr(r.lhs) + ", margin " + repr(r.margin()));
  return o;
}

void all_hold(Outcome& o, const ExperimentResult& r, const std::set<std::string>& ids, double oracle_cap) {
  int n = 0;
  double worst = 0.0;
  for (const auto& rep : r.reports) {
    if (!ids.count(rep.id)) continue;
    ++n;
    worst = std::max(worst, rep.oracle_tol);
    if (rep.verdict != Verdict::holds) o.fail(rep.id + " " + rep.where + ": " + to_string(rep.verdict));
    if (rep.oracle_tol > oracle_cap) o.fail(rep.id + " " + rep.where + ": oracle error " + fmt(rep.oracle_tol));
  }
  if (n == 0) o.fail(r.label + ": no reports");
  o.note(r.label + " " + std::to_string(n) + " HOLDS, max oracle error " + fmt(worst));
}

Outcome ac9(Lab& lab) {
  Outcome o;
  all_hold(o, lab.get("log-harnack-ou"), {"cor12.2"}, kOracleAbs);
  all_hold(o, lab.get("kernel-ou"), {"cor13.3.kernel", "cor13.3.entropy"}, kOracleAbs);
  return o;
}

Outcome ac10(Lab& lab) {
  Outcome o;
  const auto& r = lab.get("logsobolev-ou");
  if (reports(r, "cor13.1").size() != 3) o.fail("expected 3 reports");
  all_hold(o, r, {"cor13.1"}, 1e300);
  return o;
}

Outcome ac11(Lab& lab) {
  Outcome o;
  all_hold(o, lab.get("xi-ou"), {"lemma31.P1.lower", "lemma31.P1.upper", "lemma31.LH1"}, 1e300);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac12(const std::string& cli, const fs::path& suite) {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / "reflab-acceptance";
  fs::remove_all(base);
  struct Run {
    const char* name;
    int jobs;
  };
  const Run runs[] = {{"a", 1}, {"b", 1}, {"c", 8}};
  for (const auto& run : runs) {
    const std::string cmd = "\"" + cli + "\" run all \"" + suite.string() + "\" --seed 42 --jobs " +
                            std::to_string(run.jobs) + " --out \"" + (base / run.name).string() + "\" > \"" +
                            (base / (std::string(run.name) + ".log")).string() + "\" 2>&1";
    fs::create_directories(base);
    const int status = std::system(cmd.c_str());
    if (status != 0) o.fail(std::string("run ") + run.name + " exited with status " + std::to_string(status));
  }
  const std::string a = slurp(base / "a" / "results.csv");
  if (a.size() < 100) o.fail("results.csv is empty");
  if (slurp(base / "b" / "results.csv") != a) o.fail("same seed, different results.csv");
  if (slurp(base / "c" / "results.csv") != a) o.fail("--jobs 1 and --jobs 8 differ");
  if (slurp(base / "c" / "reports.jsonl") != slurp(base / "a" / "reports.jsonl")) o.fail("reports.jsonl differ");
  o.note(std::to_string(std::count(a.begin(), a.end(), '\n') - 1) + " rows identical across 3 runs");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--jobs" && i + 1 < argc) jobs = std::atoi(argv[++i]);
    else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string s; std::getline(ss, s, ',');) only.insert(s);
    } else {
      std::fprintf(stderr, "usage: acceptance [--jobs N] [--only AC1,AC2]\n");
      return 2;
    }
  }
  const fs::path root = REFLAB_SOURCE_DIR;
  Lab lab(load_config((root / "configs" / "acceptance.cfg").string()), jobs);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1", [&] { return ac1(lab); }},
      {"AC2", [&] { return ac2(lab); }},
      {"AC3", [&] { return ac3(lab); }},
      {"AC4", [&] { return ac4(lab); }},
      {"AC5", [&] { return ac5(lab); }},
      {"AC6", [&] { return ac6(lab); }},
      {"AC7", [&] { return ac7(lab); }},
      {"AC8", [&] { return ac8(lab); }},
      {"AC9", [&] { return ac9(lab); }},
      {"AC10", [&] { return ac10(lab); }},
      {"AC11", [&] { return ac11(lab); }},
      {"AC12", [&] { return ac12(REFLAB_CLI, root / "configs" / "suite.cfg"); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("error: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%-5s %s  %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
