#include "reflab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "reflab/builtins.hpp"
#include "reflab/digest.hpp"
#include "reflab/grid_field.hpp"

namespace reflab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s, const std::string& seps = " \t,") {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double plain_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("not a number: '" + s + "'");
  return v;
}

// number, or [a*]pi[/b]
double number(const std::string& s) {
  const auto at = s.find("pi");
  if (at == std::string::npos) return plain_number(s);
  double v = std::numbers::pi;
  const std::string pre = s.substr(0, at), post = s.substr(at + 2);
  if (!pre.empty()) {
    if (pre == "-") v = -v;
    else if (pre.back() == '*') v *= plain_number(pre.substr(0, pre.size() - 1));
    else throw ConfigError("not a number: '" + s + "'");
  }
  if (!post.empty()) {
    if (post[0] != '/') throw ConfigError("not a number: '" + s + "'");
    v /= plain_number(post.substr(1));
  }
  return v;
}

std::uint64_t count(const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("not a non-negative integer: '" + s + "'");
  return v;
}

int integer(const std::string& s) {
  int v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

bool boolean(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

std::vector<double> numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : tokens(s)) out.push_back(number(t));
  return out;
}

std::vector<Vec> point_list(const std::string& s) {
  std::vector<Vec> out;
  for (const auto& part : tokens(s, ";")) {
    const auto v = numbers(part);
    if (v.empty()) continue;
    Vec x(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<int>(i)] = v[i];
    out.push_back(x);
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + repr(v[i]);
  return s;
}

std::string join_points(const std::vector<Vec>& ps) {
  std::string s;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) s += "; ";
    for (int k = 0; k < ps[i].size(); ++k) s += (k ? " " : "") + repr(ps[i][k]);
  }
  return s;
}

std::string join_words(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define REFLAB_TEXT(name) \
  Field { #name, [](ExperimentConfig& c, const std::string& v) { c.name = v; }, [](const ExperimentConfig& c) { return c.name; } }
#define REFLAB_NUMBER(name) \
  Field { #name, [](ExperimentConfig& c, const std::string& v) { c.name = number(v); }, [](const ExperimentConfig& c) { return repr(c.name); } }
#define REFLAB_INT(name) \
  Field { #name, [](ExperimentConfig& c, const std::string& v) { c.name = integer(v); }, [](const ExperimentConfig& c) { return std::to_string(c.name); } }
#define REFLAB_COUNT(name) \
  Field { #name, [](ExperimentConfig& c, const std::string& v) { c.name = count(v); }, [](const ExperimentConfig& c) { return std::to_string(c.name); } }
#define REFLAB_BOOL(name) \
  Field { #name, [](ExperimentConfig& c, const std::string& v) { c.name = boolean(v); }, [](const ExperimentConfig& c) { return std::string(c.name ? "true" : "false"); } }
#define REFLAB_NUMBERS(name) \
  Field { #name, [](ExperimentConfig& c, const std::string& v) { c.name = numbers(v); }, [](const ExperimentConfig& c) { return join(c.name); } }
#define REFLAB_POINTS(name) \
  Field { #name, [](ExperimentConfig& c, const std::string& v) { c.name = point_list(v); }, [](const ExperimentConfig& c) { return join_points(c.name); } }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      REFLAB_TEXT(kind),
      REFLAB_TEXT(manifold),
      REFLAB_NUMBER(length),
      REFLAB_NUMBER(ou_rate),
      REFLAB_NUMBER(window),
      REFLAB_NUMBER(radius),
      REFLAB_NUMBER(r_in),
      REFLAB_NUMBER(r_out),
      REFLAB_TEXT(chart),
      REFLAB_TEXT(metric_grid),
      REFLAB_NUMBERS(grid_disk),
      REFLAB_TEXT(phi),
      REFLAB_NUMBERS(phi_coeffs),
      REFLAB_NUMBER(phi_r0),
      REFLAB_TEXT(phi_grid),
      REFLAB_INT(p),
      REFLAB_TEXT(K),
      REFLAB_INT(per_axis),
      REFLAB_NUMBER(geo_h),
      REFLAB_BOOL(strict_class_d),
      REFLAB_BOOL(negative),
      Field{"functions", [](ExperimentConfig& c, const std::string& v) { c.functions = tokens(v); },
            [](const ExperimentConfig& c) { return join_words(c.functions); }},
      REFLAB_POINTS(points),
      REFLAB_POINTS(ys),
      REFLAB_NUMBERS(times),
      REFLAB_COUNT(n),
      REFLAB_NUMBER(h),
      REFLAB_COUNT(seed),
      REFLAB_COUNT(chunk),
      REFLAB_TEXT(scheme),
      REFLAB_NUMBER(delta),
      REFLAB_NUMBER(exit_radius),
      REFLAB_NUMBER(bias),
      REFLAB_TEXT(oracle),
      REFLAB_INT(pde_intervals),
      REFLAB_INT(pde_levels),
      REFLAB_NUMBER(pde_k),
      REFLAB_INT(truncation),
      REFLAB_INT(kernel_intervals),
      REFLAB_INT(hwi_nodes),
      REFLAB_INT(ls1_nodes),
      REFLAB_TEXT(xi),
  };
  return table;
}

#undef REFLAB_TEXT
#undef REFLAB_NUMBER
#undef REFLAB_INT
#undef REFLAB_COUNT
#undef REFLAB_BOOL
#undef REFLAB_NUMBERS
#undef REFLAB_POINTS

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return &f;
  return nullptr;
}

int natural_dim(const std::string& manifold) {
  return manifold == "interval" || manifold == "half_line" ? 1 : 2;
}

}  // namespace

const std::vector<std::string>& known_kinds() {
  static const std::vector<std::string> kinds = {
      "geometry-check", "class-d",          "curvature-bound", "simulate",         "local-time",
      "girsanov-test",  "verify-thm11",     "verify-cor12",    "verify-poincare",  "verify-logsobolev",
      "verify-hwi",     "verify-kernel",    "verify-ls1",      "verify-xi"};
  return kinds;
}

std::string ExperimentConfig::serialize() const {
  std::string s = "[experiment " + label + "]\n";
  for (const auto& f : fields()) s += std::string(f.key) + " = " + f.get(*this) + "\n";
  return s;
}

std::string ExperimentConfig::digest() const { return hex64(fnv1a64(serialize())); }

bool ExperimentConfig::operator==(const ExperimentConfig& o) const { return serialize() == o.serialize(); }

std::string SuiteConfig::serialize() const {
  std::string s;
  for (std::size_t i = 0; i < experiments.size(); ++i) s += (i ? "\n" : "") + experiments[i].serialize();
  return s;
}

SuiteConfig parse_config(const std::string& text, const std::string& origin) {
  SuiteConfig suite;
  ExperimentConfig defaults;
  ExperimentConfig* target = &defaults;
  std::vector<std::string> labels;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated section header");
      const auto words = tokens(s.substr(1, s.size() - 2), " \t");
      if (words.size() == 1 && words[0] == "defaults") {
        if (!suite.experiments.empty()) fail("[defaults] must precede the experiments");
        target = &defaults;
        continue;
      }
      if (words.size() != 2 || words[0] != "experiment") fail("expected [defaults] or [experiment LABEL]");
      if (std::find(labels.begin(), labels.end(), words[1]) != labels.end()) fail("duplicate label '" + words[1] + "'");
      labels.push_back(words[1]);
      suite.experiments.push_back(defaults);
      suite.experiments.back().label = words[1];
      target = &suite.experiments.back();
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) fail("unknown key '" + key + "'");
    try {
      f->set(*target, value);
    } catch (const ConfigError& e) {
      fail("field '" + key + "': " + e.what());
    }
  }
  if (suite.experiments.empty()) suite.experiments.push_back(defaults);
  for (const auto& c : suite.experiments) {
    const auto problems = validate(c);
    if (!problems.empty()) {
      std::string msg = origin + ": experiment '" + c.label + "':";
      for (const auto& p : problems) msg += "\n  " + p;
      throw ConfigError(msg);
    }
  }
  return suite;
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> out;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  const auto& kinds = known_kinds();
  need(c.kind.empty() || std::find(kinds.begin(), kinds.end(), c.kind) != kinds.end(),
       "field 'kind': unknown subcommand '" + c.kind + "'");
  static const std::vector<std::string> manifolds = {"interval", "half_line", "disk", "annulus", "hemisphere", "grid"};
  need(std::find(manifolds.begin(), manifolds.end(), c.manifold) != manifolds.end(),
       "field 'manifold': unknown manifold '" + c.manifold + "'");
  need(c.manifold != "grid" || !c.metric_grid.empty(), "field 'metric_grid': required for manifold = grid");
  need(c.grid_disk.empty() || c.grid_disk.size() == 3, "field 'grid_disk': expected cx cy r");
  need(c.length > 0, "field 'length': must be positive");
  need(c.window > 0, "field 'window': must be positive");
  need(c.radius > 0, "field 'radius': must be positive");
  need(c.r_in > 0 && c.r_out > c.r_in, "fields 'r_in', 'r_out': need 0 < r_in < r_out");
  need(c.chart == "stereographic" || c.chart == "polar", "field 'chart': stereographic or polar");
  need(c.phi == "one" || c.phi == "radial_exp" || c.phi == "grid", "field 'phi': one, radial_exp or grid");
  need(c.phi != "grid" || !c.phi_grid.empty(), "field 'phi_grid': required for phi = grid");
  need(c.p >= 1, "field 'p': must be at least 1");
  if (c.K != "auto") {
    try {
      number(c.K);
    } catch (const ConfigError&) {
      out.push_back("field 'K': 'auto' or a number");
    }
  }
  need(c.per_axis >= 8, "field 'per_axis': at least 8");
  need(c.geo_h > 0, "field 'geo_h': must be positive");
  const int d = natural_dim(c.manifold);
  for (const auto* list : {&c.points, &c.ys})
    for (const auto& x : *list)
      need(x.size() == d, "fields 'points', 'ys': points need " + std::to_string(d) + " coordinates");
  for (double t : c.times) need(t >= 0 && std::isfinite(t), "field 'times': times must be non-negative");
  need(c.n >= 2, "field 'n': at least 2 paths");
  need(c.h > 0, "field 'h': must be positive");
  need(c.chunk >= 1, "field 'chunk': at least 1");
  need(c.scheme == "projection", "field 'scheme': only projection is implemented");
  need(c.delta > 0, "field 'delta': must be positive");
  need(c.bias >= 0, "field 'bias': must be non-negative");
  need(c.oracle == "pde" || c.oracle == "spectral" || c.oracle == "mc", "field 'oracle': pde, spectral or mc");
  need(c.pde_intervals >= 16 && c.pde_levels >= 2 && c.pde_k > 0, "fields 'pde_*': intervals >= 16, levels >= 2, k > 0");
  need(c.truncation >= 2, "field 'truncation': at least 2");
  need(c.kernel_intervals >= 16, "field 'kernel_intervals': at least 16");
  need(c.hwi_nodes >= 101, "field 'hwi_nodes': at least 101");
  need(c.ls1_nodes >= 2, "field 'ls1_nodes': at least 2");
  need(c.xi.rfind("exp:", 0) == 0 || c.xi.rfind("const:", 0) == 0, "field 'xi': exp:a or const:c");
  return out;
}

ManifoldSpec build_manifold(const ExperimentConfig& c) {
  if (c.manifold == "interval") return builtins::interval(c.length, c.ou_rate);
  if (c.manifold == "half_line") return builtins::half_line(c.ou_rate, c.window);
  if (c.manifold == "disk") return builtins::disk(c.radius);
  if (c.manifold == "annulus") return builtins::annulus(c.r_in, c.r_out);
  if (c.manifold == "hemisphere")
    return builtins::upper_hemisphere(c.radius, c.chart == "polar" ? builtins::SphereChart::polar
                                                                    : builtins::SphereChart::stereographic);
  if (c.manifold == "grid") {
    builtins::GridBoundary b;
    if (!c.grid_disk.empty()) b = {builtins::GridBoundary::Kind::disk, c.grid_disk[0], c.grid_disk[1], c.grid_disk[2]};
    return builtins::from_metric_grid(GridField::read_file(c.metric_grid, 3), b);
  }
  throw ConfigError("unknown manifold '" + c.manifold + "'");
}

PhiField build_phi(const ExperimentConfig& c) {
  if (c.phi == "one") return phi_one();
  if (c.phi == "radial_exp") return phi_radial_exp(c.phi_coeffs, c.phi_r0);
  if (c.phi == "grid") return phi_from_grid(GridField::read_file(c.phi_grid, 1));
  throw ConfigError("unknown phi '" + c.phi + "'");
}

SimConfig build_sim(const ExperimentConfig& c) {
  SimConfig s;
  s.h = c.h;
  s.scheme = c.scheme;
  s.seed = c.seed;
  return s;
}

PdeOptions build_pde(const ExperimentConfig& c) {
  PdeOptions o;
  o.intervals = c.pde_intervals;
  o.levels = c.pde_levels;
  o.k = c.pde_k;
  return o;
}

}  // namespace reflab
