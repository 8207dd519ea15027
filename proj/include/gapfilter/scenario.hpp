#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gapfilter/common.hpp"
#include "gapfilter/geometry.hpp"
#include "gapfilter/minimax.hpp"
#include "gapfilter/model.hpp"

namespace gapfilter {

struct RunOptions {
  std::uint64_t seed = 1;
  int paths = 10000;
  std::vector<double> truncation;  // horizons for the truncated command
  int saddle_samples = 100;
  double theta = 0.5;
  int max_iterations = 500;
};

/// Complete problem statement as read from a scenario file.
struct Scenario {
  std::string name;
  double step = 0.0;
  double horizon = 0.0;
  double obs_horizon = 0.0;  // 0 = let the grid choose the default window
  ObservationGeometry geometry;
  WeightFunction weight;
  SpectralDensity f = ConstantBand{1.0};
  SpectralDensity g = ConstantBand{0.0};
  std::optional<DensityClass> class_f, class_g;
  RunOptions run;
};

struct ParseIssue {
  int line = 0;
  std::string message;
};

struct ScenarioParse {
  std::optional<Scenario> scenario;
  std::vector<ParseIssue> issues;

  bool ok() const { return issues.empty(); }

  std::string describe() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < issues.size(); ++i) {
      if (i) os << '\n';
      os << "line " << issues[i].line << ": " << issues[i].message;
    }
    return os.str();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& s, double* out) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return false;
    *out = v;
    return true;
  } catch (...) {
    return false;
  }
}

inline bool parse_i64(const std::string& s, std::int64_t* out) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) return false;
    *out = v;
    return true;
  } catch (...) {
    return false;
  }
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

/// Raw density section before the family is interpreted.
struct DensitySpec {
  std::string family;
  int family_line = 0;
  std::optional<double> level, power, width;
  std::vector<double> numerator, denominator;
  std::vector<double> tab_lambda, tab_value;
  int line_of_first_key = 0;
};

struct ClassSpec {
  std::string variant;
  std::optional<double> epsilon, power_cap;
  int line_of_first_key = 0;
};

}  // namespace detail

/// Parses the scenario grammar:
///   # comment                     sections and "key = value" lines
///   name = <word>                 (before any section)
///   [grid]      step, horizon, obs_horizon
///   [geometry]  interval = <offset> <length>        (repeatable)
///   [weight]    family = box|triangle|tabulated, support = <lo> <hi>,
///               value = <t> <a>                     (repeatable)
///   [density.f] / [density.g]
///               family = constant|lorentzian|rational|tabulated,
///               level, power, width, numerator, denominator,
///               value = <lambda> <v>                (repeatable)
///   [class.f] / [class.g]
///               variant = l1ball|l2ball|contamination, epsilon, power_cap
///   [run]       seed, paths, truncation, saddle_samples, theta, max_iterations
/// Unknown sections or keys and duplicate sections are reported with their
/// line number; all issues are collected in one pass.
inline ScenarioParse parse_scenario(std::istream& in) {
  using detail::parse_double;
  using detail::parse_i64;
  using detail::split_ws;
  using detail::trim;

  ScenarioParse out;
  Scenario sc;
  auto issue = [&](int line, const std::string& msg) { out.issues.push_back({line, msg}); };

  static const std::set<std::string> known_sections = {
      "grid", "geometry", "weight", "density.f", "density.g", "class.f", "class.g", "run"};
  std::set<std::string> seen_sections;
  std::string section;  // empty = top level

  detail::DensitySpec df, dg;
  detail::ClassSpec cf, cg;
  bool has_step = false, has_horizon = false, has_weight_family = false, has_support = false;
  std::vector<std::pair<double, double>> weight_values;
  int weight_line = 0;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        issue(line_no, "malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!known_sections.count(section)) {
        issue(line_no, "unknown section [" + section + "]");
        section = "!skip";
        continue;
      }
      if (!seen_sections.insert(section).second)
        issue(line_no, "duplicate section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issue(line_no, "expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      issue(line_no, "empty key or value");
      continue;
    }

    auto want_double = [&](double* dst) {
      if (!parse_double(value, dst)) issue(line_no, "key '" + key + "': not a number: '" + value + "'");
    };
    auto want_pair = [&](double* a, double* b) {
      const auto toks = split_ws(value);
      if (toks.size() != 2 || !parse_double(toks[0], a) || !parse_double(toks[1], b))
        issue(line_no, "key '" + key + "': expected two numbers, got '" + value + "'");
    };
    auto want_list = [&](std::vector<double>* dst) {
      dst->clear();
      for (const auto& tok : split_ws(value)) {
        double v = 0.0;
        if (!parse_double(tok, &v)) {
          issue(line_no, "key '" + key + "': not a number: '" + tok + "'");
          return;
        }
        dst->push_back(v);
      }
    };

    if (section == "!skip") continue;

    if (section.empty()) {
      if (key == "name")
        sc.name = value;
      else
        issue(line_no, "unknown top-level key '" + key + "' (only 'name' is allowed)");
    } else if (section == "grid") {
      if (key == "step") {
        want_double(&sc.step);
        has_step = true;
      } else if (key == "horizon") {
        want_double(&sc.horizon);
        has_horizon = true;
      } else if (key == "obs_horizon") {
        want_double(&sc.obs_horizon);
      } else {
        issue(line_no, "unknown key '" + key + "' in [grid]");
      }
    } else if (section == "geometry") {
      if (key == "interval") {
        double off = 0.0, len = 0.0;
        want_pair(&off, &len);
        sc.geometry.intervals.push_back({off, len});
      } else {
        issue(line_no, "unknown key '" + key + "' in [geometry]");
      }
    } else if (section == "weight") {
      if (key == "family") {
        has_weight_family = true;
        weight_line = line_no;
        if (value == "box")
          sc.weight.family = WeightFunction::Family::box;
        else if (value == "triangle")
          sc.weight.family = WeightFunction::Family::triangle;
        else if (value == "tabulated")
          sc.weight.family = WeightFunction::Family::tabulated;
        else
          issue(line_no, "unknown weight family '" + value + "'");
      } else if (key == "support") {
        has_support = true;
        want_pair(&sc.weight.lo, &sc.weight.hi);
      } else if (key == "value") {
        double t = 0.0, a = 0.0;
        want_pair(&t, &a);
        weight_values.emplace_back(t, a);
      } else {
        issue(line_no, "unknown key '" + key + "' in [weight]");
      }
    } else if (section == "density.f" || section == "density.g") {
      detail::DensitySpec& d = section == "density.f" ? df : dg;
      if (!d.line_of_first_key) d.line_of_first_key = line_no;
      if (key == "family") {
        d.family = value;
        d.family_line = line_no;
      } else if (key == "level") {
        double v = 0.0;
        want_double(&v);
        d.level = v;
      } else if (key == "power") {
        double v = 0.0;
        want_double(&v);
        d.power = v;
      } else if (key == "width") {
        double v = 0.0;
        want_double(&v);
        d.width = v;
      } else if (key == "numerator") {
        want_list(&d.numerator);
      } else if (key == "denominator") {
        want_list(&d.denominator);
      } else if (key == "value") {
        double lam = 0.0, v = 0.0;
        want_pair(&lam, &v);
        d.tab_lambda.push_back(lam);
        d.tab_value.push_back(v);
      } else {
        issue(line_no, "unknown key '" + key + "' in [" + section + "]");
      }
    } else if (section == "class.f" || section == "class.g") {
      detail::ClassSpec& c = section == "class.f" ? cf : cg;
      if (!c.line_of_first_key) c.line_of_first_key = line_no;
      if (key == "variant") {
        c.variant = value;
      } else if (key == "epsilon") {
        double v = 0.0;
        want_double(&v);
        c.epsilon = v;
      } else if (key == "power_cap") {
        double v = 0.0;
        want_double(&v);
        c.power_cap = v;
      } else {
        issue(line_no, "unknown key '" + key + "' in [" + section + "]");
      }
    } else if (section == "run") {
      if (key == "seed") {
        std::int64_t v = 0;
        if (!parse_i64(value, &v) || v < 0)
          issue(line_no, "key 'seed': not a nonnegative integer: '" + value + "'");
        else
          sc.run.seed = static_cast<std::uint64_t>(v);
      } else if (key == "paths") {
        std::int64_t v = 0;
        if (!parse_i64(value, &v) || v < 1)
          issue(line_no, "key 'paths': not a positive integer: '" + value + "'");
        else
          sc.run.paths = static_cast<int>(v);
      } else if (key == "truncation") {
        want_list(&sc.run.truncation);
      } else if (key == "saddle_samples") {
        std::int64_t v = 0;
        if (!parse_i64(value, &v) || v < 1)
          issue(line_no, "key 'saddle_samples': not a positive integer");
        else
          sc.run.saddle_samples = static_cast<int>(v);
      } else if (key == "theta") {
        want_double(&sc.run.theta);
      } else if (key == "max_iterations") {
        std::int64_t v = 0;
        if (!parse_i64(value, &v) || v < 1)
          issue(line_no, "key 'max_iterations': not a positive integer");
        else
          sc.run.max_iterations = static_cast<int>(v);
      } else {
        issue(line_no, "unknown key '" + key + "' in [run]");
      }
    }
  }

  // assemble the typed pieces, reporting everything that is missing or off
  if (!has_step) issue(0, "[grid] step is required");
  if (!has_horizon) issue(0, "[grid] horizon is required");

  if (!seen_sections.count("weight")) {
    issue(0, "[weight] section is required");
  } else if (!has_weight_family) {
    issue(0, "[weight] needs 'family = ...'");
  } else if (sc.weight.family == WeightFunction::Family::tabulated) {
    if (weight_values.empty())
      issue(weight_line, "tabulated weight needs at least one 'value = t a' row");
    for (const auto& [t, a] : weight_values) {
      sc.weight.table_t.push_back(t);
      sc.weight.table_a.push_back(a);
    }
  } else if (!has_support) {
    issue(weight_line, "weight families box and triangle need 'support = lo hi'");
  }

  auto build_density = [&](const detail::DensitySpec& d, const char* which,
                           SpectralDensity* dst, bool required) {
    const int at = d.family_line ? d.family_line : d.line_of_first_key;
    if (d.family.empty()) {
      if (required || d.line_of_first_key)
        issue(at, std::string("[density.") + which + "] needs 'family = ...'");
      return;
    }
    auto reject = [&](bool used_level, bool used_power_width, bool used_rational,
                      bool used_values) {
      if (!used_level && d.level) issue(at, "'level' is not used by this density family");
      if (!used_power_width && (d.power || d.width))
        issue(at, "'power'/'width' are not used by this density family");
      if (!used_rational && (!d.numerator.empty() || !d.denominator.empty()))
        issue(at, "'numerator'/'denominator' are not used by this density family");
      if (!used_values && !d.tab_lambda.empty())
        issue(at, "'value' rows are not used by this density family");
    };
    if (d.family == "constant") {
      reject(true, false, false, false);
      if (!d.level)
        issue(at, "constant density needs 'level'");
      else
        *dst = ConstantBand{*d.level};
    } else if (d.family == "lorentzian") {
      reject(false, true, false, false);
      if (!d.power || !d.width)
        issue(at, "lorentzian density needs 'power' and 'width'");
      else
        *dst = Lorentzian{*d.power, *d.width};
    } else if (d.family == "rational") {
      reject(false, false, true, false);
      if (d.numerator.empty() || d.denominator.empty())
        issue(at, "rational density needs 'numerator' and 'denominator'");
      else
        *dst = RationalRatio{d.numerator, d.denominator};
    } else if (d.family == "tabulated") {
      reject(false, false, false, true);
      if (d.tab_lambda.empty())
        issue(at, "tabulated density needs 'value = lambda v' rows");
      else
        *dst = Tabulated{d.tab_lambda, d.tab_value};
    } else {
      issue(at, "unknown density family '" + d.family + "'");
    }
  };
  build_density(df, "f", &sc.f, true);
  if (!seen_sections.count("density.f")) issue(0, "[density.f] section is required");
  build_density(dg, "g", &sc.g, true);
  if (!seen_sections.count("density.g")) issue(0, "[density.g] section is required");

  auto build_class = [&](const detail::ClassSpec& c, const char* which,
                         std::optional<DensityClass>* dst) {
    if (!c.line_of_first_key) return;
    const int at = c.line_of_first_key;
    if (c.variant.empty()) {
      issue(at, std::string("[class.") + which + "] needs 'variant = ...'");
      return;
    }
    if (!c.epsilon) {
      issue(at, std::string("[class.") + which + "] needs 'epsilon'");
      return;
    }
    if (c.variant == "l1ball") {
      if (c.power_cap) issue(at, "'power_cap' is only used by the contamination variant");
      *dst = L1Ball{*c.epsilon};
    } else if (c.variant == "l2ball") {
      if (c.power_cap) issue(at, "'power_cap' is only used by the contamination variant");
      *dst = L2Ball{*c.epsilon};
    } else if (c.variant == "contamination") {
      if (!c.power_cap)
        issue(at, "contamination class needs 'power_cap'");
      else
        *dst = Contamination{*c.epsilon, *c.power_cap};
    } else {
      issue(at, "unknown class variant '" + c.variant + "'");
    }
  };
  build_class(cf, "f", &sc.class_f);
  build_class(cg, "g", &sc.class_g);

  if (sc.run.theta <= 0.0 || sc.run.theta > 1.0) issue(0, "[run] theta must lie in (0, 1]");

  if (out.issues.empty()) out.scenario = std::move(sc);
  return out;
}

inline ScenarioParse parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open scenario file " + path);
  return parse_scenario(in);
}

/// Loads a scenario or throws a validation_error carrying every parse issue
/// with its line number.
inline Scenario load_scenario(const std::string& path) {
  ScenarioParse p = parse_scenario_file(path);
  if (!p.ok()) throw validation_error(path + ":\n" + p.describe());
  return *p.scenario;
}

/// Grid + model construction for a parsed scenario.
inline ProcessModel scenario_model(const Scenario& sc) {
  const Grids grids = make_grids(sc.step, sc.horizon, sc.geometry, sc.obs_horizon);
  return make_process_model(grids, sc.weight, sc.f, sc.g);
}

}  // namespace gapfilter
