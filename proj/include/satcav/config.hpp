#pragma once

// Run configuration: a sectioned key = value document.
//
//   [physical]   SI inputs (rates in rad/s, or *_hz keys for rate/2pi)
//   [scaled]     dimensionless inputs and numerical settings
//   [sweep]      ranges for the selected mode
//   [oracle]     time-domain settings for oracle-check
//   [output]     path and format
//
// '#' and ';' start comments. Unknown sections or keys are errors.

#include "satcav/errors.hpp"
#include "satcav/params.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace satcav {

struct SweepSettings {
  double detuning_lo = -10.0;
  double detuning_hi = 10.0;
  int points = 201;
  double x_sq_lo = 0.0; ///< 0 selects the default curve range
  double x_sq_hi = 0.0;
  int points_per_decade = 256;
  std::vector<int> l_values{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<double> y_sq_values; ///< linewidth mode; empty uses [scaled] y_sq
  double y_sq_lo = 1.0;
  double y_sq_hi = 1e5;
  std::string signal; ///< "input" or "transmitted"; empty selects the mode default
  double delta0_lo = 0.0;
  double delta0_hi = 100.0;
  double rel_tol = 0.01;
  std::vector<std::string> rows; ///< table mode; empty selects all rows
};

struct OracleSettings {
  std::vector<double> nc0_values{0.0, 60.0, 600.0};
  std::vector<double> delta0_values{0.0, 26.0, 260.0};
  std::vector<double> y_sq_values{0.5, 60.0, 900.0};
  double detuning = 0.5;
  double kappa_over_gp = 20.0;
  int phases = 8;
  int phases_at_rest = 256;
  double t_end = 400.0;
  double drift_tol = 1e-5;
  int l_max = 256;
  bool step_check = false;
};

struct OutputSettings {
  std::string path;
  std::string format = "csv";
};

struct RunConfig {
  std::string mode;
  std::optional<PhysicalParams> physical;
  ScaledParams scaled;
  SweepSettings sweep;
  OracleSettings oracle;
  OutputSettings output;
  std::string canonical; ///< normalised "section.key=value" lines, sorted
  std::uint64_t hash = 0;
};

inline const std::vector<std::string>& known_modes() {
  static const std::vector<std::string> modes{"spectrum",      "power-curve",  "converge",
                                              "linewidth",     "optimal-power", "critical-temp",
                                              "table",         "oracle-check"};
  return modes;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

struct Document {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::map<std::string, int> header_lines;

  bool has(const std::string& name) const { return sections.count(name) > 0; }
};

inline Document read_document(const std::string& text) {
  Document doc;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if ((s[i] == '#' || s[i] == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1])))) {
        s.resize(i);
        break;
      }
    }
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", line);
      if (doc.has(section)) throw ConfigError("duplicate section [" + section + "]", line);
      doc.sections[section];
      doc.header_lines[section] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    if (section.empty()) throw ConfigError("key outside of a section", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line);
    auto& sec = doc.sections[section];
    if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    sec[key] = {value, line};
  }
  return doc;
}

inline double to_double(const Entry& e, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' is not a number: " + e.value, e.line);
  }
}

inline int to_int(const Entry& e, const std::string& key) {
  const double v = to_double(e, key);
  if (v != static_cast<double>(static_cast<long long>(v)) || std::abs(v) > 2e9)
    throw ConfigError("'" + key + "' must be an integer: " + e.value, e.line);
  return static_cast<int>(v);
}

inline bool to_bool(const Entry& e, const std::string& key) {
  std::string v = e.value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError("'" + key + "' must be a boolean: " + e.value, e.line);
}

inline std::vector<std::string> split_list(const Entry& e) {
  std::vector<std::string> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> to_doubles(const Entry& e, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(e)) out.push_back(to_double({item, e.line}, key));
  if (out.empty()) throw ConfigError("'" + key + "' is an empty list", e.line);
  return out;
}

inline std::vector<int> to_ints(const Entry& e, const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split_list(e)) out.push_back(to_int({item, e.line}, key));
  if (out.empty()) throw ConfigError("'" + key + "' is an empty list", e.line);
  return out;
}

/// Visits every key of a section through a handler table; keys without a
/// handler are rejected.
template <typename Handlers>
void apply_section(const Document& doc, const std::string& name, const Handlers& handlers) {
  const auto it = doc.sections.find(name);
  if (it == doc.sections.end()) return;
  for (const auto& [key, entry] : it->second) {
    const auto h = handlers.find(key);
    if (h == handlers.end())
      throw ConfigError("unknown key '" + key + "' in [" + name + "]", entry.line);
    h->second(entry, key);
  }
}

inline void require_ordered(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

} // namespace detail

/// Command-line values that take precedence over the document.
struct ConfigOverrides {
  std::optional<int> l_max;
  std::optional<int> vel_nodes;
};

/// Parses and validates a configuration. `mode` may be empty when the
/// document itself names it ([output] mode = ...).
inline RunConfig parse_config(const std::string& text, const std::string& mode = {},
                              const ConfigOverrides& overrides = {}) {
  using detail::Entry;
  using Handler = std::function<void(const Entry&, const std::string&)>;
  using Table = std::map<std::string, Handler>;

  const detail::Document doc = detail::read_document(text);
  static const std::set<std::string> sections{"physical", "scaled", "sweep", "oracle", "output"};
  for (const auto& [name, line] : doc.header_lines)
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]", line);
  if (!doc.has("physical") && !doc.has("scaled"))
    throw ConfigError("either [physical] or [scaled] is required");

  RunConfig cfg;
  cfg.mode = mode;

  // [physical]
  if (doc.has("physical")) {
    PhysicalParams p;
    bool gamma_p_set = false;
    auto rate = [](double& field) {
      return [&field](const Entry& e, const std::string& k) { field = detail::to_double(e, k); };
    };
    auto rate_hz = [](double& field) {
      return [&field](const Entry& e, const std::string& k) {
        field = constants::two_pi * detail::to_double(e, k);
      };
    };
    Table t{
        {"gamma", rate(p.gamma)},
        {"gamma_hz", rate_hz(p.gamma)},
        {"gamma_laser", rate(p.gamma_laser)},
        {"gamma_laser_hz", rate_hz(p.gamma_laser)},
        {"kappa", rate(p.kappa)},
        {"kappa_hz", rate_hz(p.kappa)},
        {"gamma_p", [&](const Entry& e, const std::string& k) { p.gamma_p = detail::to_double(e, k); gamma_p_set = true; }},
        {"gamma_p_hz", [&](const Entry& e, const std::string& k) { p.gamma_p = constants::two_pi * detail::to_double(e, k); gamma_p_set = true; }},
        {"lambda", rate(p.lambda)},
        {"atom_mass", rate(p.atom_mass)},
        {"atom_mass_amu", [&](const Entry& e, const std::string& k) { p.atom_mass = detail::to_double(e, k) * constants::atomic_mass_unit; }},
        {"n_atoms", rate(p.n_atoms)},
        {"temperature", rate(p.temperature)},
        {"p_in", rate(p.p_in)},
        {"epsilon", rate(p.epsilon)},
        {"sideband_ratio", rate(p.sideband_ratio)},
        {"finesse", rate(p.finesse)},
        {"nc0", rate(p.nc0)},
    };
    detail::apply_section(doc, "physical", t);
    if (!gamma_p_set) p.gamma_p = PhysicalParams::default_gamma_p(p.gamma, p.gamma_laser);
    try {
      p.validate();
    } catch (const InvalidParams& e) {
      throw ConfigError(std::string("[physical] ") + e.what());
    }
    cfg.physical = p;
    cfg.scaled = to_scaled(p, cfg.scaled);
  }

  // [scaled] overrides derived values
  {
    ScaledParams& s = cfg.scaled;
    auto dbl = [](double& f) {
      return [&f](const Entry& e, const std::string& k) { f = detail::to_double(e, k); };
    };
    auto integer = [](int& f) {
      return [&f](const Entry& e, const std::string& k) { f = detail::to_int(e, k); };
    };
    Table t{
        {"nc0", dbl(s.nc0)},
        {"delta0_over_gp", dbl(s.delta0_over_gp)},
        {"detuning_over_gp", dbl(s.detuning_over_gp)},
        {"y_sq", dbl(s.y_sq)},
        {"gamma_over_gp", dbl(s.gamma_over_gp)},
        {"l_max", integer(s.l_max)},
        {"vel_nodes", integer(s.vel_nodes)},
        {"newton_tol", dbl(s.newton_tol)},
        {"max_newton_iters", integer(s.max_newton_iters)},
    };
    detail::apply_section(doc, "scaled", t);
    if (cfg.physical) cfg.physical->nc0 = s.nc0; // keep C0 = NC0/N consistent
    if (overrides.l_max) s.l_max = *overrides.l_max;
    if (overrides.vel_nodes) s.vel_nodes = *overrides.vel_nodes;
    try {
      s.validate();
    } catch (const InvalidParams& e) {
      throw ConfigError(std::string("[scaled] ") + e.what());
    }
  }

  // [sweep]
  {
    SweepSettings& w = cfg.sweep;
    auto dbl = [](double& f) {
      return [&f](const Entry& e, const std::string& k) { f = detail::to_double(e, k); };
    };
    Table t{
        {"detuning_lo", dbl(w.detuning_lo)},
        {"detuning_hi", dbl(w.detuning_hi)},
        {"points", [&](const Entry& e, const std::string& k) { w.points = detail::to_int(e, k); }},
        {"x_sq_lo", dbl(w.x_sq_lo)},
        {"x_sq_hi", dbl(w.x_sq_hi)},
        {"points_per_decade", [&](const Entry& e, const std::string& k) { w.points_per_decade = detail::to_int(e, k); }},
        {"l_values", [&](const Entry& e, const std::string& k) { w.l_values = detail::to_ints(e, k); }},
        {"y_sq_values", [&](const Entry& e, const std::string& k) { w.y_sq_values = detail::to_doubles(e, k); }},
        {"y_sq_lo", dbl(w.y_sq_lo)},
        {"y_sq_hi", dbl(w.y_sq_hi)},
        {"signal", [&](const Entry& e, const std::string&) {
           if (e.value != "input" && e.value != "transmitted")
             throw ConfigError("signal must be 'input' or 'transmitted'", e.line);
           w.signal = e.value;
         }},
        {"delta0_lo", dbl(w.delta0_lo)},
        {"delta0_hi", dbl(w.delta0_hi)},
        {"rel_tol", dbl(w.rel_tol)},
        {"rows", [&](const Entry& e, const std::string&) { w.rows = detail::split_list(e); }},
    };
    detail::apply_section(doc, "sweep", t);
    detail::require_ordered(w.detuning_hi >= w.detuning_lo, "[sweep] detuning_hi < detuning_lo");
    detail::require_ordered(w.points >= 1, "[sweep] points must be >= 1");
    detail::require_ordered(w.x_sq_lo >= 0.0 && (w.x_sq_hi == 0.0 || w.x_sq_hi > w.x_sq_lo),
                            "[sweep] x_sq range must be ordered and non-negative");
    detail::require_ordered(w.points_per_decade >= 2, "[sweep] points_per_decade must be >= 2");
    detail::require_ordered(w.y_sq_lo > 0.0 && w.y_sq_hi > w.y_sq_lo,
                            "[sweep] y_sq range must be positive and ordered");
    detail::require_ordered(w.delta0_lo >= 0.0 && w.delta0_hi > w.delta0_lo,
                            "[sweep] delta0 range must be non-negative and ordered");
    detail::require_ordered(w.rel_tol > 0.0 && w.rel_tol < 1.0, "[sweep] rel_tol must lie in (0, 1)");
    for (std::size_t i = 1; i < w.l_values.size(); ++i)
      detail::require_ordered(w.l_values[i] > w.l_values[i - 1], "[sweep] l_values must increase");
    for (int l : w.l_values)
      detail::require_ordered(l >= 0 && l % 2 == 0, "[sweep] l_values must be even and >= 0");
    for (double v : w.y_sq_values) detail::require_ordered(v > 0.0, "[sweep] y_sq_values must be positive");
  }

  // [oracle]
  {
    OracleSettings& o = cfg.oracle;
    auto dbl = [](double& f) {
      return [&f](const Entry& e, const std::string& k) { f = detail::to_double(e, k); };
    };
    auto integer = [](int& f) {
      return [&f](const Entry& e, const std::string& k) { f = detail::to_int(e, k); };
    };
    Table t{
        {"nc0_values", [&](const Entry& e, const std::string& k) { o.nc0_values = detail::to_doubles(e, k); }},
        {"delta0_values", [&](const Entry& e, const std::string& k) { o.delta0_values = detail::to_doubles(e, k); }},
        {"y_sq_values", [&](const Entry& e, const std::string& k) { o.y_sq_values = detail::to_doubles(e, k); }},
        {"detuning", dbl(o.detuning)},
        {"kappa_over_gp", dbl(o.kappa_over_gp)},
        {"phases", integer(o.phases)},
        {"phases_at_rest", integer(o.phases_at_rest)},
        {"t_end", dbl(o.t_end)},
        {"drift_tol", dbl(o.drift_tol)},
        {"l_max", integer(o.l_max)},
        {"step_check", [&](const Entry& e, const std::string& k) { o.step_check = detail::to_bool(e, k); }},
    };
    detail::apply_section(doc, "oracle", t);
    detail::require_ordered(o.kappa_over_gp > 0.0 && o.t_end > 0.0 && o.drift_tol > 0.0,
                            "[oracle] kappa_over_gp, t_end and drift_tol must be positive");
    detail::require_ordered(o.phases >= 1 && o.phases_at_rest >= o.phases,
                            "[oracle] need 1 <= phases <= phases_at_rest");
    detail::require_ordered(o.l_max >= 0 && o.l_max % 2 == 0, "[oracle] l_max must be even");
  }

  // [output]
  {
    OutputSettings& out = cfg.output;
    Table t{
        {"path", [&](const Entry& e, const std::string&) { out.path = e.value; }},
        {"format", [&](const Entry& e, const std::string&) {
           if (e.value != "csv" && e.value != "json")
             throw ConfigError("format must be 'csv' or 'json'", e.line);
           out.format = e.value;
         }},
        {"mode", [&](const Entry& e, const std::string&) {
           if (cfg.mode.empty()) cfg.mode = e.value;
         }},
    };
    detail::apply_section(doc, "output", t);
  }

  if (cfg.mode.empty()) throw ConfigError("no mode given");
  if (std::find(known_modes().begin(), known_modes().end(), cfg.mode) == known_modes().end())
    throw ConfigError("unknown mode '" + cfg.mode + "'");

  std::ostringstream canon;
  canon << "mode=" << cfg.mode << '\n';
  for (const auto& [section, entries] : doc.sections)
    for (const auto& [key, entry] : entries) canon << section << '.' << key << '=' << entry.value << '\n';
  if (overrides.l_max) canon << "override.l_max=" << *overrides.l_max << '\n';
  if (overrides.vel_nodes) canon << "override.vel_nodes=" << *overrides.vel_nodes << '\n';
  cfg.canonical = canon.str();
  cfg.hash = fnv1a(cfg.canonical);
  return cfg;
}

} // namespace satcav
