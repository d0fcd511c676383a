#include "kmu/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kmu/fading.hpp"

namespace kmu::cli {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Entry {
  std::string value;
  int line;
};

using Block = std::map<std::string, Entry>;
using Blocks = std::map<std::string, Block>;

// Every legal section and key; anything else is rejected with its line number.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"network", {"lambda", "alpha"}},
      {"desired", {"kind", "kappa", "mu", "m", "k", "m_hat", "mean_power"}},
      {"interferer", {"kind", "kappa", "mu", "m", "k", "m_hat", "mean_power"}},
      {"sweep", {"t_db_start", "t_db_stop", "t_db_step"}},
      {"analysis", {"method", "eps_weights", "max_series_order"}},
      {"sim",
       {"trials", "seed", "min_expected_points", "window_radius", "ci_level",
        "far_field_compensation"}},
      {"output", {"csv", "svg", "sq_err_svg"}},
  };
  return s;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
  std::ostringstream os;
  os << name << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

[[noreturn]] void fail(const std::string& name, const std::string& msg) {
  throw ConfigError(name + ": " + msg);
}

Blocks parse_blocks(std::istream& in, const std::string& name) {
  Blocks blocks;
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        fail(name, line_no, "malformed section header '" + line + "'");
      }
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (schema().find(section) == schema().end()) {
        fail(name, line_no, "unknown section '" + section + "'");
      }
      if (blocks.find(section) != blocks.end()) {
        fail(name, line_no, "duplicate section '" + section + "'");
      }
      blocks[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(name, line_no, "expected 'key = value' or '[section]'");
    }
    if (section.empty()) {
      fail(name, line_no, "key outside of any section");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(name, line_no, "empty key");
    if (value.empty()) fail(name, line_no, "empty value for key '" + key + "'");
    if (schema().at(section).find(key) == schema().at(section).end()) {
      fail(name, line_no, "unknown key '" + key + "' in section [" + section + "]");
    }
    auto [it, inserted] = blocks[section].emplace(key, Entry{value, line_no});
    if (!inserted) {
      fail(name, line_no,
           "duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) +
               ")");
    }
  }
  return blocks;
}

double to_double(const std::string& name, const Entry& e, const std::string& key) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(name, e.line, "key '" + key + "' needs a finite number, got '" + e.value + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& name, const Entry& e, const std::string& key) {
  std::uint64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    fail(name, e.line, "key '" + key + "' needs a non-negative integer, got '" + e.value + "'");
  }
  return v;
}

bool to_bool(const std::string& name, const Entry& e, const std::string& key) {
  const std::string v = lower(e.value);
  if (v == "true") return true;
  if (v == "false") return false;
  fail(name, e.line, "key '" + key + "' needs true or false, got '" + e.value + "'");
}

const Entry& require(const std::string& name, const Blocks& blocks, const std::string& section,
                     const std::string& key) {
  const auto bit = blocks.find(section);
  if (bit == blocks.end()) fail(name, "missing required section [" + section + "]");
  const auto kit = bit->second.find(key);
  if (kit == bit->second.end()) {
    fail(name, "missing required key '" + key + "' in section [" + section + "]");
  }
  return kit->second;
}

const Entry* find(const Blocks& blocks, const std::string& section, const std::string& key) {
  const auto bit = blocks.find(section);
  if (bit == blocks.end()) return nullptr;
  const auto kit = bit->second.find(key);
  return kit == bit->second.end() ? nullptr : &kit->second;
}

// Builds one fading block.  Each kind pulls exactly the keys it defines;
// leftovers are flagged so a typo cannot silently fall back to a default.
fading::FadingParams build_fading(const std::string& name, const Blocks& blocks,
                                  const std::string& section,
                                  const fading::FadingParams* same_source) {
  const Entry& kind_e = require(name, blocks, section, "kind");
  const std::string kind = lower(kind_e.value);

  std::set<std::string> used = {"kind"};
  auto num = [&](const std::string& key) {
    used.insert(key);
    return to_double(name, require(name, blocks, section, key), key);
  };
  auto num_or = [&](const std::string& key, double fallback) {
    used.insert(key);
    const Entry* e = find(blocks, section, key);
    return e == nullptr ? fallback : to_double(name, *e, key);
  };
  auto shadowing = [&](const std::string& key) {
    used.insert(key);
    const Entry& e = require(name, blocks, section, key);
    const std::string v = lower(e.value);
    if (v == "inf" || v == "infinite") return fading::infinite_m;
    return to_double(name, e, key);
  };

  auto finish = [&](fading::FadingParams p) {
    for (const auto& [key, entry] : blocks.at(section)) {
      if (used.find(key) == used.end()) {
        fail(name, entry.line, "key '" + key + "' is not used by kind '" + kind + "'");
      }
    }
    return p;
  };

  try {
    if (kind == "same") {
      if (same_source == nullptr) {
        fail(name, kind_e.line, "kind 'same' is only valid in [interferer]");
      }
      return finish(*same_source);
    }
    const double mean_power = num_or("mean_power", 1.0);
    if (kind == "rayleigh") return finish(fading::rayleigh(mean_power));
    if (kind == "rician") return finish(fading::rician(num("k"), mean_power));
    if (kind == "rician_shadowed") {
      return finish(fading::rician_shadowed(num("k"), shadowing("m"), mean_power));
    }
    if (kind == "nakagami") return finish(fading::nakagami(num("m_hat"), mean_power));
    if (kind == "kappa_mu") return finish(fading::kappa_mu(num("kappa"), num("mu"), mean_power));
    if (kind == "kappa_mu_shadowed") {
      return finish(
          fading::FadingParams(num("kappa"), num("mu"), shadowing("m"), mean_power));
    }
  } catch (const std::invalid_argument& e) {
    fail(name, "[" + section + "]: " + e.what());
  }
  fail(name, kind_e.line, "unknown fading kind '" + kind + "'");
}

std::vector<double> build_sweep(const std::string& name, const Blocks& blocks) {
  const double start = to_double(name, require(name, blocks, "sweep", "t_db_start"), "t_db_start");
  const double stop = to_double(name, require(name, blocks, "sweep", "t_db_stop"), "t_db_stop");
  const double step = to_double(name, require(name, blocks, "sweep", "t_db_step"), "t_db_step");
  if (!(step > 0.0)) fail(name, "[sweep]: t_db_step must be positive");
  if (start > stop) fail(name, "[sweep]: empty range, t_db_start exceeds t_db_stop");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

}  // namespace

double db_to_linear(double t_db) { return std::pow(10.0, t_db / 10.0); }

double linear_to_db(double t_linear) { return 10.0 * std::log10(t_linear); }

coverage::Method parse_method(const std::string& text) {
  const std::string m = lower(trim(text));
  if (m == "exact") return coverage::Method::exact_integer_mu;
  if (m == "approx") return coverage::Method::rician_approx;
  if (m == "auto") return coverage::Method::automatic;
  throw ConfigError("unknown method '" + text + "' (expected exact, approx, or auto)");
}

Experiment parse_experiment(std::istream& in, const std::string& name,
                            const Overrides& overrides) {
  const Blocks blocks = parse_blocks(in, name);

  const double lambda = to_double(name, require(name, blocks, "network", "lambda"), "lambda");
  const double alpha = to_double(name, require(name, blocks, "network", "alpha"), "alpha");

  const fading::FadingParams desired = build_fading(name, blocks, "desired", nullptr);
  const fading::FadingParams interferer = build_fading(name, blocks, "interferer", &desired);

  Experiment exp([&] {
    try {
      return coverage::NetworkModel(lambda, alpha, desired, interferer);
    } catch (const std::invalid_argument& e) {
      fail(name, "[network]: " + std::string(e.what()));
    }
  }());

  exp.t_db = build_sweep(name, blocks);

  if (const Entry* e = find(blocks, "analysis", "method")) {
    try {
      exp.method = parse_method(e->value);
    } catch (const ConfigError& err) {
      fail(name, e->line, err.what());
    }
  }
  if (const Entry* e = find(blocks, "analysis", "eps_weights")) {
    exp.eps_weights = to_double(name, *e, "eps_weights");
    if (!(exp.eps_weights > 0.0 && exp.eps_weights < 1.0)) {
      fail(name, e->line, "eps_weights must lie strictly between 0 and 1");
    }
  }
  if (const Entry* e = find(blocks, "analysis", "max_series_order")) {
    exp.max_series_order = static_cast<std::size_t>(to_u64(name, *e, "max_series_order"));
    if (exp.max_series_order == 0) fail(name, e->line, "max_series_order must be at least 1");
  }

  if (const Entry* e = find(blocks, "sim", "trials")) {
    exp.sim.trials = to_u64(name, *e, "trials");
  }
  if (const Entry* e = find(blocks, "sim", "seed")) {
    exp.sim.seed = to_u64(name, *e, "seed");
  }
  if (const Entry* e = find(blocks, "sim", "min_expected_points")) {
    exp.sim.min_expected_points = to_double(name, *e, "min_expected_points");
  }
  if (const Entry* e = find(blocks, "sim", "window_radius")) {
    exp.sim.window_radius = to_double(name, *e, "window_radius");
  }
  if (const Entry* e = find(blocks, "sim", "ci_level")) {
    exp.sim.ci_level = to_double(name, *e, "ci_level");
  }
  if (const Entry* e = find(blocks, "sim", "far_field_compensation")) {
    exp.sim.far_field_compensation = to_bool(name, *e, "far_field_compensation");
  }

  if (const Entry* e = find(blocks, "output", "csv")) exp.out.csv = e->value;
  if (const Entry* e = find(blocks, "output", "svg")) exp.out.svg = e->value;
  if (const Entry* e = find(blocks, "output", "sq_err_svg")) exp.out.sq_err_svg = e->value;

  if (!overrides.out_csv.empty()) exp.out.csv = overrides.out_csv;
  if (!overrides.method.empty()) {
    try {
      exp.method = parse_method(overrides.method);
    } catch (const ConfigError& err) {
      fail(name, err.what());
    }
  }
  if (overrides.has_seed) exp.sim.seed = overrides.seed;
  if (overrides.has_trials) exp.sim.trials = overrides.trials;

  // Re-check the simulation constraints eagerly so a bad file fails at load,
  // not after a long analytic sweep.
  if (exp.sim.trials == 0) fail(name, "[sim]: trials must be at least 1");
  if (!(exp.sim.ci_level > 0.0 && exp.sim.ci_level < 1.0)) {
    fail(name, "[sim]: ci_level must lie strictly between 0 and 1");
  }
  if (!(exp.sim.min_expected_points > 0.0)) {
    fail(name, "[sim]: min_expected_points must be positive");
  }
  if (exp.sim.window_radius < 0.0) fail(name, "[sim]: window_radius must be non-negative");
  if (exp.sim.window_radius > 0.0) {
    const double t_r = kPi * exp.model.density * exp.sim.window_radius * exp.sim.window_radius;
    if (t_r < exp.sim.min_expected_points) {
      fail(name, "[sim]: window_radius holds fewer than min_expected_points stations");
    }
  }

  return exp;
}

Experiment load_experiment(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_experiment(in, path, overrides);
}

}  // namespace kmu::cli
