#pragma once

#include <cstdint>
#include <istream>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmu/coverage.hpp"
#include "kmu/mcsim.hpp"

namespace kmu::cli {

// Raised for any malformed or invalid experiment file; the message carries
// "<file>:<line>:" when the offending line is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputPaths {
  std::string csv;         // canonical output; required by every sweep command
  std::string svg;         // coverage plot, empty disables
  std::string sq_err_svg;  // squared-error plot, empty disables
};

// A fully validated experiment: model, analysis controls, simulation
// controls, the dB sweep grid, and where the results go.
struct Experiment {
  explicit Experiment(coverage::NetworkModel m) : model(std::move(m)) {}

  coverage::NetworkModel model;
  coverage::Method method = coverage::Method::automatic;
  double eps_weights = 1e-9;
  std::size_t max_series_order = 64;
  mcsim::SimConfig sim;
  std::vector<double> t_db;  // ascending sweep grid in dB
  OutputPaths out;
};

// Values given on the command line; each one overrides its file counterpart.
struct Overrides {
  std::string out_csv;
  std::string method;
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool has_trials = false;
  std::uint64_t trials = 0;
};

double db_to_linear(double t_db);
double linear_to_db(double t_linear);

coverage::Method parse_method(const std::string& text);

// Parses and validates; `name` labels error messages (usually the file path).
Experiment parse_experiment(std::istream& in, const std::string& name,
                            const Overrides& overrides);

Experiment load_experiment(const std::string& path, const Overrides& overrides);

}  // namespace kmu::cli
