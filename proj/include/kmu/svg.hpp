#pragma once

#include <span>
#include <string>

namespace kmu::cli::svg {

// Simulation estimate with its confidence interval, positioned on the dB axis.
struct McPoint {
  double t_db;
  double p;
  double lo;
  double hi;
};

// Coverage-vs-threshold figure: analytic polyline plus simulation markers
// with error bars.  Either series may be empty.
void write_coverage_svg(const std::string& path, const std::string& title,
                        std::span<const double> t_db, std::span<const double> analytic,
                        std::span<const McPoint> mc);

// Squared-error-vs-threshold figure on a log y axis.
void write_sqerr_svg(const std::string& path, const std::string& title,
                     std::span<const double> t_db, std::span<const double> sq_err);

}  // namespace kmu::cli::svg
