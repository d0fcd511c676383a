#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

namespace kmu::cli::csv {

// One output record; absent optionals render as empty fields.
struct Row {
  double t_db = 0.0;
  std::optional<double> pc_analytic;
  std::optional<double> pc_mc;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<std::uint64_t> trials;
  std::string method;  // empty renders as an empty field
  std::optional<double> residual;
  std::optional<double> sq_err;
};

inline constexpr const char* kHeader =
    "T_dB,pc_analytic,pc_mc,ci_low,ci_high,trials,method,residual,sq_err";

// Shortest round-trip-ish decimal with '.' separator, locale independent.
std::string format_number(double v);

std::string format_row(const Row& r);

// Streams rows as they are produced so a late failure still leaves a valid
// partial file behind.
class Writer {
 public:
  explicit Writer(const std::string& path);
  void write_header();
  void write_row(const Row& r);

 private:
  std::ofstream out_;
};

}  // namespace kmu::cli::csv
