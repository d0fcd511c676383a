#include "kmu/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace kmu::cli::csv {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

std::string format_row(const Row& r) {
  auto opt = [](const std::optional<double>& v) {
    return v.has_value() ? format_number(*v) : std::string();
  };
  std::ostringstream os;
  os << format_number(r.t_db) << ',' << opt(r.pc_analytic) << ',' << opt(r.pc_mc) << ','
     << opt(r.ci_low) << ',' << opt(r.ci_high) << ',';
  if (r.trials.has_value()) os << *r.trials;
  os << ',' << r.method << ',' << opt(r.residual) << ',' << opt(r.sq_err);
  return os.str();
}

Writer::Writer(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
}

void Writer::write_header() {
  out_ << kHeader << '\n';
  out_.flush();
}

void Writer::write_row(const Row& r) {
  out_ << format_row(r) << '\n';
  out_.flush();
}

}  // namespace kmu::cli::csv
