#include "kmu/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace kmu::cli::svg {

namespace {

constexpr double kWidth = 840.0;
constexpr double kHeight = 560.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 820.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 510.0;

std::string num(double v, const char* fmt = "%.2f") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return std::string(buf);
}

struct Axis {
  double lo;
  double hi;
  double p0;  // pixel at lo
  double p1;  // pixel at hi

  double map(double v) const {
    if (hi == lo) return 0.5 * (p0 + p1);
    return p0 + (v - lo) / (hi - lo) * (p1 - p0);
  }
};

class Canvas {
 public:
  explicit Canvas(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("svg: cannot open '" + path + "' for writing");
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
         << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
         << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  }

  ~Canvas() { out_ << "</svg>\n"; }

  void line(double x1, double y1, double x2, double y2, const char* stroke, double width) {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
         << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width
         << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke,
                double width) {
    if (pts.empty()) return;
    out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width
         << "\" points=\"";
    for (const auto& [x, y] : pts) out_ << num(x) << ',' << num(y) << ' ';
    out_ << "\"/>\n";
  }

  void circle(double x, double y, double r, const char* fill) {
    out_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << r << "\" fill=\""
         << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, const char* anchor, double size,
            const char* fill = "#333333") {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\""
         << " font-size=\"" << size << "\" text-anchor=\"" << anchor << "\" fill=\"" << fill
         << "\">" << s << "</text>\n";
  }

 private:
  std::ofstream out_;
};

void draw_frame(Canvas& c, const std::string& title, const std::string& y_label) {
  c.line(kLeft, kTop, kLeft, kBottom, "#333333", 1.0);
  c.line(kLeft, kBottom, kRight, kBottom, "#333333", 1.0);
  c.text(0.5 * (kLeft + kRight), kTop - 14.0, title, "middle", 16);
  c.text(0.5 * (kLeft + kRight), kBottom + 38.0, "T (dB)", "middle", 13);
  c.text(18.0, 0.5 * (kTop + kBottom), y_label, "middle", 13);
}

void draw_x_ticks(Canvas& c, const Axis& ax, std::span<const double> values) {
  const std::size_t stride = values.size() <= 12 ? 1 : (values.size() + 11) / 12;
  for (std::size_t i = 0; i < values.size(); i += stride) {
    const double x = ax.map(values[i]);
    c.line(x, kBottom, x, kBottom + 5.0, "#333333", 1.0);
    c.line(x, kTop, x, kBottom, "#e0e0e0", 0.5);
    c.text(x, kBottom + 20.0, num(values[i], "%.6g"), "middle", 11);
  }
}

}  // namespace

void write_coverage_svg(const std::string& path, const std::string& title,
                        std::span<const double> t_db, std::span<const double> analytic,
                        std::span<const McPoint> mc) {
  if (t_db.empty()) throw std::invalid_argument("svg: empty threshold grid");
  const Axis ax{t_db.front(), t_db.back(), kLeft, kRight};
  const Axis ay{0.0, 1.0, kBottom, kTop};

  Canvas c(path);
  draw_frame(c, title, "coverage");
  draw_x_ticks(c, ax, t_db);
  for (int i = 0; i <= 5; ++i) {
    const double v = 0.2 * i;
    const double y = ay.map(v);
    c.line(kLeft - 5.0, y, kLeft, y, "#333333", 1.0);
    c.line(kLeft, y, kRight, y, "#e0e0e0", 0.5);
    c.text(kLeft - 10.0, y + 4.0, num(v, "%.1f"), "end", 11);
  }

  if (!analytic.empty()) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(analytic.size());
    for (std::size_t i = 0; i < analytic.size() && i < t_db.size(); ++i) {
      pts.emplace_back(ax.map(t_db[i]), ay.map(analytic[i]));
    }
    c.polyline(pts, "#1f77b4", 2.0);
  }

  for (const McPoint& p : mc) {
    const double x = ax.map(p.t_db);
    c.line(x, ay.map(p.lo), x, ay.map(p.hi), "#d62728", 1.5);
    c.line(x - 4.0, ay.map(p.lo), x + 4.0, ay.map(p.lo), "#d62728", 1.5);
    c.line(x - 4.0, ay.map(p.hi), x + 4.0, ay.map(p.hi), "#d62728", 1.5);
    c.circle(x, ay.map(p.p), 3.0, "#d62728");
  }

  double ly = kTop + 18.0;
  if (!analytic.empty()) {
    c.line(kRight - 150.0, ly - 4.0, kRight - 120.0, ly - 4.0, "#1f77b4", 2.0);
    c.text(kRight - 112.0, ly, "analytic", "start", 12);
    ly += 20.0;
  }
  if (!mc.empty()) {
    c.circle(kRight - 135.0, ly - 4.0, 3.0, "#d62728");
    c.text(kRight - 112.0, ly, "simulation", "start", 12);
  }
}

void write_sqerr_svg(const std::string& path, const std::string& title,
                     std::span<const double> t_db, std::span<const double> sq_err) {
  if (t_db.empty() || sq_err.empty()) throw std::invalid_argument("svg: empty series");

  std::vector<double> logs;
  logs.reserve(sq_err.size());
  for (double v : sq_err) logs.push_back(std::log10(std::max(v, 1e-16)));
  double e_lo = std::floor(*std::min_element(logs.begin(), logs.end()));
  double e_hi = std::ceil(*std::max_element(logs.begin(), logs.end()));
  if (e_hi - e_lo < 1.0) e_lo = e_hi - 1.0;

  const Axis ax{t_db.front(), t_db.back(), kLeft, kRight};
  const Axis ay{e_lo, e_hi, kBottom, kTop};

  Canvas c(path);
  draw_frame(c, title, "squared error");
  draw_x_ticks(c, ax, t_db);
  const int step = std::max(1, static_cast<int>((e_hi - e_lo) / 8.0));
  for (int e = static_cast<int>(e_lo); e <= static_cast<int>(e_hi); e += step) {
    const double y = ay.map(e);
    c.line(kLeft - 5.0, y, kLeft, y, "#333333", 1.0);
    c.line(kLeft, y, kRight, y, "#e0e0e0", 0.5);
    c.text(kLeft - 10.0, y + 4.0, "1e" + std::to_string(e), "end", 11);
  }

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < logs.size() && i < t_db.size(); ++i) {
    pts.emplace_back(ax.map(t_db[i]), ay.map(logs[i]));
  }
  c.polyline(pts, "#2ca02c", 2.0);
  for (const auto& [x, y] : pts) c.circle(x, y, 3.0, "#2ca02c");
}

}  // namespace kmu::cli::svg
