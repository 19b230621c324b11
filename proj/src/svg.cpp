#include "fbench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fbench/errors.hpp"

namespace fbench::svg {

namespace {

constexpr double kW = 640.0, kH = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo, hi;
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

Axis padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
    return {lo - d, hi + d};
  }
  const double pad = 0.04 * (hi - lo);
  return {lo - pad, hi + pad};
}

void frame(std::ostringstream& os, const std::string& title, const std::string& x_label, const std::string& y_label,
           const Axis& ax, const Axis& ay, bool x_ticks) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW
     << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kW / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kW - kLeft - kRight << "\" height=\""
     << kH - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double vy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    const double py = ay.map(vy, kH - kBottom, kTop);
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << tick(vy)
       << "</text>\n";
    if (x_ticks) {
      const double vx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
      const double px = ax.map(vx, kLeft, kW - kRight);
      os << "<text x=\"" << num(px) << "\" y=\"" << num(kH - kBottom + 16) << "\" text-anchor=\"middle\">" << tick(vx)
         << "</text>\n";
    }
  }
  os << "<text x=\"" << num((kLeft + kW - kRight) / 2) << "\" y=\"" << num(kH - 10)
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << num((kTop + kH - kBottom) / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ValidationError("svg: series '" + s.label + "' has mismatched x/y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) xlo = xhi = ylo = yhi = 0.0;
  const Axis ax = padded(xlo, xhi), ay = padded(ylo, yhi);
  std::ostringstream os;
  frame(os, title, x_label, y_label, ax, ay, true);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << (first ? "" : " ") << num(ax.map(s.x[i], kLeft, kW - kRight)) << ','
         << num(ay.map(s.y[i], kH - kBottom, kTop));
      first = false;
    }
    os << "\"/>\n";
    os << "<text x=\"" << num(kW - kRight - 8) << "\" y=\"" << num(kTop + 16 + 14.0 * static_cast<double>(k))
       << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string box_chart(const std::string& title, const std::string& y_label, const std::vector<Box>& boxes) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& b : boxes) {
    lo = std::min(lo, b.summary.min);
    hi = std::max(hi, b.summary.max);
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  const Axis ay = padded(lo, hi);
  const Axis ax{0.0, static_cast<double>(std::max<std::size_t>(boxes.size(), 1))};
  std::ostringstream os;
  frame(os, title, "", y_label, ax, ay, false);
  const double slot = (kW - kLeft - kRight) / ax.hi;
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const auto& s = boxes[k].summary;
    const char* color = kPalette[k % std::size(kPalette)];
    const double cx = kLeft + slot * (static_cast<double>(k) + 0.5), half = slot * 0.2;
    auto y = [&](double v) { return num(ay.map(v, kH - kBottom, kTop)); };
    os << "<line x1=\"" << num(cx) << "\" x2=\"" << num(cx) << "\" y1=\"" << y(s.min) << "\" y2=\"" << y(s.max)
       << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << num(cx - half) << "\" y=\"" << y(s.q3) << "\" width=\"" << num(2 * half) << "\" height=\""
       << num(ay.map(s.q1, kH - kBottom, kTop) - ay.map(s.q3, kH - kBottom, kTop)) << "\" fill=\"" << color
       << "\" fill-opacity=\"0.4\" stroke=\"" << color << "\"/>\n";
    os << "<line x1=\"" << num(cx - half) << "\" x2=\"" << num(cx + half) << "\" y1=\"" << y(s.median) << "\" y2=\""
       << y(s.median) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(cx) << "\" y=\"" << num(kH - kBottom + 16) << "\" text-anchor=\"middle\">"
       << escape(boxes[k].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

}  // namespace fbench::svg
