#include "lifespan/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lifespan {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string svg_scatter(const std::vector<PlotPoint>& points, const std::optional<PlotLine>& line,
                        std::string_view x_label, std::string_view y_label, std::string_view title) {
  constexpr double W = 640, H = 480, L = 70, Rm = 20, T = 40, B = 60;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (!points.empty()) {
    x_lo = x_hi = points.front().x;
    y_lo = y_hi = points.front().y;
    for (const auto& pt : points) {
      x_lo = std::min(x_lo, pt.x);
      x_hi = std::max(x_hi, pt.x);
      y_lo = std::min(y_lo, pt.y);
      y_hi = std::max(y_hi, pt.y);
    }
  }
  if (line) {
    for (double x : {x_lo, x_hi}) {
      y_lo = std::min(y_lo, line->intercept + line->slope * x);
      y_hi = std::max(y_hi, line->intercept + line->slope * x);
    }
  }
  if (x_hi - x_lo < 1e-12) x_lo -= 0.5, x_hi += 0.5;
  if (y_hi - y_lo < 1e-12) y_lo -= 0.5, y_hi += 0.5;
  const double xpad = 0.05 * (x_hi - x_lo), ypad = 0.05 * (y_hi - y_lo);
  x_lo -= xpad, x_hi += xpad, y_lo -= ypad, y_hi += ypad;
  auto px = [&](double x) { return L + (x - x_lo) / (x_hi - x_lo) * (W - L - Rm); };
  auto py = [&](double y) { return H - B - (y - y_lo) / (y_hi - y_lo) * (H - T - B); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       escape(title) + "</text>\n";
  s += "<line x1=\"" + num(L) + "\" y1=\"" + num(H - B) + "\" x2=\"" + num(W - Rm) + "\" y2=\"" + num(H - B) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(L) + "\" y1=\"" + num(T) + "\" x2=\"" + num(L) + "\" y2=\"" + num(H - B) +
       "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * k / 4.0;
    s += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(H - B + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + format_real(std::round(xv * 1000) / 1000) +
         "</text>\n";
    s += "<text x=\"" + num(L - 6) + "\" y=\"" + num(py(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + format_real(std::round(yv * 1000) / 1000) +
         "</text>\n";
  }
  s += "<text x=\"" + num((L + W - Rm) / 2) + "\" y=\"" + num(H - 18) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num((T + H - B) / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" " +
       "font-size=\"13\" transform=\"rotate(-90 18 " + num((T + H - B) / 2) + ")\">" + escape(y_label) + "</text>\n";
  if (line) {
    const double xa = x_lo + xpad, xb = x_hi - xpad;
    s += "<line class=\"fit\" x1=\"" + num(px(xa)) + "\" y1=\"" + num(py(line->intercept + line->slope * xa)) +
         "\" x2=\"" + num(px(xb)) + "\" y2=\"" + num(py(line->intercept + line->slope * xb)) +
         "\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";
  }
  for (const auto& pt : points)
    s += "<circle cx=\"" + num(px(pt.x)) + "\" cy=\"" + num(py(pt.y)) + "\" r=\"4\" fill=\"#2c3e50\"/>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace lifespan
