#include "ecogvoice/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include "ecogvoice/error.hpp"

namespace ecogvoice::svg {

namespace {

constexpr const char* kMain = "#4c72b0";
constexpr const char* kAccent = "#dd8452";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 11) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
         "\" text-anchor=\"" + anchor + "\">" + esc(s) + "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2, const char* stroke = "#333") {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
         "\" stroke=\"" + stroke + "\"/>\n";
}

std::string open(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\">\n";
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

Range range_of(const std::vector<double>& v, bool include_zero) {
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double x : v)
    if (std::isfinite(x)) {
      r.lo = std::min(r.lo, x);
      r.hi = std::max(r.hi, x);
    }
  if (!std::isfinite(r.lo)) return {0.0, 1.0};
  if (include_zero) {
    r.lo = std::min(r.lo, 0.0);
    r.hi = std::max(r.hi, 0.0);
  }
  if (r.hi - r.lo < 1e-12) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  const double pad = 0.05 * (r.hi - r.lo);
  return {r.lo - (include_zero && r.lo == 0.0 ? 0.0 : pad), r.hi + pad};
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  return i + 1 < sorted.size() ? sorted[i] * (1.0 - f) + sorted[i + 1] * f : sorted[i];
}

}  // namespace

std::string bar_chart(const std::string& title, const std::vector<Bar>& bars, const std::string& value_label) {
  const double left = 160, right = 30, top = 40, row = 18, width = 640;
  const double height = top + row * static_cast<double>(std::max<std::size_t>(bars.size(), 1)) + 50;
  std::vector<double> vals;
  for (const auto& b : bars) vals.push_back(b.value);
  const Range r = range_of(vals, true);
  std::string s = open(width, height);
  s += text(width / 2, 20, title, "middle", 14);
  const double x0 = left, x1 = width - right;
  if (bars.empty()) s += text(width / 2, top + 20, "no data");
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double y = top + row * static_cast<double>(i);
    const double a = r.map(0.0, x0, x1), b = r.map(bars[i].value, x0, x1);
    s += "<rect x=\"" + num(std::min(a, b)) + "\" y=\"" + num(y + 2) + "\" width=\"" + num(std::abs(b - a)) +
         "\" height=\"" + num(row - 4) + "\" fill=\"" + (bars[i].highlight ? kAccent : kMain) + "\"/>\n";
    s += text(left - 6, y + row - 5, bars[i].label, "end", 10);
  }
  const double axis_y = top + row * static_cast<double>(std::max<std::size_t>(bars.size(), 1)) + 4;
  s += line(x0, axis_y, x1, axis_y);
  for (int t = 0; t <= 4; ++t) {
    const double v = r.lo + (r.hi - r.lo) * t / 4.0;
    const double x = r.map(v, x0, x1);
    s += line(x, axis_y, x, axis_y + 4);
    s += text(x, axis_y + 16, tick(v), "middle", 9);
  }
  s += text((x0 + x1) / 2, axis_y + 34, value_label);
  return s + "</svg>\n";
}

std::string box_plot(const std::string& title, const std::vector<BoxSeries>& series, const std::string& value_label) {
  const double left = 70, right = 20, top = 40, bottom = 60, slot = 90, plot_h = 260;
  const double width = left + right + slot * static_cast<double>(std::max<std::size_t>(series.size(), 1));
  const double height = top + plot_h + bottom;
  std::vector<double> all;
  for (const auto& b : series) all.insert(all.end(), b.values.begin(), b.values.end());
  const Range r = range_of(all, false);
  auto ymap = [&](double v) { return r.map(v, top + plot_h, top); };
  std::string s = open(width, height);
  s += text(width / 2, 20, title, "middle", 14);
  s += line(left, top, left, top + plot_h);
  for (int t = 0; t <= 4; ++t) {
    const double v = r.lo + (r.hi - r.lo) * t / 4.0;
    s += line(left - 4, ymap(v), left, ymap(v));
    s += text(left - 6, ymap(v) + 3, tick(v), "end", 9);
  }
  s += "<text x=\"14\" y=\"" + num(top + plot_h / 2) + "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num(top + plot_h / 2) + ")\">" + esc(value_label) + "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    s += text(cx, top + plot_h + 18, series[i].label, "middle", 10);
    std::vector<double> v;
    for (double x : series[i].values)
      if (std::isfinite(x)) v.push_back(x);
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    const double q1 = quantile(v, 0.25), med = quantile(v, 0.5), q3 = quantile(v, 0.75);
    const double iqr = q3 - q1;
    double wlo = q1, whi = q3;
    for (double x : v) {
      if (x >= q1 - 1.5 * iqr) wlo = std::min(wlo, x);
      if (x <= q3 + 1.5 * iqr) whi = std::max(whi, x);
    }
    const double hw = slot * 0.25;
    s += line(cx, ymap(whi), cx, ymap(q3));
    s += line(cx, ymap(q1), cx, ymap(wlo));
    s += line(cx - hw / 2, ymap(whi), cx + hw / 2, ymap(whi));
    s += line(cx - hw / 2, ymap(wlo), cx + hw / 2, ymap(wlo));
    s += "<rect x=\"" + num(cx - hw) + "\" y=\"" + num(ymap(q3)) + "\" width=\"" + num(2 * hw) + "\" height=\"" +
         num(std::max(0.5, ymap(q1) - ymap(q3))) + "\" fill=\"" + kMain + "\" fill-opacity=\"0.5\" stroke=\"#333\"/>\n";
    s += line(cx - hw, ymap(med), cx + hw, ymap(med), "#000");
    for (double x : v)
      if (x < wlo || x > whi)
        s += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(ymap(x)) + "\" r=\"2\" fill=\"#333\"/>\n";
    if (!series[i].annotation.empty()) s += text(cx, ymap(whi) - 6, series[i].annotation, "middle", 12);
  }
  return s + "</svg>\n";
}

std::string scatter(const std::string& title, const std::vector<Point>& points, const std::string& x_label,
                    const std::string& y_label, const std::string& note) {
  const double left = 70, right = 20, top = 40, size = 300, bottom = 50;
  const double width = left + size + right, height = top + size + bottom + 16;
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  const Range rx = range_of(xs, false), ry = range_of(ys, false);
  auto mx = [&](double v) { return rx.map(v, left, left + size); };
  auto my = [&](double v) { return ry.map(v, top + size, top); };
  std::string s = open(width, height);
  s += text(width / 2, 20, title, "middle", 14);
  s += line(left, top + size, left + size, top + size);
  s += line(left, top, left, top + size);
  for (int t = 0; t <= 4; ++t) {
    const double vx = rx.lo + (rx.hi - rx.lo) * t / 4.0, vy = ry.lo + (ry.hi - ry.lo) * t / 4.0;
    s += text(mx(vx), top + size + 14, tick(vx), "middle", 9);
    s += text(left - 6, my(vy) + 3, tick(vy), "end", 9);
  }
  for (const auto& p : points)
    if (std::isfinite(p.x) && std::isfinite(p.y))
      s += "<circle cx=\"" + num(mx(p.x)) + "\" cy=\"" + num(my(p.y)) + "\" r=\"3\" fill=\"" + kMain + "\"/>\n";
  s += text(left + size / 2, top + size + 32, x_label);
  s += "<text x=\"14\" y=\"" + num(top + size / 2) + "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num(top + size / 2) + ")\">" + esc(y_label) + "</text>\n";
  if (!note.empty()) s += text(left + size / 2, top + size + 50, note, "middle", 10);
  return s + "</svg>\n";
}

std::string stack(const std::vector<std::string>& panels) {
  static const std::regex dims(R"re(width="([0-9.]+)" height="([0-9.]+)")re");
  double w = 0, h = 0;
  std::string body;
  for (const auto& p : panels) {
    std::smatch m;
    if (!std::regex_search(p, m, dims)) continue;
    const double pw = std::stod(m[1]), ph = std::stod(m[2]);
    body += "<g transform=\"translate(0 " + num(h) + ")\">\n" + p.substr(p.find('\n') + 1);
    body.replace(body.rfind("</svg>"), 6, "</g>");
    w = std::max(w, pw);
    h += ph;
  }
  return open(w, h) + body + "</svg>\n";
}

void write(const std::filesystem::path& path, const std::string& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc;
}

}  // namespace ecogvoice::svg
