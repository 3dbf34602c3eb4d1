#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ecogvoice::svg {

struct Bar {
  std::string label;
  double value = 0.0;
  bool highlight = false;
};

// Horizontal bars in the given order, highlighted bars drawn in a second colour.
std::string bar_chart(const std::string& title, const std::vector<Bar>& bars, const std::string& value_label);

struct BoxSeries {
  std::string label;
  std::vector<double> values;  // NaN entries ignored
  std::string annotation;      // drawn above the box, e.g. significance stars
};

// Boxes span Q1..Q3 with a median line; whiskers reach the furthest point
// within 1.5 IQR and points beyond are drawn individually.
std::string box_plot(const std::string& title, const std::vector<BoxSeries>& series, const std::string& value_label);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

std::string scatter(const std::string& title, const std::vector<Point>& points, const std::string& x_label,
                    const std::string& y_label, const std::string& note);

// Several panels stacked vertically in one document.
std::string stack(const std::vector<std::string>& panels);

void write(const std::filesystem::path& path, const std::string& doc);

}  // namespace ecogvoice::svg
