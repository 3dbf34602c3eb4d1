#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ecogvoice::learn {

// Column-wise histogram codes. Bin b of column c holds values v with
// thresholds[c][b-1] < v <= thresholds[c][b].
struct BinnedMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> codes;  // column-major
  std::vector<std::vector<double>> thresholds;

  std::uint8_t code(int r, int c) const {
    return codes[static_cast<std::size_t>(c) * static_cast<std::size_t>(rows) + static_cast<std::size_t>(r)];
  }
  const std::uint8_t* column(int c) const {
    return codes.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(rows);
  }
  int bins(int c) const { return static_cast<int>(thresholds[c].size()) + 1; }
};

// Columns with at most max_bins distinct values get one bin per value;
// otherwise edges sit at evenly spaced ranks of the distinct values.
// max_bins must lie in [2, 256].
BinnedMatrix bin_matrix(const Eigen::MatrixXd& x, int max_bins);

// Bin code of a raw value against one column's thresholds.
int bin_of(const std::vector<double>& thresholds, double v);

}  // namespace ecogvoice::learn
