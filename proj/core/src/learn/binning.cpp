#include "ecogvoice/learn/binning.hpp"

#include <algorithm>
#include <stdexcept>

namespace ecogvoice::learn {

int bin_of(const std::vector<double>& thresholds, double v) {
  return static_cast<int>(std::lower_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin());
}

BinnedMatrix bin_matrix(const Eigen::MatrixXd& x, int max_bins) {
  if (max_bins < 2 || max_bins > 256) throw std::invalid_argument("max_bins must lie in [2, 256]");
  BinnedMatrix b;
  b.rows = static_cast<int>(x.rows());
  b.cols = static_cast<int>(x.cols());
  b.codes.resize(static_cast<std::size_t>(b.rows) * static_cast<std::size_t>(b.cols));
  b.thresholds.resize(static_cast<std::size_t>(b.cols));
  std::vector<double> u;
  for (int c = 0; c < b.cols; ++c) {
    u.assign(x.col(c).data(), x.col(c).data() + b.rows);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    auto& thr = b.thresholds[static_cast<std::size_t>(c)];
    const auto m = u.size();
    if (m <= static_cast<std::size_t>(max_bins)) {
      for (std::size_t i = 1; i < m; ++i) thr.push_back(0.5 * (u[i - 1] + u[i]));
    } else {
      for (int k = 1; k < max_bins; ++k) {
        const auto idx = static_cast<std::size_t>(k) * m / static_cast<std::size_t>(max_bins);
        const double t = 0.5 * (u[idx - 1] + u[idx]);
        if (thr.empty() || t > thr.back()) thr.push_back(t);
      }
    }
    for (int r = 0; r < b.rows; ++r)
      b.codes[static_cast<std::size_t>(c) * static_cast<std::size_t>(b.rows) + static_cast<std::size_t>(r)] =
          static_cast<std::uint8_t>(bin_of(thr, x(r, c)));
  }
  return b;
}

}  // namespace ecogvoice::learn
