#ifndef GIPID_METRICS_HPP_
#define GIPID_METRICS_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "gipid/common.hpp"

namespace gipid {

/// Ratio metrics on a zero-variance target are undefined.
class UndefinedMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double mse(const Eigen::Ref<const Eigen::VectorXd>& y,
                  const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  require(y.size() == yhat.size(), "mse: length mismatch");
  require(y.size() >= 1, "mse: empty input");
  return (y - yhat).squaredNorm() / static_cast<double>(y.size());
}

/// MSE normalized by the (unbiased) variance of the target torques.
inline double nmse(const Eigen::Ref<const Eigen::VectorXd>& tau,
                   const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  require(tau.size() == yhat.size(), "nmse: length mismatch");
  require(tau.size() >= 2, "nmse needs at least two samples");
  const double mean = tau.mean();
  const double var = (tau.array() - mean).square().sum() / static_cast<double>(tau.size() - 1);
  if (var <= 0) throw UndefinedMetricError("target torques have zero variance");
  return mse(tau, yhat) / var;
}

/// Global MSE: per-joint MSEs summed across joints (columns).
inline double gmse(const Eigen::MatrixXd& tau, const Eigen::MatrixXd& yhat) {
  require(tau.rows() == yhat.rows() && tau.cols() == yhat.cols(), "gmse: shape mismatch");
  double total = 0;
  for (Eigen::Index j = 0; j < tau.cols(); ++j) total += mse(tau.col(j), yhat.col(j));
  return total;
}

/// Boxplot statistics: quartiles by linear interpolation of order statistics,
/// whiskers at the most extreme points within 1.5 IQR, the rest outliers.
struct BoxStats {
  double q1 = 0, median = 0, q3 = 0;
  double whisker_low = 0, whisker_high = 0;
  std::vector<double> outliers;
};

inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median(std::vector<double> values) {
  require(!values.empty(), "median of empty set");
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

inline BoxStats box_stats(std::vector<double> values) {
  require(!values.empty(), "box stats of empty set");
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.q1 = quantile_sorted(values, 0.25);
  b.median = quantile_sorted(values, 0.5);
  b.q3 = quantile_sorted(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q3;
  b.whisker_high = b.q1;
  for (double v : values) {
    if (v < lo || v > hi) {
      b.outliers.push_back(v);
    } else {
      b.whisker_low = std::min(b.whisker_low, v);
      b.whisker_high = std::max(b.whisker_high, v);
    }
  }
  return b;
}

}  // namespace gipid

#endif  // GIPID_METRICS_HPP_
