#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace reflab {

/// Neumaier-compensated running sum; merging keeps the rounding error of
/// the combined head in the compensation term.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  void merge(const NeumaierSum& o) {
    add(o.sum);
    comp += o.comp;
  }
  double value() const { return sum + comp; }
};

/// Sample mean with its standard error (sample std / sqrt(n)).
struct McEstimate {
  NeumaierSum sum, sum_sq;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  double max_weight = 0.0;  ///< largest path weight seen, for weighted estimators
  double mean_weight = 0.0;
  bool unreliable = false;  ///< aborted-path fraction at or above 0.1%

  void add(double v) {
    sum.add(v);
    sum_sq.add(v * v);
    ++n;
  }
  void merge(const McEstimate& o) {
    sum.merge(o.sum);
    sum_sq.merge(o.sum_sq);
    n += o.n;
    max_weight = std::max(max_weight, o.max_weight);
    unreliable = unreliable || o.unreliable;
  }

  double mean() const { return n ? sum.value() / n : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sum_sq.value() - n * m * m) / (n - 1));
  }
  double std_error() const { return n ? std::sqrt(variance() / n) : 0.0; }
  bool heavy_tail() const { return mean_weight > 0.0 && max_weight > 20.0 * mean_weight; }

  /// Estimate with a prescribed mean and standard error over n samples.
  static McEstimate from_mean_se(double mean, double se, std::uint64_t n) {
    McEstimate e;
    e.n = std::max<std::uint64_t>(n, 2);
    const double var = se * se * e.n;
    e.sum.sum = mean * e.n;
    e.sum_sq.sum = var * (e.n - 1) + e.n * mean * mean;
    return e;
  }

  /// A deterministic value with zero error (used for exact short-circuits).
  static McEstimate exact(double v, std::uint64_t n_paths = 0) {
    McEstimate e;
    e.sum.sum = v * static_cast<double>(n_paths ? n_paths : 1);
    e.sum_sq.sum = v * v * static_cast<double>(n_paths ? n_paths : 1);
    e.n = n_paths ? n_paths : 1;
    return e;
  }
};

/// Several per-path channels with their cross moments, for delta-method
/// standard errors of smooth functions of means.
class Moments {
 public:
  explicit Moments(int channels = 0)
      : k_(channels), sum_(channels), cross_(static_cast<std::size_t>(channels) * (channels + 1) / 2),
        max_(channels, 0.0) {}

  int channels() const { return k_; }
  std::uint64_t count() const { return n_; }

  void add(const double* v) {
    for (int i = 0; i < k_; ++i) {
      sum_[i].add(v[i]);
      max_[i] = std::max(max_[i], v[i]);
    }
    std::size_t c = 0;
    for (int i = 0; i < k_; ++i)
      for (int j = i; j < k_; ++j) cross_[c++].add(v[i] * v[j]);
    ++n_;
  }
  void merge(const Moments& o) {
    for (int i = 0; i < k_; ++i) sum_[i].merge(o.sum_[i]);
    for (std::size_t c = 0; c < cross_.size(); ++c) cross_[c].merge(o.cross_[c]);
    for (int i = 0; i < k_; ++i) max_[i] = std::max(max_[i], o.max_[i]);
    n_ += o.n_;
  }

  double mean(int i) const { return n_ ? sum_[i].value() / n_ : 0.0; }
  double max(int i) const { return max_[i]; }
  /// Sample covariance of channels i and j.
  double covariance(int i, int j) const {
    if (n_ < 2) return 0.0;
    if (i > j) std::swap(i, j);
    const std::size_t c = static_cast<std::size_t>(i) * k_ - static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i);
    return (cross_[c].value() - n_ * mean(i) * mean(j)) / (n_ - 1);
  }

  McEstimate estimate(int i) const {
    McEstimate e;
    e.sum = sum_[i];
    std::size_t c = static_cast<std::size_t>(i) * k_ - static_cast<std::size_t>(i) * (i - 1) / 2;
    e.sum_sq = cross_[c];
    e.n = n_;
    return e;
  }

 private:
  int k_;
  std::uint64_t n_ = 0;
  std::vector<NeumaierSum> sum_;
  std::vector<NeumaierSum> cross_;
  std::vector<double> max_;
};

}  // namespace reflab
