#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdi {

/// Monte Carlo estimate of one observable.
struct EdgeEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // batch-means standard error
  double n_eff = 0.0;
};

/// Batch-means accumulator for a fixed number of observables. The sample
/// stream is cut into `batches` contiguous blocks of `batch_size` samples.
class BatchMeans {
 public:
  BatchMeans(std::size_t observables, std::size_t batches, std::size_t batch_size)
      : n_obs_(observables),
        batches_(batches),
        batch_size_(batch_size),
        batch_sums_(observables * batches, 0.0),
        sum_(observables, 0.0),
        sum_sq_(observables, 0.0) {
    if (batches < 2 || batch_size < 1) throw std::invalid_argument("batch means needs >= 2 batches of >= 1 sample");
  }

  std::size_t capacity() const { return batches_ * batch_size_; }
  std::size_t count() const { return count_; }
  bool full() const { return count_ >= capacity(); }

  /// Adds one sample vector; ignored once all batches are filled.
  template <typename Range>
  void add(const Range& sample) {
    if (full()) return;
    const std::size_t b = count_ / batch_size_;
    double* bs = &batch_sums_[b * n_obs_];
    std::size_t k = 0;
    for (double x : sample) {
      bs[k] += x;
      sum_[k] += x;
      sum_sq_[k] += x * x;
      ++k;
    }
    ++count_;
  }

  EdgeEstimate estimate(std::size_t k) const {
    if (count_ < capacity()) throw std::logic_error("batch means queried before all batches were filled");
    const double n = static_cast<double>(count_);
    const double mean = sum_[k] / n;
    double ss = 0.0;
    for (std::size_t b = 0; b < batches_; ++b) {
      const double m = batch_sums_[b * n_obs_ + k] / static_cast<double>(batch_size_);
      ss += (m - mean) * (m - mean);
    }
    const double nb = static_cast<double>(batches_);
    const double se = std::sqrt(ss / (nb - 1.0) / nb);
    const double sample_var = std::max(0.0, (sum_sq_[k] - n * mean * mean) / (n - 1.0));
    double n_eff = n;
    if (se > 0.0) n_eff = std::min(n, sample_var / (se * se));
    return {mean, se, n_eff};
  }

  std::size_t observables() const { return n_obs_; }

 private:
  std::size_t n_obs_;
  std::size_t batches_;
  std::size_t batch_size_;
  std::size_t count_ = 0;
  std::vector<double> batch_sums_;
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
};

inline double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("sample variance needs >= 2 values");
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

/// Delete-one jackknife standard error of the sample variance.
inline double jackknife_variance_error(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("jackknife needs >= 3 values");
  double s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    s1 += v;
    s2 += v * v;
  }
  std::vector<double> leave(n);
  const double m = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = s1 - x[i];
    const double b = s2 - x[i] * x[i];
    leave[i] = (b - a * a / m) / (m - 1.0);
  }
  const double lm = mean_of(leave);
  double ss = 0.0;
  for (double v : leave) ss += (v - lm) * (v - lm);
  return std::sqrt(ss * (m / static_cast<double>(n)));
}

/// Standard error of the mean of independent values.
inline double standard_error(const std::vector<double>& x) {
  return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
};

/// Ordinary least squares y = intercept + slope * x.
inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("least squares needs matching inputs with >= 2 points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least squares needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  f.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.residuals[i] = y[i] - (f.intercept + f.slope * x[i]);
    sse += f.residuals[i] * f.residuals[i];
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return f;
}

}  // namespace qdi
