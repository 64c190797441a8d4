#ifndef FIELDCLICK_NUMERICS_HPP
#define FIELDCLICK_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <limits>

namespace fieldclick {

/// Neumaier-compensated running sum.
template <typename Real>
class CompensatedSum {
 public:
  CompensatedSum& operator+=(Real value) {
    const Real t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  Real value() const { return sum_ + compensation_; }

 private:
  Real sum_ = 0;
  Real compensation_ = 0;
};

/**
 * Streaming mean and variance (Welford), with the pairwise merge of
 * Chan et al. so partial results from independent workers combine.
 */
class RunningStats {
 public:
  void push(double value) {
    ++count_;
    const double delta = value - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (value - mean_);
  }

  void merge(const RunningStats& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double n_a = static_cast<double>(count_);
    const double n_b = static_cast<double>(other.count_);
    const double n = n_a + n_b;
    const double delta = other.mean_ - mean_;
    mean_ += delta * n_b / n;
    m2_ += other.m2_ + delta * delta * n_a * n_b / n;
    count_ += other.count_;
  }

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }

  /// Unbiased sample variance; NaN below two samples.
  double variance() const {
    if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
    return m2_ / static_cast<double>(count_ - 1);
  }

  double standard_error() const {
    return std::sqrt(variance() / static_cast<double>(count_));
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

}  // namespace fieldclick

#endif  // FIELDCLICK_NUMERICS_HPP
