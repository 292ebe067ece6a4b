#pragma once

// Monte-Carlo estimates: value, standard error, provenance.

#include <cmath>
#include <cstdint>
#include <vector>

#include "slicelab/common.hpp"

namespace slicelab {

// Every estimated quantity travels with its standard error, the number of
// samples that produced it and the seed of the stream that drew them.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t sample_count = 0;
  std::uint64_t seed = 0;

  // Relative standard error (guarded for values near zero).
  double rel_error() const {
    return value != 0.0 ? std::abs(std_error / value) : std::abs(std_error);
  }
};

// Combined standard error of two independent estimates (for verdicts of the
// form lhs <= rhs within k combined standard errors).
inline double combined_se(const Estimate& a, const Estimate& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

// Welford accumulator; mergeable so chunked/parallel accumulation reproduces
// the single-pass result up to rounding.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  void merge(const RunningStat& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    double d = o.mean_ - mean_;
    double n = na + nb;
    mean_ += d * nb / n;
    m2_ += o.m2_ + d * d * na * nb / n;
    n_ += o.n_;
  }

  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double std_error_of_mean() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

  Estimate as_estimate(std::uint64_t seed = 0) const {
    return Estimate{mean(), std_error_of_mean(), count(), seed};
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Mean/SE over a small vector of replicate values (outer replication).
inline Estimate estimate_from_replicates(const std::vector<double>& reps,
                                         std::uint64_t seed = 0) {
  RunningStat s;
  for (double r : reps) s.add(r);
  return s.as_estimate(seed);
}

// Delta-method SE for f(m) = m^{1/q} given an estimate of the mean m.
inline double power_mean_se(double mean, double se_of_mean, double q) {
  if (mean <= 0.0) return 0.0;
  double value = std::pow(mean, 1.0 / q);
  return value * se_of_mean / (std::abs(q) * mean);
}

}  // namespace slicelab
