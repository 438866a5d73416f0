#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sseplab {

// Neumaier summation; merge() keeps results independent of chunking order
// up to rounding in the compensation terms.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  void merge(const CompensatedSum& o) {
    add(o.sum_);
    add(o.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// First and second moments of a scalar sample.
class MomentAccumulator {
 public:
  void add(double v) {
    s1_.add(v);
    s2_.add(v * v);
    ++count_;
  }
  void merge(const MomentAccumulator& o) {
    s1_.merge(o.s1_);
    s2_.merge(o.s2_);
    count_ += o.count_;
  }
  std::size_t count() const { return count_; }
  double sum() const { return s1_.value(); }
  double sum_sq() const { return s2_.value(); }
  MeanEstimate estimate() const;

 private:
  CompensatedSum s1_, s2_;
  std::size_t count_ = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace sseplab
