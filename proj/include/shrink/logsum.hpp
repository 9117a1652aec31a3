#ifndef SHRINK_LOGSUM_HPP_
#define SHRINK_LOGSUM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>

namespace shrink {

/// Accumulates log(sum exp(x_i)) with a running maximum and Kahan
/// compensation on the rescaled sum.
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    ++count_;
    if (log_term > max_) {
      const double scale = std::exp(max_ - log_term);
      sum_ *= scale;
      comp_ *= scale;
      max_ = log_term;
    }
    const double y = std::exp(log_term - max_) - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  void merge(const LogSumExp& other) {
    if (other.count_ == 0) return;
    const auto n = count_ + other.count_;
    add(other.log_value());
    count_ = n;
  }
  double log_value() const {
    if (count_ == 0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }
  std::uint64_t count() const { return count_; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double comp_ = 0.0;
  std::uint64_t count_ = 0;
};

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace shrink

#endif  // SHRINK_LOGSUM_HPP_
