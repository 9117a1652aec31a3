#ifndef SHRINK_TARGET_HPP_
#define SHRINK_TARGET_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "shrink/word.hpp"

namespace shrink {

/// Infinite target sequence j, either periodic or a reproducible
/// Bernoulli sample of fixed depth.
class TargetSpec {
 public:
  static TargetSpec periodic(Word period);
  static TargetSpec bernoulli(std::vector<double> probabilities, std::uint64_t seed, std::size_t depth);

  Symbol at(std::size_t k) const;
  /// j|_{floor(m)}.
  Word prefix(double m) const;
  Word prefix_exact(std::size_t m) const;
  /// Number of available symbols (max size_t for periodic targets).
  std::size_t available_depth() const;
  bool is_periodic() const { return periodic_; }
  const Word& period() const { return data_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  std::uint64_t seed() const { return seed_; }

 private:
  bool periodic_ = true;
  Word data_;
  std::vector<double> probabilities_;
  std::uint64_t seed_ = 0;
};

}  // namespace shrink

#endif  // SHRINK_TARGET_HPP_
