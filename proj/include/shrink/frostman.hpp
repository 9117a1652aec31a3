#ifndef SHRINK_FROSTMAN_HPP_
#define SHRINK_FROSTMAN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "shrink/ifs.hpp"
#include "shrink/word_measure.hpp"

namespace shrink {

struct FrostmanOptions {
  int samples = 1000;  ///< outer points; each contributes one pair per split level
  int depth = 20;      ///< split levels 0..depth-1; points coded to depth + 10
  std::uint64_t seed = 1;
};

/// s-energy of pi_* mu, split by the length k of the common prefix of the
/// two codes: E = sum_k E[(mu[x|k] - mu[x|k+1]) |pi x - pi y_k|^{-s}], y_k
/// drawn from mu on [x|k] outside [x|k+1].
struct FrostmanReport {
  double s = 0.0;
  int samples = 0;
  int depth = 0;
  double estimate = 0.0;   ///< levels below depth plus a geometric tail
  double truncated = 0.0;  ///< levels below depth only
  std::vector<double> level_contributions;
  double tail_ratio = 0.0;  ///< fitted ratio of consecutive level contributions
  double tail_mass = 0.0;   ///< mean mu[x|depth], the share of pairs never split
  double below_resolution = 0.0;  ///< share of pairs closer than the coding error
  bool diverging = false;
  bool degenerate = false;
  bool separation_certified = false;
  std::vector<std::string> warnings;
};

FrostmanReport frostman_energy(const AffineIFS& ifs, const WordMeasure& mu, double s,
                               const FrostmanOptions& options = {});

/// Relative change of the estimate when the sample count doubles.
struct StabilityReport {
  FrostmanReport base;
  FrostmanReport doubled;
  double relative_change = 0.0;
  bool stable = false;  ///< within tol
};
StabilityReport frostman_stability(const AffineIFS& ifs, const WordMeasure& mu, double s,
                                   const FrostmanOptions& options = {}, double tol = 0.1);

}  // namespace shrink

#endif  // SHRINK_FROSTMAN_HPP_
