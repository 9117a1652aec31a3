#ifndef SHRINK_WORD_MEASURE_HPP_
#define SHRINK_WORD_MEASURE_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "shrink/word.hpp"

namespace shrink {

/// Probability measure on infinite words, queried through cylinders.
class WordMeasure {
 public:
  virtual ~WordMeasure() = default;
  virtual int alphabet() const = 0;
  /// mu[u]; 0 when the cylinder is not charged.
  virtual double measure(const Word& u) const = 0;
  /// A word of length >= depth drawn from mu conditioned on [prefix].
  virtual Word sample_extension(const Word& prefix, std::size_t depth, std::mt19937_64& rng) const = 0;
  Word sample(std::size_t depth, std::mt19937_64& rng) const { return sample_extension(Word(), depth, rng); }
};

/// u in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Index drawn from unnormalized weights by inverse CDF.
std::size_t draw_index(const std::vector<double>& weights, std::mt19937_64& rng);

/// i.i.d. symbols with fixed probabilities.
class BernoulliMeasure : public WordMeasure {
 public:
  explicit BernoulliMeasure(std::vector<double> probabilities);
  static BernoulliMeasure uniform(int alphabet);
  int alphabet() const override { return static_cast<int>(p_.size()); }
  double measure(const Word& u) const override;
  Word sample_extension(const Word& prefix, std::size_t depth, std::mt19937_64& rng) const override;
  const std::vector<double>& probabilities() const { return p_; }

 private:
  std::vector<double> p_;
};

}  // namespace shrink

#endif  // SHRINK_WORD_MEASURE_HPP_
