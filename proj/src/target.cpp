#include "shrink/target.hpp"

#include <cmath>
#include <random>

#include "shrink/error.hpp"
#include "shrink/length.hpp"

namespace shrink {

TargetSpec TargetSpec::periodic(Word period) {
  if (period.empty()) throw ValidationError("target: empty period");
  TargetSpec t;
  t.periodic_ = true;
  t.data_ = std::move(period);
  return t;
}

TargetSpec TargetSpec::bernoulli(std::vector<double> probabilities, std::uint64_t seed, std::size_t depth) {
  if (probabilities.empty()) throw ValidationError("target: empty probability vector");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw ValidationError("target: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("target: probabilities must sum to 1");

  TargetSpec t;
  t.periodic_ = false;
  t.probabilities_ = probabilities;
  t.seed_ = seed;
  std::mt19937_64 rng(seed);
  std::vector<Symbol> symbols(depth);
  for (std::size_t k = 0; k < depth; ++k) {
    // 53 random bits then inverse CDF, identical on every platform.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double acc = 0.0;
    std::size_t a = 0;
    for (; a + 1 < probabilities.size(); ++a) {
      acc += probabilities[a];
      if (u < acc) break;
    }
    symbols[k] = static_cast<Symbol>(a);
  }
  t.data_ = Word(std::move(symbols));
  return t;
}

Symbol TargetSpec::at(std::size_t k) const {
  if (periodic_) return data_[k % data_.size()];
  if (k >= data_.size()) {
    throw PrefixExhausted("target: prefix of length " + std::to_string(k + 1) + " requested, only " +
                          std::to_string(data_.size()) + " symbols sampled");
  }
  return data_[k];
}

Word TargetSpec::prefix_exact(std::size_t m) const {
  if (!periodic_ && m > data_.size()) {
    throw PrefixExhausted("target: prefix of length " + std::to_string(m) + " requested, only " +
                          std::to_string(data_.size()) + " symbols sampled");
  }
  Word w;
  for (std::size_t k = 0; k < m; ++k) w.push_back(at(k));
  return w;
}

Word TargetSpec::prefix(double m) const { return prefix_exact(floor_length(m)); }

std::size_t TargetSpec::available_depth() const {
  return periodic_ ? std::numeric_limits<std::size_t>::max() : data_.size();
}

}  // namespace shrink
