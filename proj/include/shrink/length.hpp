#ifndef SHRINK_LENGTH_HPP_
#define SHRINK_LENGTH_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "shrink/word.hpp"

namespace shrink {

/// Length function on finite words: either a Birkhoff sum of a positive
/// weight per symbol, or an explicit table.
class LengthFunction {
 public:
  static LengthFunction birkhoff(std::vector<double> weights);
  /// Table of values for nonempty words up to max_depth. kappa is measured
  /// over all triples (i, a, ia) present in the table.
  static LengthFunction table(int alphabet, std::map<Word, double> entries, int max_depth);

  double operator()(const Word& w) const;
  /// Birkhoff value from symbol counts.
  double from_counts(const std::vector<int>& counts) const;

  bool is_birkhoff() const { return birkhoff_; }
  int alphabet() const { return alphabet_; }
  /// -1 when unbounded.
  int max_depth() const { return max_depth_; }
  double kappa() const { return kappa_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::map<Word, double>& entries() const { return entries_; }

  /// Upper bound for the value over all words of length <= n.
  double max_value_upto(int n) const;

 private:
  bool birkhoff_ = true;
  int alphabet_ = 0;
  int max_depth_ = -1;
  double kappa_ = 0.0;
  std::vector<double> weights_;
  std::map<Word, double> entries_;
};

/// Integer part used for every target prefix length. Values within 1e-9
/// below an integer are snapped up so that Birkhoff sums hit exact integers.
std::size_t floor_length(double m);

struct LengthStats {
  int audit_depth = 0;
  double L_min = 0.0;
  double L_max = 0.0;
  double kappa = 0.0;
  double kappa_prime = 0.0;  ///< slack in n*L_min - k' <= l_n <= n*L_max + k'
  double H = 0.0;            ///< largest one-symbol increment
  double M_min = 0.0;        ///< inf of l(i)/|i|
  double M_max = 0.0;        ///< sup of l(i)/|i|
  bool monotone = true;
  std::vector<std::string> warnings;
};

/// Audits every word up to audit_depth (present words only for tables).
/// Throws ValidationError when some audited value is not positive.
LengthStats length_stats(const LengthFunction& ell, int audit_depth);

}  // namespace shrink

#endif  // SHRINK_LENGTH_HPP_
