#ifndef SHRINK_MODULAR_HPP_
#define SHRINK_MODULAR_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "shrink/length.hpp"
#include "shrink/linmaps.hpp"
#include "shrink/quasiadd.hpp"
#include "shrink/target.hpp"
#include "shrink/word.hpp"

namespace shrink {

/// a k0 r1 k1 r2 ... k_{m-1} r_m. base and leading are empty for plain
/// modular words.
struct ModularWord {
  Word base;
  Word leading;
  std::vector<Word> blocks;
  std::vector<Word> connectors;
  Word flat;
  int R = 0;
};

struct ModularOptions {
  std::uint64_t budget = 1ull << 28;  ///< max DFS nodes
  int threads = 1;
  double tol = 1e-9;  ///< slack in every junction test
};

/// Appends blocks to base, choosing each connector as the shortest (then
/// lexicographically first) one with junction gap >= Q. Throws NoConnector
/// when none qualifies.
ModularWord modular_extend(const QuasiCertificate& cert, const LinearMapSet& maps, double s, const Word& base,
                           const std::vector<Word>& blocks, double tol = 1e-9);

/// Re-evaluates every junction from scratch with a fresh SVD.
bool junctions_hold(const ModularWord& w, const LinearMapSet& maps, double s, double Q, double tol = 1e-9);

/// All block/connector decompositions with flat length n, ordered by first
/// block, then depth first in (connector, block) order.
std::vector<ModularWord> enumerate_modular(const QuasiCertificate& cert, const LinearMapSet& maps, double s, int n,
                                           int R, const ModularOptions& options = {});

/// S_mod at flat lengths n .. n+R+K-1.
struct ModularSums {
  int n = 0;
  int R = 0;
  int K = 0;
  double s = 0.0;
  std::vector<double> log_S;
  std::vector<std::uint64_t> counts;
  double log_total = 0.0;
  std::uint64_t nodes = 0;
};

ModularSums modular_pressure_sum(const QuasiCertificate& cert, const LinearMapSet& maps, double s, int n, int R,
                                 const ModularOptions& options = {});

/// Same with summands phi^s(i d(i)), d the target connector of i.
ModularSums modular_pressure_sum_target(const QuasiCertificate& cert, const LinearMapSet& maps,
                                        const TargetSpec& target, const LengthFunction& length, double s, int n,
                                        int R, const ModularOptions& options = {});

/// c_n/n + c_R/R with nonnegative constants.
struct FittedBound {
  double c_n = 0.0;
  double c_R = 0.0;
  double at(int n, int R) const { return c_n / n + c_R / R; }
};

/// Envelope c_n/n + c_R/R above every (n, R, value) point. c_R covers the
/// large-n limit of each R column (deepest value or its extrapolation
/// against 1/n), c_n what is left over.
FittedBound fit_envelope(const std::vector<std::pair<std::pair<int, int>, double>>& points);

struct TargetComparisonInput {
  const TargetSpec* target = nullptr;
  const LengthFunction* length = nullptr;
};

/// One grid point. n counts blocks, so the flat scale is R n.
struct ComparisonRow {
  int n = 0;
  int R = 0;
  double full_value = 0.0;      ///< (1/R) log sum_{b in A^R} phi^s(b)
  double modular_value = 0.0;   ///< (1/(Rn)) log sum_m S_mod(Rn+m)
  double abs_diff = 0.0;
  double ordinary_value = 0.0;  ///< (1/(Rn)) log S_ord(Rn)
  double ordinary_diff = 0.0;
  std::optional<double> target_full;
  std::optional<double> target_modular;
  std::optional<double> target_diff;
};

ComparisonRow compare_full_modular(const QuasiCertificate& cert, const LinearMapSet& maps, double s, int n, int R,
                                   const ModularOptions& options = {}, const TargetComparisonInput& target = {});

struct ComparisonReport {
  double s = 0.0;
  std::vector<ComparisonRow> rows;
  std::vector<std::pair<int, int>> held_out;
  FittedBound fit_full;
  FittedBound fit_ordinary;
  std::optional<FittedBound> fit_target;
  bool bound_holds = false;  ///< every row, held-out ones included, under the fits
  std::vector<std::pair<int, int>> violations;
};

/// Rows on ns x Rs plus the held-out points, fits on the rest.
ComparisonReport compare_grid(const QuasiCertificate& cert, const LinearMapSet& maps, double s,
                              const std::vector<int>& ns, const std::vector<int>& Rs,
                              const std::vector<std::pair<int, int>>& held_out, const ModularOptions& options = {},
                              const TargetComparisonInput& target = {});

/// The family of block sequences r_1..r_z, z smallest with
/// |pi_a(r_1..r_z)| >= n (the base counts towards the length).
struct ModularCover {
  Word base;
  int n = 0;
  int R = 0;
  int K = 0;
  std::vector<std::vector<Word>> elements;
  std::vector<ModularWord> images;
  int z_min = 0;
  int z_max = 0;
  /// ceil(n/(R+K)) and 1 + n/R.
  std::pair<int, int> z_range() const;
};

ModularCover build_cover(const QuasiCertificate& cert, const LinearMapSet& maps, double s, const Word& base, int n,
                         int R, const ModularOptions& options = {});

}  // namespace shrink

#endif  // SHRINK_MODULAR_HPP_
