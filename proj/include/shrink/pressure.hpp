#ifndef SHRINK_PRESSURE_HPP_
#define SHRINK_PRESSURE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shrink/ifs.hpp"
#include "shrink/length.hpp"
#include "shrink/linmaps.hpp"
#include "shrink/quasiadd.hpp"
#include "shrink/target.hpp"

namespace shrink {

enum class PotentialKind { plain, full_target, connector_target, ell_window, psi_big };
std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// How a level sum over A^n is evaluated. type_classes needs diagonal maps
/// and a Birkhoff length (or none) and sums over symbol-count vectors with
/// multinomial weights.
enum class SumStrategy { automatic, enumerate, type_classes };

struct SumOptions {
  std::uint64_t budget = 1ull << 24;  ///< max words enumerated per sum
  int threads = 1;
  SumStrategy strategy = SumStrategy::automatic;
};

/// Bounds for the limit of (1/n) log S_n. A missing side is not derivable.
struct Bracket {
  std::optional<double> lower;
  std::optional<double> upper;
  std::string basis;
  double width() const { return lower && upper ? *upper - *lower : 0.0; }
};

struct PressureEstimate {
  PotentialKind kind = PotentialKind::plain;
  double s = 0.0;
  int depth = 0;
  double log_sum = 0.0;
  double value = 0.0;  ///< (1/n) log S_n at the largest n
  std::optional<Bracket> bracket;
  double tail_max = 0.0;  ///< max of the values over the upper half of n_list
  std::string limsup_mode = "value_at_max_depth";
  std::vector<std::pair<int, double>> values;  ///< (n, (1/n) log S_n)
};

/// Everything a pressure evaluation may need; unused members may be null.
struct PressureProblem {
  const LinearMapSet* maps = nullptr;
  const TargetSpec* target = nullptr;
  const LengthFunction* length = nullptr;
  const QuasiCertificate* cert = nullptr;
  std::optional<LengthStats> stats;
  SumOptions options;
};

/// Products T_{j|_m} for m = 0..depth.
class TargetPrefixProducts {
 public:
  TargetPrefixProducts() = default;
  /// Builds up to min(depth, available target depth).
  TargetPrefixProducts(const LinearMapSet& maps, const TargetSpec& target, std::size_t depth);
  const CocycleProduct& at(std::size_t m) const;
  std::size_t depth() const { return products_.empty() ? 0 : products_.size() - 1; }

 private:
  std::vector<CocycleProduct> products_;
  std::size_t available_ = 0;
};

/// log of sum over A^n of exp(summand(T_i, l(i))). l is 0 when length is null.
using Summand = std::function<double(const CocycleProduct&, double)>;
double log_level_sum(const LinearMapSet& maps, const LengthFunction* length, int n, const SumOptions& options,
                     const Summand& summand);

/// log sum_{|i|=n} phi^s(i).
double partial_sum_plain(const LinearMapSet& maps, double s, int n, const SumOptions& options = {});

/// log sum_{|i|=n} phi^s(i j|_{l(i)}).
double partial_sum_full(const LinearMapSet& maps, const TargetSpec& target, const LengthFunction& length, double s,
                        int n, const SumOptions& options = {});

/// Connector to the target after i: d(i) = c j|_{l(ic)} with c maximizing
/// the junction gap between i and j|_{l(i)}.
struct TargetConnector {
  Word connector;
  std::size_t target_length = 0;
  double gap = 0.0;
};
TargetConnector target_connector(const LinearMapSet& maps, const ConnectorSet& connectors, const TargetSpec& target,
                                 const LengthFunction& length, const Word& i, double s);

/// log sum_{|i|=n} phi^s(i d(i)).
double partial_sum_connector(const LinearMapSet& maps, const QuasiCertificate& cert, const TargetSpec& target,
                             const LengthFunction& length, double s, int n, const SumOptions& options = {});

PressureEstimate estimate_pressure(PotentialKind kind, const PressureProblem& problem, double s,
                                   const std::vector<int>& n_list);

struct LyapunovEstimate {
  double s = 0.0;
  double Z = 0.0;
  double Z_star = 0.0;  ///< max over the tail window
  double cesaro_spread = 0.0;
  std::vector<std::pair<int, double>> depth_sequence;
};
LyapunovEstimate lyapunov_Z(const LinearMapSet& maps, const TargetSpec& target, double s,
                            const std::vector<int>& n_list);

struct ZeroOptions {
  PotentialKind kind = PotentialKind::full_target;
  bool refine = false;       ///< double the depth until s0 moves less than tol_s
  int max_depth = 0;         ///< refinement cap (0: 8 n)
  std::optional<std::pair<double, double>> bracket;  ///< starting interval, default [0, d]
};

struct ZeroResult {
  double s0 = 0.0;
  bool clamped = false;
  int depth = 0;
  int iterations = 0;
  double value_low = 0.0;   ///< pressure at the lower end of the start interval
  double value_high = 0.0;  ///< pressure at the upper end
  PressureEstimate at_zero;
  std::vector<std::pair<int, double>> depth_trace;  ///< (n, s0 at depth n)
  std::string note;
};
ZeroResult find_zero(const PressureProblem& problem, int n, double tol_s, const ZeroOptions& options = {});

struct EllWindow {
  int n = 0;
  std::uint64_t words = 0;
  double log_sum_target = 0.0;    ///< sum of phi^s(i j|_{l(i)})
  double log_sum_lyapunov = 0.0;  ///< sum of phi^s(i) e^{Z* l(i)}
  double value_target = 0.0;
  double value_lyapunov = 0.0;
};

struct EllOptions {
  bool closed = false;  ///< window [n, n+H] instead of [n, n+H)
  std::optional<double> z_star;
};

struct EllPressure {
  PressureEstimate estimate;  ///< value from the target variant at the largest window
  double H = 0.0;
  double z_star = 0.0;
  bool closed = false;
  std::vector<EllWindow> windows;
};
EllPressure ell_pressure(const PressureProblem& problem, double s, const std::vector<int>& windows,
                         const EllOptions& options = {});

struct ZeroCoincidence {
  double s0 = 0.0;
  double value = 0.0;
  double bracket_width = 0.0;
  double tol = 0.0;
  bool passed = false;
  EllPressure ell;
};
ZeroCoincidence zero_coincidence_check(const PressureProblem& problem, double s0, const std::vector<int>& windows,
                                       double tol, const EllOptions& options = {});

struct CoveringRow {
  double s = 0.0;
  int n = 0;
  double log_sum = 0.0;
  std::optional<double> slope;  ///< against the previous n
};

enum class Trend { decaying, growing, flat, mixed };
std::string to_string(Trend t);

struct CoveringTable {
  std::vector<CoveringRow> rows;
  std::vector<std::pair<double, Trend>> classification;
  std::optional<double> last_growing;
  std::optional<double> first_decaying;
  double epsilon = 0.0;
};

/// log sum_{|i|=n} count(i j|_{l(i)}) side^s for each (s, n).
CoveringTable covering_sum_experiment(const AffineIFS& ifs, const TargetSpec& target, const LengthFunction& length,
                                      const std::vector<double>& s_list, const std::vector<int>& n_list,
                                      double epsilon = 1e-3, const SumOptions& options = {});

}  // namespace shrink

#endif  // SHRINK_PRESSURE_HPP_
