#ifndef SHRINK_CANTOR_HPP_
#define SHRINK_CANTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "shrink/length.hpp"
#include "shrink/linmaps.hpp"
#include "shrink/modular.hpp"
#include "shrink/quasiadd.hpp"
#include "shrink/target.hpp"
#include "shrink/word_measure.hpp"

namespace shrink {

/// Psi(b) = log phi^{s0}(b) + Z l(b) on the blocks of A^R.
struct BigPsi {
  double s0 = 0.0;
  double Z = 0.0;
  int R = 0;
  std::vector<Word> blocks;  ///< lexicographic, index = base-N value
  std::vector<double> values;
  double sum(const std::vector<Word>& seq) const;
  std::size_t index_of(const Word& b) const;
};

BigPsi big_psi(const LinearMapSet& maps, const LengthFunction& length, double s0, double Z, int R,
               std::uint64_t budget = 1ull << 20);

/// nu_R[b] = exp(Psi(b)) / w_R.
struct NuR {
  BigPsi psi;
  std::vector<double> probabilities;
  std::vector<double> log_probabilities;
  double w = 0.0;
  double log_w = 0.0;
};

NuR build_nu(const LinearMapSet& maps, const LengthFunction& length, double s0, double Z, int R,
             std::uint64_t budget = 1ull << 20);

/// w_R over a grid of R with the fitted constant c = max(w, 1/w).
struct NormalizerCheck {
  std::vector<std::pair<int, double>> w;
  double c10 = 0.0;
  std::optional<double> bound;  ///< configured c10, when given
  bool passed = true;
};
NormalizerCheck normalizer_check(const LinearMapSet& maps, const LengthFunction& length, double s0, double Z,
                                 const std::vector<int>& Rs, std::optional<double> bound = std::nullopt);

/// log of the sum of exp(Psi(r_1)+...+Psi(r_z)) over the cover for (a, n).
double log_cover_psi_sum(const QuasiCertificate& cert, const LinearMapSet& maps, const NuR& nu, const Word& base,
                         int n, const ModularOptions& options = {});

struct CantorOptions {
  int level_cap = 2;
  std::size_t width_cap = 4096;  ///< larger levels are sampled with this many draws
  int n1 = 0;                    ///< 0: 4 R
  double growth = 4.0;           ///< n_i = n1 g^{i(i-1)/2}
  std::uint64_t seed = 1;
  int threads = 1;
  double tol = 1e-9;
};

/// One level closure inside a stored word: the modular part ends at
/// modular_end, then connector (up to connector_end) and the target prefix
/// of length target_length.
struct CantorSegment {
  std::size_t level_start = 0;
  std::size_t modular_end = 0;
  std::size_t connector_end = 0;
  std::size_t target_length = 0;
};

struct CantorNode {
  Word flat;
  double mass = 0.0;
  std::vector<std::vector<Word>> blocks;  ///< one generating block sequence per level
  std::vector<CantorSegment> segments;
  int multiplicity = 1;  ///< generating sequences merged into this word
};

struct CantorLevel {
  int k = 0;
  std::size_t n_k = 0;
  bool sampled = false;
  std::vector<CantorNode> nodes;  ///< sorted by flat word
  double mass_sum = 0.0;
};

/// The Cantor set W_R and its mass distribution mu_R. Levels up to
/// level_cap are stored; cylinder masses and samples are computed exactly
/// from the generating rule at any depth.
class CantorTree : public WordMeasure {
 public:
  CantorTree(const QuasiCertificate& cert, const LinearMapSet& maps, const TargetSpec& target,
             const LengthFunction& length, double s0, double Z, int R, const CantorOptions& options = {});

  int alphabet() const override { return maps_.size(); }
  double measure(const Word& u) const override;
  Word sample_extension(const Word& prefix, std::size_t depth, std::mt19937_64& rng) const override;

  /// mu_R[u]; throws NotInTree when the cylinder carries no mass.
  double mass(const Word& u) const;
  /// Number of distinct block-start patterns among the generating paths
  /// through [u].
  std::size_t representation_count(const Word& u) const;
  /// Product formula nu(b_1)...nu(b_k) along one generating path of u,
  /// ignoring repetitions.
  double product_mass(const Word& u) const;

  std::size_t schedule(int k) const;  ///< n_k, k >= 1
  const std::vector<CantorLevel>& levels() const { return levels_; }
  const NuR& nu() const { return nu_; }
  int R() const { return R_; }
  int K() const { return K_; }
  double s0() const { return s0_; }
  double Z() const { return Z_; }
  const CantorOptions& options() const { return options_; }
  const TargetSpec& target() const { return target_; }
  const LengthFunction& length() const { return length_; }
  std::vector<std::string> notes() const;

  /// Replays every stored word: each target segment must equal the target
  /// prefix of the recorded length, which in turn must be floor l of the
  /// word up to the connector end. Returns the number of mismatches.
  std::size_t replay_mismatches() const;

  /// Generator state: the word so far, its product and log phi^{s0}, the
  /// level being built and how many blocks it has, and the log nu mass.
  struct State {
    Word flat;
    CocycleProduct product;
    double psi = 0.0;
    int level = 1;
    int blocks_in_level = 0;
    std::size_t level_start = 0;
    double log_mass = 0.0;
    std::vector<std::size_t> block_starts;
    std::vector<std::vector<Word>> blocks;
    std::vector<CantorSegment> segments;
  };

 private:
  State root() const;
  bool level_ready(const State& st) const;
  void append_block(State& st, std::size_t b) const;
  void close_level(State& st) const;
  void advance_random(State& st, std::mt19937_64& rng) const;
  /// Calls leaf(state) for every generating path state consistent with u
  /// that reaches length |u|.
  template <typename Leaf>
  void for_each_leaf(const Word& u, Leaf&& leaf) const;
  void build_levels();

  LinearMapSet maps_;
  TargetSpec target_;
  LengthFunction length_;
  ConnectorSet conn_;
  double Q_ = 0.0;
  double s0_ = 0.0;
  double Z_ = 0.0;
  int R_ = 0;
  int K_ = 0;
  CantorOptions options_;
  NuR nu_;
  std::vector<CocycleProduct> block_products_;
  std::vector<CantorLevel> levels_;
};

struct ConcentrationOptions {
  int samples = 200;
  int max_depth = 30;
  std::uint64_t seed = 1;
};

/// log(mu_R[w|_n] / phi^t(w|_n)) over sampled words w and n <= max_depth.
struct ConcentrationReport {
  double s = 0.0;
  double t = 0.0;
  int samples = 0;
  int max_depth = 0;
  std::vector<double> per_depth_max;  ///< index n-1
  double max_log_ratio = 0.0;
  Word worst_prefix;
  double slope = 0.0;      ///< least squares slope of per_depth_max in n
  double intercept = 0.0;  ///< smallest a with per_depth_max <= a + slope n
  double tail_excess = 0.0;  ///< max over n > depth/2 minus max over n <= depth/2
  std::vector<double> level_mass_sums;
  double mass_error = 0.0;  ///< max |level mass - 1|
  std::vector<double> log_ratios;  ///< every sampled (w, n) pair
  bool passed = false;
  std::string note;
};

ConcentrationReport concentration_check(const CantorTree& tree, const LinearMapSet& maps, double s, double t,
                                        const ConcentrationOptions& options = {});

/// Largest representation count over all words of the given length, and
/// whether it stays within (K+1)^{n/R}.
struct MultiplicityReport {
  int n = 0;
  std::size_t max_count = 0;
  double bound = 0.0;
  bool passed = true;
};
MultiplicityReport multiplicity_check(const CantorTree& tree, int n);

}  // namespace shrink

#endif  // SHRINK_CANTOR_HPP_
