#ifndef SHRINK_LINMAPS_HPP_
#define SHRINK_LINMAPS_HPP_

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shrink/linalg.hpp"
#include "shrink/word.hpp"

namespace shrink {

constexpr int kMaxDim = 4;

/// Descending log singular values of a product.
struct LogSingularValues {
  std::array<double, kMaxDim> v{};
  int d = 0;
  double operator[](int k) const { return v[static_cast<std::size_t>(k)]; }
};

double log_phi(const LogSingularValues& lsv, double s);

/// Product of cocycle matrices kept in a form that stays accurate for long
/// words: for a d x d product it stores the exterior powers 1..d-1, each
/// rescaled by a power of two, plus log|det|. Diagonal products keep
/// log|diag| directly.
class CocycleProduct {
 public:
  CocycleProduct() = default;
  static CocycleProduct identity(int dim, bool diagonal);
  static CocycleProduct of(const Eigen::MatrixXd& m, bool diagonal);
  /// Diagonal product with the given log|entries| (all signs positive).
  static CocycleProduct diagonal_from_logs(const double* log_abs, int dim);

  CocycleProduct& operator*=(const CocycleProduct& rhs);
  friend CocycleProduct operator*(CocycleProduct lhs, const CocycleProduct& rhs) {
    lhs *= rhs;
    return lhs;
  }

  int dim() const { return d_; }
  bool is_diagonal() const { return diagonal_; }
  LogSingularValues log_singular_values() const;
  double log_phi(double s) const { return shrink::log_phi(log_singular_values(), s); }
  double log_norm() const { return log_singular_values()[0]; }
  double log_abs_det() const;
  /// Entries of log|diag| (diagonal products only).
  const std::array<double, kMaxDim>& log_diagonal() const { return log_diag_; }
  /// Reconstructed product (may overflow/underflow for very long words).
  Eigen::MatrixXd matrix() const;

 private:
  int d_ = 0;
  bool diagonal_ = true;
  std::array<double, kMaxDim> log_diag_{};
  std::array<int, kMaxDim> sign_{};
  std::array<SmallMatrix<double>, kMaxDim - 1> compound_;
  std::array<double, kMaxDim - 1> log_scale_{};
  double log_det_ = 0.0;
};

/// Finite family of invertible contracting matrices.
class LinearMapSet {
 public:
  LinearMapSet() = default;
  /// Validates shape, invertibility and ||T_i|| < 1.
  explicit LinearMapSet(std::vector<Eigen::MatrixXd> maps);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(maps_.size()); }
  const Eigen::MatrixXd& map(int a) const { return maps_[static_cast<std::size_t>(a)]; }
  const CocycleProduct& generator(int a) const { return generators_[static_cast<std::size_t>(a)]; }
  /// max_i ||T_i^{-1}|| and max_i ||T_i||.
  double alpha_minus() const { return alpha_minus_; }
  double alpha_plus() const { return alpha_plus_; }
  bool diagonal() const { return diagonal_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  CocycleProduct identity() const { return CocycleProduct::identity(dim_, diagonal_); }
  CocycleProduct product(const Word& w) const;

 private:
  int dim_ = 0;
  bool diagonal_ = true;
  double alpha_minus_ = 0.0;
  double alpha_plus_ = 0.0;
  std::vector<Eigen::MatrixXd> maps_;
  std::vector<CocycleProduct> generators_;
  std::vector<std::string> warnings_;
};

/// T_w = T_{w_1} ... T_{w_n}; identity for the empty word.
Eigen::MatrixXd compose(const LinearMapSet& maps, const Word& w);

/// log phi^s(T_w).
double log_phi_s(const LinearMapSet& maps, const Word& w, double s);
double phi_s(const LinearMapSet& maps, const Word& w, double s);

/// Checks alpha_-^{-(s-t)|i|} <= phi^s(i)/phi^t(i) <= alpha_+^{(s-t)|i|} for t <= s.
struct RatioBoundsReport {
  double log_ratio = 0.0;
  double log_lower = 0.0;
  double log_upper = 0.0;
  bool violated = false;
};
RatioBoundsReport ratio_bounds_check(const LinearMapSet& maps, const Word& w, double t, double s);

/// Visits every word of A^n extending prefix (lexicographic order) with the
/// product of the whole word. Prefix products are reused along the way.
template <typename Fn>
void for_each_word_product(const LinearMapSet& maps, std::size_t n, const Word& prefix, Fn&& fn) {
  const std::size_t p = prefix.size();
  if (p > n) return;
  const std::size_t free = n - p;
  std::vector<CocycleProduct> stack(free + 1);
  stack[0] = maps.product(prefix);
  Word w = prefix;
  w.resize(n);
  for (std::size_t k = 0; k < free; ++k) {
    w[p + k] = 0;
    stack[k + 1] = stack[k] * maps.generator(0);
  }
  const int N = maps.size();
  while (true) {
    fn(static_cast<const Word&>(w), static_cast<const CocycleProduct&>(stack[free]));
    std::size_t k = free;
    while (k > 0 && w[p + k - 1] + 1 >= N) --k;
    if (k == 0) break;
    ++w[p + k - 1];
    stack[k] = stack[k - 1] * maps.generator(w[p + k - 1]);
    for (std::size_t j = k; j < free; ++j) {
      w[p + j] = 0;
      stack[j + 1] = stack[j] * maps.generator(0);
    }
  }
}

}  // namespace shrink

#endif  // SHRINK_LINMAPS_HPP_
