#include "shrink/linmaps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shrink/error.hpp"

namespace shrink {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Rescales m by a power of two so its largest entry lies in [0.5, 1).
double normalize(SmallMatrix<double>& m) {
  const double big = m.cwiseAbs().maxCoeff();
  if (!(big > 0.0) || !std::isfinite(big)) return 0.0;
  int e = 0;
  std::frexp(big, &e);
  if (e == 0) return 0.0;
  m *= std::ldexp(1.0, -e);
  return e * kLn2;
}

}  // namespace

double log_phi(const LogSingularValues& lsv, double s) { return log_phi_from_logs(lsv.v.data(), lsv.d, s); }

CocycleProduct CocycleProduct::identity(int dim, bool diagonal) {
  if (dim < 1 || dim > kMaxDim) throw ValidationError("linmaps: dimension must be 1..4");
  CocycleProduct p;
  p.d_ = dim;
  p.diagonal_ = diagonal || dim == 1;
  p.sign_.fill(1);
  if (!p.diagonal_) {
    for (int k = 1; k < dim; ++k) {
      const auto size = static_cast<Eigen::Index>(index_subsets(dim, k).size());
      p.compound_[static_cast<std::size_t>(k - 1)] = SmallMatrix<double>::Identity(size, size);
    }
  }
  return p;
}

CocycleProduct CocycleProduct::of(const Eigen::MatrixXd& m, bool diagonal) {
  const int dim = static_cast<int>(m.rows());
  CocycleProduct p = identity(dim, diagonal);
  if (p.diagonal_) {
    for (int i = 0; i < dim; ++i) {
      const double x = m(i, i);
      p.log_diag_[static_cast<std::size_t>(i)] = std::log(std::abs(x));
      p.sign_[static_cast<std::size_t>(i)] = x < 0 ? -1 : 1;
    }
    return p;
  }
  for (int k = 1; k < dim; ++k) {
    auto& c = p.compound_[static_cast<std::size_t>(k - 1)];
    c = compound_matrix(m, k);
    p.log_scale_[static_cast<std::size_t>(k - 1)] = normalize(c);
  }
  p.log_det_ = std::log(std::abs(m.determinant()));
  return p;
}

CocycleProduct CocycleProduct::diagonal_from_logs(const double* log_abs, int dim) {
  CocycleProduct p = identity(dim, true);
  for (int i = 0; i < dim; ++i) p.log_diag_[static_cast<std::size_t>(i)] = log_abs[i];
  return p;
}

CocycleProduct& CocycleProduct::operator*=(const CocycleProduct& rhs) {
  if (d_ == 0) {
    *this = rhs;
    return *this;
  }
  if (rhs.d_ != d_) throw ValidationError("linmaps: dimension mismatch in product");
  if (diagonal_ != rhs.diagonal_) {
    // Mixed forms do not occur inside one map set; go through explicit matrices.
    *this = of(matrix() * rhs.matrix(), false);
    return *this;
  }
  if (diagonal_) {
    for (int i = 0; i < d_; ++i) {
      log_diag_[static_cast<std::size_t>(i)] += rhs.log_diag_[static_cast<std::size_t>(i)];
      sign_[static_cast<std::size_t>(i)] *= rhs.sign_[static_cast<std::size_t>(i)];
    }
    return *this;
  }
  SmallMatrix<double> tmp;
  for (int k = 0; k + 1 < d_; ++k) {
    auto& c = compound_[static_cast<std::size_t>(k)];
    tmp.noalias() = c.lazyProduct(rhs.compound_[static_cast<std::size_t>(k)]);
    c = tmp;
    log_scale_[static_cast<std::size_t>(k)] += rhs.log_scale_[static_cast<std::size_t>(k)] + normalize(c);
  }
  log_det_ += rhs.log_det_;
  return *this;
}

LogSingularValues CocycleProduct::log_singular_values() const {
  LogSingularValues out;
  out.d = d_;
  if (diagonal_) {
    std::copy(log_diag_.begin(), log_diag_.begin() + d_, out.v.begin());
    std::sort(out.v.begin(), out.v.begin() + d_, [](double a, double b) { return a > b; });
    return out;
  }
  // log(sigma_1...sigma_k) = scale_k + log ||wedge^k||.
  double prev = 0.0;
  for (int k = 1; k <= d_; ++k) {
    double cur;
    if (k < d_) {
      const auto& c = compound_[static_cast<std::size_t>(k - 1)];
      cur = log_scale_[static_cast<std::size_t>(k - 1)] + std::log(spectral_norm(c));
    } else {
      cur = log_det_;
    }
    double lk = cur - prev;
    if (k > 1) lk = std::min(lk, out.v[static_cast<std::size_t>(k - 2)]);
    out.v[static_cast<std::size_t>(k - 1)] = lk;
    prev = cur;
  }
  return out;
}

double CocycleProduct::log_abs_det() const {
  if (!diagonal_) return log_det_;
  double acc = 0.0;
  for (int i = 0; i < d_; ++i) acc += log_diag_[static_cast<std::size_t>(i)];
  return acc;
}

Eigen::MatrixXd CocycleProduct::matrix() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d_, d_);
  if (diagonal_) {
    for (int i = 0; i < d_; ++i) {
      m(i, i) = sign_[static_cast<std::size_t>(i)] * std::exp(log_diag_[static_cast<std::size_t>(i)]);
    }
    return m;
  }
  m = compound_[0] * std::exp(log_scale_[0]);
  return m;
}

LinearMapSet::LinearMapSet(std::vector<Eigen::MatrixXd> maps) : maps_(std::move(maps)) {
  if (maps_.empty()) throw ValidationError("linmaps: empty map set");
  dim_ = static_cast<int>(maps_[0].rows());
  if (dim_ < 1 || dim_ > kMaxDim) throw ValidationError("linmaps: dimension must be 1..4");
  if (maps_.size() > 255) throw ValidationError("linmaps: at most 255 maps");
  diagonal_ = true;
  alpha_minus_ = 0.0;
  alpha_plus_ = 0.0;
  for (std::size_t a = 0; a < maps_.size(); ++a) {
    const auto& m = maps_[a];
    if (m.rows() != dim_ || m.cols() != dim_) throw ValidationError("linmaps: map shapes differ");
    if (!m.allFinite()) throw ValidationError("linmaps: non-finite matrix entry");
    const auto sv = jacobi_singular_values(m);
    if (!(sv(dim_ - 1) > 1e-12)) {
      throw ValidationError("linmaps: map " + std::to_string(a + 1) + " is not invertible");
    }
    if (!(sv(0) < 1.0)) throw ValidationError("linmaps: map " + std::to_string(a + 1) + " is not a contraction");
    alpha_plus_ = std::max(alpha_plus_, sv(0));
    alpha_minus_ = std::max(alpha_minus_, 1.0 / sv(dim_ - 1));
    for (int r = 0; r < dim_; ++r) {
      for (int c = 0; c < dim_; ++c) {
        if (r != c && m(r, c) != 0.0) diagonal_ = false;
      }
    }
  }
  if (alpha_plus_ >= 0.5) {
    warnings_.push_back("linmaps: max ||T_i|| >= 1/2, dimension formula hypothesis not met");
  }
  for (const auto& m : maps_) generators_.push_back(CocycleProduct::of(m, diagonal_));
}

CocycleProduct LinearMapSet::product(const Word& w) const {
  CocycleProduct p = identity();
  for (Symbol a : w) {
    if (a >= maps_.size()) throw OutOfRange("linmaps: symbol outside alphabet");
    p *= generators_[a];
  }
  return p;
}

Eigen::MatrixXd compose(const LinearMapSet& maps, const Word& w) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(maps.dim(), maps.dim());
  for (Symbol a : w) {
    if (a >= maps.size()) throw OutOfRange("linmaps: symbol outside alphabet");
    m = m * maps.map(a);
  }
  return m;
}

double log_phi_s(const LinearMapSet& maps, const Word& w, double s) { return maps.product(w).log_phi(s); }

double phi_s(const LinearMapSet& maps, const Word& w, double s) { return std::exp(log_phi_s(maps, w, s)); }

RatioBoundsReport ratio_bounds_check(const LinearMapSet& maps, const Word& w, double t, double s) {
  if (!(t >= 0.0) || !(s > t) || s > maps.dim()) throw OutOfRange("linmaps: need 0 <= t < s <= d");
  const auto p = maps.product(w);
  RatioBoundsReport r;
  const double n = static_cast<double>(w.size());
  r.log_ratio = p.log_phi(s) - p.log_phi(t);
  r.log_lower = -n * (s - t) * std::log(maps.alpha_minus());
  r.log_upper = n * (s - t) * std::log(maps.alpha_plus());
  const double tol = 1e-10 * std::max(1.0, std::abs(r.log_ratio));
  r.violated = r.log_ratio < r.log_lower - tol || r.log_ratio > r.log_upper + tol;
  return r;
}

}  // namespace shrink
