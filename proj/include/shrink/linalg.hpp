#ifndef SHRINK_LINALG_HPP_
#define SHRINK_LINALG_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "shrink/error.hpp"

namespace shrink {

/// Dense matrix with inline storage up to 6x6 (enough for exterior powers
/// of 4x4 maps).
template <typename Scalar>
using SmallMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 6, 6>;
template <typename Scalar>
using SmallVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 6, 1>;

template <typename Scalar>
struct SingularProfile {
  SmallVector<Scalar> values;      ///< descending
  SmallVector<Scalar> log_values;  ///< log of values
  Eigen::Index size() const { return values.size(); }
};

namespace detail {

template <typename Scalar>
void two_by_two_singular_values(Scalar a, Scalar b, Scalar c, Scalar d, Scalar& s1, Scalar& s2) {
  using std::abs;
  using std::hypot;
  const Scalar p = hypot(a + d, c - b);
  const Scalar q = hypot(a - d, b + c);
  s1 = (p + q) / Scalar(2);
  s2 = s1 > Scalar(0) ? abs(a * d - b * c) / s1 : Scalar(0);
}

}  // namespace detail

/// Singular values, descending. One-sided Jacobi (Hestenes) in general,
/// closed form for 2x2. No singularity check.
template <typename Derived>
SmallVector<typename Derived::Scalar> jacobi_singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  SmallMatrix<Scalar> u;
  if (m.rows() >= m.cols()) {
    u = m;
  } else {
    u = m.transpose();
  }
  const Eigen::Index n = u.cols();
  SmallVector<Scalar> sv(n);
  if (n == 0) return sv;
  if (n == 1) {
    sv(0) = u.col(0).norm();
    return sv;
  }
  if (n == 2 && u.rows() == 2) {
    detail::two_by_two_singular_values(u(0, 0), u(0, 1), u(1, 0), u(1, 1), sv(0), sv(1));
    return sv;
  }

  const Scalar eps = Eigen::NumTraits<Scalar>::epsilon();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar alpha = u.col(p).squaredNorm();
        const Scalar beta = u.col(q).squaredNorm();
        const Scalar gamma = u.col(p).dot(u.col(q));
        if (gamma == Scalar(0) || abs(gamma) <= eps * sqrt(alpha * beta)) continue;
        rotated = true;
        const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
        Scalar t;
        if (abs(zeta) > Scalar(1e150)) {
          t = Scalar(1) / (Scalar(2) * zeta);
        } else {
          t = (zeta >= Scalar(0) ? Scalar(1) : Scalar(-1)) / (abs(zeta) + sqrt(Scalar(1) + zeta * zeta));
        }
        const Scalar c = Scalar(1) / sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;
        for (Eigen::Index r = 0; r < u.rows(); ++r) {
          const Scalar up = u(r, p);
          const Scalar uq = u(r, q);
          u(r, p) = c * up - s * uq;
          u(r, q) = s * up + c * uq;
        }
      }
    }
    if (!rotated) break;
  }
  for (Eigen::Index k = 0; k < n; ++k) sv(k) = u.col(k).norm();
  std::sort(sv.data(), sv.data() + n, [](Scalar a, Scalar b) { return a > b; });
  return sv;
}

template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  return jacobi_singular_values(m)(0);
}

/// Checked singular values; NearSingular when sigma_d < 1e-14 sigma_1.
template <typename Derived>
SingularProfile<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using std::log;
  SingularProfile<Scalar> out;
  out.values = jacobi_singular_values(m);
  const Eigen::Index n = out.values.size();
  if (n == 0) return out;
  if (!(out.values(0) > Scalar(0)) || out.values(n - 1) < Scalar(1e-14) * out.values(0)) {
    throw NearSingular("linmaps: singular value ratio below 1e-14");
  }
  out.log_values.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) out.log_values(k) = log(out.values(k));
  return out;
}

/// log phi^s from descending log singular values (n of them).
template <typename Scalar>
Scalar log_phi_from_logs(const Scalar* log_sv, int n, Scalar s) {
  using std::floor;
  if (!(s >= Scalar(0)) || s > Scalar(n)) throw OutOfRange("linmaps: s outside [0, d]");
  const int k = static_cast<int>(floor(s));
  Scalar acc(0);
  for (int i = 0; i < k && i < n; ++i) acc += log_sv[i];
  if (k < n) acc += (s - Scalar(k)) * log_sv[k];
  return acc;
}

template <typename Derived>
typename Derived::Scalar log_phi_s(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar s) {
  auto prof = singular_values(m);
  return log_phi_from_logs(prof.log_values.data(), static_cast<int>(prof.size()), s);
}

/// Singular value function phi^s(M).
template <typename Derived>
typename Derived::Scalar phi_s(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar s) {
  using std::exp;
  return exp(log_phi_s(m, s));
}

/// k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> index_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
  if (k > n) return out;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// k-th exterior power (matrix of k x k minors).
template <typename Derived>
SmallMatrix<typename Derived::Scalar> compound_matrix(const Eigen::MatrixBase<Derived>& m, int k) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(m.rows());
  const auto subsets = index_subsets(n, k);
  const auto count = static_cast<Eigen::Index>(subsets.size());
  SmallMatrix<Scalar> out(count, count);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4> sub(k, k);
  for (Eigen::Index r = 0; r < count; ++r) {
    for (Eigen::Index c = 0; c < count; ++c) {
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          sub(i, j) = m(subsets[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)],
                        subsets[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]);
        }
      }
      out(r, c) = sub.determinant();
    }
  }
  return out;
}

}  // namespace shrink

#endif  // SHRINK_LINALG_HPP_
