#pragma once

// Dense kernels shared by PCA, CCA and the SVM: z-scoring, sample
// (cross-)covariance, a cyclic Jacobi symmetric eigensolver and SPD solves.
//
// Data matrices are samples-as-rows (n x d). All functions are pure and
// templated on the scalar type; they accept any Eigen expression.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "nhanes/error.hpp"

namespace nhanes::linalg {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Index = Eigen::Index;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) fail(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
}

/// Per-column affine map x -> (x - mean) / std. Columns that were constant
/// when fitted keep std = 1 and are flagged.
template <typename Scalar>
struct Standardizer {
  Vector<Scalar> means;
  Vector<Scalar> stds;
  std::vector<bool> constant;

  Index dims() const noexcept { return means.size(); }

  template <typename Derived>
  Matrix<Scalar> apply(const Eigen::MatrixBase<Derived>& X) const {
    if (X.cols() != dims()) {
      fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(dims()) + " columns, got " +
                                             std::to_string(X.cols()));
    }
    return (X.template cast<Scalar>().rowwise() - means.transpose()).array().rowwise() /
           stds.transpose().array();
  }

  static Standardizer identity(Index d) {
    return {Vector<Scalar>::Zero(d), Vector<Scalar>::Ones(d), std::vector<bool>(d, false)};
  }
};

template <typename Scalar>
struct StandardizedData {
  Standardizer<Scalar> standardizer;
  Matrix<Scalar> z;
};

/// Centres every column and, when `scale` is set, divides by the sample
/// standard deviation (n - 1 denominator).
template <typename Derived>
StandardizedData<typename Derived::Scalar> standardize_fit(const Eigen::MatrixBase<Derived>& X,
                                                           bool scale = true) {
  using Scalar = typename Derived::Scalar;
  const Index n = X.rows();
  const Index d = X.cols();
  if (n < 2) fail(ErrorCode::TooFewRows, "standardization needs at least 2 rows");
  require_finite(X, "data matrix");

  StandardizedData<Scalar> out;
  auto& s = out.standardizer;
  s.means = X.colwise().mean().transpose();
  s.stds = Vector<Scalar>::Ones(d);
  s.constant.assign(static_cast<std::size_t>(d), false);
  Matrix<Scalar> centered = X.rowwise() - s.means.transpose();
  // Second pass removes the rounding left in the first mean estimate.
  const RowVector<Scalar> residual_mean = centered.colwise().mean();
  s.means += residual_mean.transpose();
  centered.rowwise() -= residual_mean;

  for (Index j = 0; j < d; ++j) {
    const Scalar ss = centered.col(j).squaredNorm();
    const Scalar sd = std::sqrt(ss / static_cast<Scalar>(n - 1));
    const Scalar floor = Scalar(64) * std::numeric_limits<Scalar>::epsilon() *
                         std::max(Scalar(1), std::abs(s.means(j)));
    if (!(sd > floor)) {
      s.constant[static_cast<std::size_t>(j)] = true;
      centered.col(j).setZero();
    } else if (scale) {
      s.stds(j) = sd;
      centered.col(j) /= sd;
    }
  }
  out.z = std::move(centered);
  return out;
}

/// (1/(n-1)) Zᵀ Z, symmetrized. Z is assumed centred.
template <typename Derived>
Matrix<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& Z) {
  using Scalar = typename Derived::Scalar;
  if (Z.rows() < 2) fail(ErrorCode::TooFewRows, "covariance needs at least 2 rows");
  Matrix<Scalar> c = Z.transpose() * Z / static_cast<Scalar>(Z.rows() - 1);
  return (c + c.transpose()) / Scalar(2);
}

/// (1/(n-1)) Zxᵀ Zy, shape d_x x d_y.
template <typename DerivedX, typename DerivedY>
Matrix<typename DerivedX::Scalar> cross_covariance(const Eigen::MatrixBase<DerivedX>& Zx,
                                                   const Eigen::MatrixBase<DerivedY>& Zy) {
  using Scalar = typename DerivedX::Scalar;
  if (Zx.rows() != Zy.rows()) {
    fail(ErrorCode::RowMismatch, "views have " + std::to_string(Zx.rows()) + " and " +
                                     std::to_string(Zy.rows()) + " rows");
  }
  if (Zx.rows() < 2) fail(ErrorCode::TooFewRows, "cross-covariance needs at least 2 rows");
  return Zx.transpose() * Zy / static_cast<Scalar>(Zx.rows() - 1);
}

template <typename Scalar>
struct EigenResult {
  Vector<Scalar> values;   ///< descending
  Matrix<Scalar> vectors;  ///< unit columns paired with `values`
  int sweeps = 0;
};

inline constexpr int kMaxJacobiSweeps = 100;

/// Flips each column so that its largest-magnitude entry (first on ties) is positive.
template <typename Scalar>
void normalize_signs(Matrix<Scalar>& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    Scalar best = -1;
    for (Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) > best) {
        best = std::abs(vectors(i, j));
        arg = i;
      }
    }
    if (vectors.rows() > 0 && vectors(arg, j) < 0) vectors.col(j) = -vectors.col(j);
  }
}

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
/// Converged once every off-diagonal magnitude is at most 1e-12 * ||A||_F.
template <typename Derived>
EigenResult<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  if (input.rows() != input.cols()) {
    fail(ErrorCode::DimensionMismatch, "eigendecomposition needs a square matrix");
  }
  require_finite(input, "matrix");
  const Index n = input.rows();
  Matrix<Scalar> a = input;
  const Scalar norm = a.norm();
  const Scalar asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (n > 0 && asym > Scalar(1e-10) * std::max(Scalar(1), norm)) {
    fail(ErrorCode::NotSymmetric, "matrix is not symmetric (max |a_ij - a_ji| = " +
                                      std::to_string(static_cast<double>(asym)) + ")");
  }
  a = (a + a.transpose()) / Scalar(2);

  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);
  const Scalar threshold = Scalar(1e-12) * norm;
  auto off_diagonal_max = [&] {
    Scalar m = 0;
    for (Index q = 1; q < n; ++q)
      for (Index p = 0; p < q; ++p) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  int sweep = 0;
  while (off_diagonal_max() > threshold) {
    if (sweep == kMaxJacobiSweeps) {
      fail(ErrorCode::NoConvergence, "Jacobi eigensolver did not converge in " +
                                         std::to_string(kMaxJacobiSweeps) + " sweeps");
    }
    ++sweep;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        // Rotation angle chosen so the (p, q) entry vanishes; |t| <= 1 keeps
        // the update stable.
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::hypot(theta, Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });
  EigenResult<Scalar> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = a(src, src);
    out.vectors.col(j) = v.col(src);
  }
  normalize_signs(out.vectors);
  out.sweeps = sweep;
  return out;
}

/// Solves A X = B for symmetric positive definite A via Cholesky.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> chol_solve(const Eigen::MatrixBase<DerivedA>& A,
                                             const Eigen::MatrixBase<DerivedB>& B) {
  using Scalar = typename DerivedA::Scalar;
  if (A.rows() != A.cols() || A.rows() != B.rows()) {
    fail(ErrorCode::DimensionMismatch, "chol_solve shape mismatch");
  }
  require_finite(A, "matrix");
  Eigen::LLT<Matrix<Scalar>> llt(A.eval());
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::NotPositiveDefinite, "matrix is not positive definite (nonpositive pivot)");
  }
  return llt.solve(B.template cast<Scalar>());
}

/// A^(-1/2) for symmetric positive definite A, through its eigendecomposition.
template <typename Derived>
Matrix<typename Derived::Scalar> inverse_sqrt_spd(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(A);
  const Index n = A.rows();
  if (n == 0) return Matrix<Scalar>(0, 0);
  const Scalar top = std::max(std::abs(eig.values(0)), std::numeric_limits<Scalar>::min());
  const Scalar floor = static_cast<Scalar>(n) * std::numeric_limits<Scalar>::epsilon() * top;
  if (!(eig.values(n - 1) > floor)) {
    fail(ErrorCode::NotPositiveDefinite,
         "matrix is singular or indefinite (smallest eigenvalue " +
             std::to_string(static_cast<double>(eig.values(n - 1))) + ")");
  }
  const Vector<Scalar> scale = eig.values.array().rsqrt();
  Matrix<Scalar> out = eig.vectors * scale.asDiagonal() * eig.vectors.transpose();
  return (out + out.transpose()) / Scalar(2);
}

}  // namespace nhanes::linalg
