#pragma once

// Canonical correlation analysis between two row-paired views.
//
// The fit solves the symmetric form of the CCA eigenproblem,
//   M = Cxx^{-1/2} Cxy Cyy^{-1} Cyx Cxx^{-1/2},
// which has the same spectrum as Cxx^{-1} Cxy Cyy^{-1} Cyx. X-side directions
// are mapped back through Cxx^{-1/2}; Y-side directions follow from
// v = Cyy^{-1} Cyx u / sqrt(lambda). Canonical correlations are sqrt(lambda).

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nhanes/linalg.hpp"
#include "nhanes/pca.hpp"

namespace nhanes::cca {

using linalg::Index;
using linalg::Matrix;
using linalg::Standardizer;
using linalg::Vector;

inline constexpr double kDefaultRidge = 1e-3;

template <typename Scalar>
struct CcaModel {
  Standardizer<Scalar> std_x;
  Standardizer<Scalar> std_y;
  Matrix<Scalar> U;             ///< d_x x k, applied to standardized X
  Matrix<Scalar> V;             ///< d_y x k, applied to standardized Y
  Vector<Scalar> correlations;  ///< k values in [0, 1], descending
  Scalar ridge = 0;
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;

  Index k() const noexcept { return U.cols(); }
};

namespace detail {

template <typename Scalar, typename Fn>
auto with_ridge_hint(const char* view, Scalar ridge, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    fail(ErrorCode::NotPositiveDefinite,
         std::string(view) + " covariance is rank deficient at ridge " +
             std::to_string(static_cast<double>(ridge)) +
             "; raise the ridge or drop collinear columns");
  }
}

}  // namespace detail

/// Fits k canonical pairs. `ridge` is added to the diagonal of both
/// standardized covariance matrices before whitening.
template <typename DerivedX, typename DerivedY>
CcaModel<typename DerivedX::Scalar> cca_fit(const Eigen::MatrixBase<DerivedX>& X,
                                            const Eigen::MatrixBase<DerivedY>& Y, Index k,
                                            typename DerivedX::Scalar ridge = kDefaultRidge,
                                            std::vector<std::string> x_names = {},
                                            std::vector<std::string> y_names = {}) {
  using Scalar = typename DerivedX::Scalar;
  if (X.rows() != Y.rows()) {
    fail(ErrorCode::RowMismatch, "views have " + std::to_string(X.rows()) + " and " +
                                     std::to_string(Y.rows()) + " rows");
  }
  if (X.rows() < 2) fail(ErrorCode::TooFewRows, "CCA needs at least 2 paired rows");
  if (k < 1 || k > std::min(X.cols(), Y.cols())) {
    fail(ErrorCode::BadK, "k = " + std::to_string(k) + " outside [1, " +
                              std::to_string(std::min(X.cols(), Y.cols())) + "]");
  }
  if (!(ridge >= 0) || !std::isfinite(ridge)) {
    fail(ErrorCode::InvalidArgument, "ridge must be a finite nonnegative number");
  }
  if ((!x_names.empty() && static_cast<Index>(x_names.size()) != X.cols()) ||
      (!y_names.empty() && static_cast<Index>(y_names.size()) != Y.cols())) {
    fail(ErrorCode::DimensionMismatch, "column names do not match the view widths");
  }

  auto sx = linalg::standardize_fit(X);
  auto sy = linalg::standardize_fit(Y.template cast<Scalar>());
  const Index dx = X.cols(), dy = Y.cols();
  const Matrix<Scalar> Sxx = linalg::covariance(sx.z);
  const Matrix<Scalar> Syy = linalg::covariance(sy.z);
  const Matrix<Scalar> Cxx = Sxx + ridge * Matrix<Scalar>::Identity(dx, dx);
  const Matrix<Scalar> Cyy = Syy + ridge * Matrix<Scalar>::Identity(dy, dy);
  const Matrix<Scalar> Cxy = linalg::cross_covariance(sx.z, sy.z);

  const Matrix<Scalar> Wx =
      detail::with_ridge_hint("X view", ridge, [&] { return linalg::inverse_sqrt_spd(Cxx); });
  const Matrix<Scalar> Wy =
      detail::with_ridge_hint("Y view", ridge, [&] { return linalg::inverse_sqrt_spd(Cyy); });
  const Matrix<Scalar> CyyInvCyx = detail::with_ridge_hint(
      "Y view", ridge, [&] { return linalg::chol_solve(Cyy, Cxy.transpose()); });

  Matrix<Scalar> M = Wx * Cxy * CyyInvCyx * Wx;
  M = (M + M.transpose()) / Scalar(2);
  const auto eig = linalg::sym_eig(M);

  CcaModel<Scalar> model;
  model.ridge = ridge;
  model.U = Wx * eig.vectors.leftCols(k);
  model.correlations.resize(k);
  model.V.resize(dy, k);

  // Components whose lambda is this small carry no usable Y direction in
  // the closed form; they are completed from the Y-side eigenproblem.
  const Scalar degenerate = Scalar(1e-8);
  std::vector<Vector<Scalar>> whitened;  // Cyy^{1/2} v for the accepted columns
  const Matrix<Scalar> WyInv = Cyy * Wy;
  std::vector<Index> pending;
  for (Index i = 0; i < k; ++i) {
    const Scalar lambda = std::clamp(eig.values(i), Scalar(0), Scalar(1));
    model.correlations(i) = std::sqrt(lambda);
    if (lambda > degenerate) {
      model.V.col(i) = CyyInvCyx * model.U.col(i) / std::sqrt(lambda);
      whitened.push_back(WyInv * model.V.col(i));
    } else {
      pending.push_back(i);
    }
  }
  if (!pending.empty()) {
    const Matrix<Scalar> CxxInvCxy = linalg::chol_solve(Cxx, Cxy);
    Matrix<Scalar> N = Wy * Cxy.transpose() * CxxInvCxy * Wy;
    N = (N + N.transpose()) / Scalar(2);
    const auto ey = linalg::sym_eig(N);
    std::vector<Vector<Scalar>> candidates;
    for (Index c = 0; c < dy; ++c) candidates.push_back(ey.vectors.col(c));
    for (Index c = 0; c < dy; ++c) candidates.push_back(Vector<Scalar>::Unit(dy, c));
    std::size_t next = 0;
    for (Index i : pending) {
      while (next < candidates.size()) {
        Vector<Scalar> g = candidates[next++];
        for (const auto& h : whitened) g -= h.dot(g) / h.squaredNorm() * h;
        if (g.norm() > Scalar(0.5)) {
          g.normalize();
          whitened.push_back(g);
          Vector<Scalar> v = Wy * g;
          if ((model.U.col(i).transpose() * Cxy * v)(0, 0) < 0) v = -v;
          model.V.col(i) = v;
          break;
        }
      }
    }
  }

  // Unit variance of the training projections under the unregularized
  // covariances, then the sign convention: largest |U| entry positive per
  // component, V flipped along with it.
  for (Index i = 0; i < k; ++i) {
    const Scalar vu = (model.U.col(i).transpose() * Sxx * model.U.col(i))(0, 0);
    const Scalar vv = (model.V.col(i).transpose() * Syy * model.V.col(i))(0, 0);
    if (vu > 0) model.U.col(i) /= std::sqrt(vu);
    if (vv > 0) model.V.col(i) /= std::sqrt(vv);
  }
  for (Index i = 0; i < k; ++i) {
    Index arg = 0;
    for (Index r = 1; r < dx; ++r) {
      if (std::abs(model.U(r, i)) > std::abs(model.U(arg, i))) arg = r;
    }
    if (model.U(arg, i) < 0) {
      model.U.col(i) = -model.U.col(i);
      model.V.col(i) = -model.V.col(i);
    }
  }

  model.std_x = std::move(sx.standardizer);
  model.std_y = std::move(sy.standardizer);
  model.x_names = std::move(x_names);
  model.y_names = std::move(y_names);
  return model;
}

/// Standardized X times U, n x k. Works on rows never seen during the fit.
template <typename Scalar, typename Derived>
Matrix<Scalar> cca_transform_x(const CcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& X) {
  return model.std_x.apply(X) * model.U;
}

template <typename Scalar, typename Derived>
Matrix<Scalar> cca_transform_y(const CcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& Y) {
  return model.std_y.apply(Y) * model.V;
}

template <typename Scalar>
struct PairedLoadings {
  std::vector<pca::Loading<Scalar>> x;
  std::vector<pca::Loading<Scalar>> y;
};

/// Per component, the weight of each original variable on both sides,
/// sorted by |weight| (ties by name).
template <typename Scalar>
std::vector<PairedLoadings<Scalar>> cca_loadings(const CcaModel<Scalar>& model) {
  if (static_cast<Index>(model.x_names.size()) != model.U.rows() ||
      static_cast<Index>(model.y_names.size()) != model.V.rows()) {
    fail(ErrorCode::InvalidArgument, "loadings need a model fitted with column names");
  }
  std::vector<PairedLoadings<Scalar>> out;
  for (Index c = 0; c < model.k(); ++c) {
    PairedLoadings<Scalar> p;
    for (Index j = 0; j < model.U.rows(); ++j) {
      p.x.push_back({model.x_names[static_cast<std::size_t>(j)], model.U(j, c)});
    }
    for (Index j = 0; j < model.V.rows(); ++j) {
      p.y.push_back({model.y_names[static_cast<std::size_t>(j)], model.V(j, c)});
    }
    pca::sort_loadings(p.x);
    pca::sort_loadings(p.y);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace nhanes::cca
