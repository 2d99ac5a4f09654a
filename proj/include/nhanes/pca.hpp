#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "nhanes/linalg.hpp"

namespace nhanes::pca {

using linalg::Index;
using linalg::Matrix;
using linalg::Standardizer;
using linalg::Vector;

template <typename Scalar>
struct PcaModel {
  Standardizer<Scalar> standardizer;
  Matrix<Scalar> directions;          ///< d x k, orthonormal columns
  Vector<Scalar> explained_variance;  ///< k eigenvalues, descending, >= 0
  Scalar total_variance = 0;          ///< trace of the covariance that was decomposed
  bool standardized = true;
  std::vector<std::string> names;

  Index k() const noexcept { return directions.cols(); }
  Index dims() const noexcept { return directions.rows(); }
};

struct PcaOptions {
  /// z-score columns first; when false the data are only centred.
  bool standardize = true;
};

/// Top-k eigenvectors of the sample covariance of the (standardized) data.
template <typename Derived>
PcaModel<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& X, Index k,
                                           const PcaOptions& options = {},
                                           std::vector<std::string> names = {}) {
  using Scalar = typename Derived::Scalar;
  if (k < 1 || k > X.cols()) {
    fail(ErrorCode::BadK, "k = " + std::to_string(k) + " outside [1, " +
                              std::to_string(X.cols()) + "]");
  }
  if (!names.empty() && static_cast<Index>(names.size()) != X.cols()) {
    fail(ErrorCode::DimensionMismatch, "column names do not match the data width");
  }
  auto data = linalg::standardize_fit(X, options.standardize);
  const Matrix<Scalar> cov = linalg::covariance(data.z);
  const auto eig = linalg::sym_eig(cov);

  PcaModel<Scalar> model;
  model.standardizer = std::move(data.standardizer);
  model.directions = eig.vectors.leftCols(k);
  model.explained_variance = eig.values.head(k).cwiseMax(Scalar(0));
  model.total_variance = cov.trace();
  model.standardized = options.standardize;
  model.names = std::move(names);
  return model;
}

/// Projections of X onto the principal directions, n x k.
template <typename Scalar, typename Derived>
Matrix<Scalar> pca_transform(const PcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& X) {
  return model.standardizer.apply(X) * model.directions;
}

template <typename Scalar>
struct Loading {
  std::string variable;
  Scalar weight;
};

/// Sort by |weight| descending, ties by variable name.
template <typename Scalar>
void sort_loadings(std::vector<Loading<Scalar>>& list) {
  std::stable_sort(list.begin(), list.end(), [](const Loading<Scalar>& a, const Loading<Scalar>& b) {
    if (std::abs(a.weight) != std::abs(b.weight)) return std::abs(a.weight) > std::abs(b.weight);
    return a.variable < b.variable;
  });
}

/// Per component, the weight of every original variable.
template <typename Scalar>
std::vector<std::vector<Loading<Scalar>>> pca_loadings(const PcaModel<Scalar>& model) {
  if (static_cast<Index>(model.names.size()) != model.dims()) {
    fail(ErrorCode::InvalidArgument, "loadings need a model fitted with column names");
  }
  std::vector<std::vector<Loading<Scalar>>> out;
  for (Index c = 0; c < model.k(); ++c) {
    std::vector<Loading<Scalar>> list;
    for (Index j = 0; j < model.dims(); ++j) {
      list.push_back({model.names[static_cast<std::size_t>(j)], model.directions(j, c)});
    }
    sort_loadings(list);
    out.push_back(std::move(list));
  }
  return out;
}

}  // namespace nhanes::pca
