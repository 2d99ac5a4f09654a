#pragma once

// Soft-margin SVM trained by sequential minimal optimization.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nhanes/linalg.hpp"

namespace nhanes::svm {

enum class KernelKind { linear, rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double gamma = 0.0;  ///< rbf only: K(a, b) = exp(-gamma |a - b|^2)

  static KernelSpec linear() { return {KernelKind::linear, 0.0}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma}; }

  /// Throws InvalidArgument for a non-positive rbf gamma.
  void validate() const;
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(std::string_view s);
std::string to_string(const KernelSpec& kernel);

struct SvmOptions {
  double tol = 1e-3;
  /// 0 means 100 * n.
  std::size_t max_iterations = 0;
  /// Kernel rows are precomputed when the full matrix fits, else cached (LRU).
  std::size_t kernel_cache_bytes = std::size_t{256} << 20;
};

struct SvmModel {
  KernelSpec kernel;
  double C = 1.0;
  linalg::Standardizer<double> standardizer;
  Eigen::MatrixXd support_vectors;  ///< standardized rows with alpha > 1e-12
  Eigen::VectorXd dual_coefs;       ///< alpha_i * y_i per support vector
  double bias = 0.0;
  std::vector<std::size_t> support_indices;  ///< training rows of the support vectors
  std::size_t iterations = 0;
  bool converged = true;  ///< false when the iteration cap stopped the solver

  std::size_t dims() const noexcept { return static_cast<std::size_t>(standardizer.dims()); }
};

/// Labels are -1/+1. Features are z-scored internally; the standardizer is
/// kept in the model and applied again at prediction time.
SvmModel svm_train(const Eigen::MatrixXd& X, std::span<const int> y, const KernelSpec& kernel,
                   double C, const SvmOptions& options = {});

/// f(x) = sum_i alpha_i y_i K(x_i, x) + b for every row of X.
Eigen::VectorXd decision_scores(const SvmModel& model, const Eigen::MatrixXd& X);

/// sign(f(x)); a score of exactly 0 maps to +1.
std::vector<int> predict(const SvmModel& model, const Eigen::MatrixXd& X);

/// Primal weights w = sum_i alpha_i y_i x_i of a linear model, in the
/// standardized feature space: f(x) = w . z(x) + b. Throws NotLinearKernel.
Eigen::VectorXd linear_weights(const SvmModel& model);

/// Throws SingleClass unless both -1 and +1 occur, InvalidArgument for any
/// other label value.
void check_binary_labels(std::span<const int> y);

}  // namespace nhanes::svm
