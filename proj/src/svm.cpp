#include "nhanes/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <optional>

#include "nhanes/error.hpp"
#include "nhanes/table.hpp"

namespace nhanes::svm {

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(gamma > 0 && std::isfinite(gamma))) {
    fail(ErrorCode::InvalidArgument, "rbf kernel needs a positive finite gamma");
  }
}

std::string to_string(KernelKind kind) { return kind == KernelKind::linear ? "linear" : "rbf"; }

KernelKind kernel_kind_from_string(std::string_view s) {
  if (s == "linear") return KernelKind::linear;
  if (s == "rbf") return KernelKind::rbf;
  fail(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(s) + "'");
}

std::string to_string(const KernelSpec& kernel) {
  if (kernel.kind == KernelKind::linear) return "linear";
  return "rbf(gamma=" + format_number(kernel.gamma) + ")";
}

void check_binary_labels(std::span<const int> y) {
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) {
      pos = true;
    } else if (v == -1) {
      neg = true;
    } else {
      fail(ErrorCode::InvalidArgument, "labels must be -1 or +1, got " + std::to_string(v));
    }
  }
  if (!pos || !neg) fail(ErrorCode::SingleClass, "labels contain a single class");
}

namespace {

// Rows of the training kernel matrix. The whole matrix is built up front
// when it fits in the budget; otherwise rows are computed on demand and kept
// in a least-recently-used cache.
class KernelRows {
 public:
  KernelRows(const Eigen::MatrixXd& z, const KernelSpec& kernel, std::size_t budget)
      : z_(z), kernel_(kernel), n_(static_cast<std::size_t>(z.rows())) {
    sq_ = z.rowwise().squaredNorm();
    const std::size_t row_bytes = std::max<std::size_t>(1, n_ * sizeof(double));
    if (n_ * row_bytes <= budget) {
      full_ = z * z.transpose();
      if (kernel.kind == KernelKind::rbf) {
        for (Eigen::Index j = 0; j < full_.cols(); ++j) {
          for (Eigen::Index i = 0; i < full_.rows(); ++i) {
            full_(i, j) = rbf(sq_(i) + sq_(j) - 2.0 * full_(i, j));
          }
        }
      }
      precomputed_ = true;
    } else {
      capacity_ = std::max<std::size_t>(2, budget / row_bytes);
      slot_of_.assign(n_, lru_.end());
    }
  }

  double diag(std::size_t i) const {
    return kernel_.kind == KernelKind::rbf ? 1.0 : sq_(static_cast<Eigen::Index>(i));
  }

  const double* row(std::size_t i) {
    if (precomputed_) return full_.col(static_cast<Eigen::Index>(i)).data();
    auto it = slot_of_[i];
    if (it != lru_.end()) {
      lru_.splice(lru_.begin(), lru_, it);
      return it->values.data();
    }
    if (lru_.size() == capacity_) {
      slot_of_[lru_.back().index] = lru_.end();
      lru_.splice(lru_.begin(), lru_, std::prev(lru_.end()));
      lru_.front().index = i;
    } else {
      lru_.push_front({i, Eigen::VectorXd(static_cast<Eigen::Index>(n_))});
    }
    Entry& e = lru_.front();
    e.values.noalias() = z_ * z_.row(static_cast<Eigen::Index>(i)).transpose();
    if (kernel_.kind == KernelKind::rbf) {
      const double si = sq_(static_cast<Eigen::Index>(i));
      for (Eigen::Index k = 0; k < e.values.size(); ++k) {
        e.values(k) = rbf(sq_(k) + si - 2.0 * e.values(k));
      }
    }
    slot_of_[i] = lru_.begin();
    return e.values.data();
  }

 private:
  struct Entry {
    std::size_t index;
    Eigen::VectorXd values;
  };

  double rbf(double d2) const { return std::exp(-kernel_.gamma * std::max(0.0, d2)); }

  const Eigen::MatrixXd& z_;
  KernelSpec kernel_;
  std::size_t n_;
  Eigen::VectorXd sq_;
  bool precomputed_ = false;
  Eigen::MatrixXd full_;
  std::size_t capacity_ = 0;
  std::list<Entry> lru_;
  std::vector<std::list<Entry>::iterator> slot_of_;
};

}  // namespace

SvmModel svm_train(const Eigen::MatrixXd& X, std::span<const int> y, const KernelSpec& kernel,
                   double C, const SvmOptions& options) {
  kernel.validate();
  if (!(C > 0) || !std::isfinite(C)) fail(ErrorCode::InvalidArgument, "C must be positive");
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    fail(ErrorCode::LengthMismatch, "feature rows and labels differ in length");
  }
  if (X.rows() < 2) fail(ErrorCode::TooFewRows, "SVM training needs at least 2 rows");
  check_binary_labels(y);

  auto data = linalg::standardize_fit(X);
  const Eigen::MatrixXd& z = data.z;
  const std::size_t n = y.size();
  KernelRows rows(z, kernel, options.kernel_cache_bytes);

  // Dual: min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, with Q_ij = y_i y_j K_ij.
  // G holds the gradient Qa - e.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  const std::size_t cap = options.max_iterations ? options.max_iterations : 100 * n;
  auto in_up = [&](std::size_t t) {
    return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] == -1 && alpha[t] < C) || (y[t] == 1 && alpha[t] > 0);
  };

  SvmModel model;
  model.kernel = kernel;
  model.C = C;
  double m_up = 0, m_low = 0;
  std::size_t iter = 0;
  for (;; ++iter) {
    // i: the most violating index. j: among partners that violate together
    // with i, the one whose pair step lowers the dual the most; plain
    // max |E_i - E_j| zig-zags for thousands of steps on low-rank kernels.
    std::optional<std::size_t> bi, bj;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        bi = t;
      }
      if (in_low(t) && v < m_low) m_low = v;
    }
    if (!bi || m_up - m_low <= options.tol) break;
    if (iter == cap) {
      model.converged = false;
      break;
    }
    const std::size_t i = *bi;
    const double* ki = rows.row(i);
    double best_gain = -1, a = 1;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double gap = m_up + y[t] * grad[t];
      if (gap <= 0) continue;
      const double curv = std::max(rows.diag(i) + rows.diag(t) - 2.0 * ki[t], 1e-12);
      const double gain = gap * gap / curv;
      if (gain > best_gain) {
        best_gain = gain;
        bj = t;
        a = curv;
      }
    }
    const std::size_t j = *bj;
    const double* kj = rows.row(j);
    double step = (m_up + y[j] * grad[j]) / a;
    const double room_i = y[i] == 1 ? C - alpha[i] : alpha[i];
    const double room_j = y[j] == -1 ? C - alpha[j] : alpha[j];
    step = std::min({step, room_i, room_j});

    alpha[i] += y[i] * step;
    alpha[j] -= y[j] * step;
    for (std::size_t t : {i, j}) {
      if (alpha[t] < C * 1e-15) alpha[t] = 0.0;
      if (alpha[t] > C * (1 - 1e-15)) alpha[t] = C;
    }
    if (step == room_i) alpha[i] = y[i] == 1 ? C : 0.0;
    if (step == room_j) alpha[j] = y[j] == -1 ? C : 0.0;
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * step * (ki[t] - kj[t]);
  }
  model.iterations = iter;

  double free_sum = 0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0 && alpha[t] < C) {
      free_sum += -y[t] * grad[t];
      ++free_count;
    }
  }
  model.bias = free_count ? free_sum / static_cast<double>(free_count) : (m_up + m_low) / 2.0;
  if (!std::isfinite(model.bias)) model.bias = 0.0;

  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 1e-12) model.support_indices.push_back(t);
  }
  const auto nsv = static_cast<Eigen::Index>(model.support_indices.size());
  model.support_vectors.resize(nsv, z.cols());
  model.dual_coefs.resize(nsv);
  for (Eigen::Index s = 0; s < nsv; ++s) {
    const std::size_t t = model.support_indices[static_cast<std::size_t>(s)];
    model.support_vectors.row(s) = z.row(static_cast<Eigen::Index>(t));
    model.dual_coefs(s) = alpha[t] * y[t];
  }
  model.standardizer = std::move(data.standardizer);
  return model;
}

Eigen::VectorXd decision_scores(const SvmModel& model, const Eigen::MatrixXd& X) {
  if (X.rows() == 0) return Eigen::VectorXd(0);
  const Eigen::MatrixXd z = model.standardizer.apply(X);
  if (model.kernel.kind == KernelKind::linear) {
    return (z * linear_weights(model)).array() + model.bias;
  }
  Eigen::VectorXd out(z.rows());
  const Eigen::VectorXd sv_sq = model.support_vectors.rowwise().squaredNorm();
  constexpr Eigen::Index kBlock = 512;
  for (Eigen::Index start = 0; start < z.rows(); start += kBlock) {
    const Eigen::Index len = std::min(kBlock, z.rows() - start);
    const auto block = z.middleRows(start, len);
    Eigen::MatrixXd k = block * model.support_vectors.transpose();
    const Eigen::VectorXd sq = block.rowwise().squaredNorm();
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      for (Eigen::Index r = 0; r < k.rows(); ++r) {
        k(r, c) = std::exp(-model.kernel.gamma * std::max(0.0, sq(r) + sv_sq(c) - 2.0 * k(r, c)));
      }
    }
    out.segment(start, len) = (k * model.dual_coefs).array() + model.bias;
  }
  return out;
}

std::vector<int> predict(const SvmModel& model, const Eigen::MatrixXd& X) {
  const Eigen::VectorXd s = decision_scores(model, X);
  std::vector<int> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s(i) >= 0 ? 1 : -1;
  return out;
}

Eigen::VectorXd linear_weights(const SvmModel& model) {
  if (model.kernel.kind != KernelKind::linear) {
    fail(ErrorCode::NotLinearKernel, "primal weights exist only for a linear kernel");
  }
  if (model.support_vectors.rows() == 0) return Eigen::VectorXd::Zero(model.standardizer.dims());
  return model.support_vectors.transpose() * model.dual_coefs;
}

}  // namespace nhanes::svm
