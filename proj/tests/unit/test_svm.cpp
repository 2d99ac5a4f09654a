#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nhanes/svm.hpp"

using namespace nhanes;
using namespace nhanes::svm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

struct Blobs {
  MatrixXd x;
  std::vector<int> y;
};

Blobs blobs(Rng& rng, int n, double shift, int dims = 2) {
  Blobs b;
  b.x = testkit::random_matrix(rng, n, dims);
  for (int i = 0; i < n; ++i) {
    b.y.push_back(i % 2 == 0 ? 1 : -1);
    b.x(i, 0) += b.y.back() * shift;
  }
  return b;
}

// Checks the three KKT cases for every training row, with alpha recovered
// from the stored dual coefficients.
void expect_kkt(const SvmModel& m, const Blobs& b, double tol) {
  std::vector<double> alpha(b.y.size(), 0.0);
  for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
    alpha[m.support_indices[s]] = std::abs(m.dual_coefs(static_cast<Eigen::Index>(s)));
  }
  const VectorXd f = decision_scores(m, b.x);
  for (std::size_t i = 0; i < b.y.size(); ++i) {
    const double yf = b.y[i] * f(static_cast<Eigen::Index>(i));
    EXPECT_GE(alpha[i], 0.0);
    EXPECT_LE(alpha[i], m.C * (1 + 1e-12));
    if (alpha[i] == 0.0) {
      EXPECT_GE(yf, 1 - tol) << i;
    } else if (alpha[i] < m.C * (1 - 1e-9)) {
      EXPECT_NEAR(yf, 1.0, tol) << i;
    } else {
      EXPECT_LE(yf, 1 + tol) << i;
    }
  }
}

}  // namespace

TEST(SvmTrain, OneDimensionalMidpoint) {
  MatrixXd x(2, 1);
  x << 0, 1;
  const std::vector<int> y{-1, 1};
  const auto m = svm_train(x, y, KernelSpec::linear(), 1000);
  MatrixXd mid(1, 1);
  mid << 0.5;
  EXPECT_NEAR(decision_scores(m, mid)(0), 0.0, 1e-3);
  EXPECT_EQ(predict(m, x), y);
}

TEST(SvmTrain, XorWithRbf) {
  MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> y{-1, -1, 1, 1};
  const auto m = svm_train(x, y, KernelSpec::rbf(1.0), 10);
  EXPECT_EQ(predict(m, x), y);
  EXPECT_TRUE(m.converged);
  expect_kkt(m, Blobs{x, y}, 1e-3);
}

TEST(SvmTrain, Errors) {
  MatrixXd x(3, 1);
  x << 0, 1, 2;
  const std::vector<int> same{1, 1, 1};
  EXPECT_EQ(code_of([&] { svm_train(x, same, KernelSpec::linear(), 1); }), ErrorCode::SingleClass);
  const std::vector<int> bad{1, 0, -1};
  EXPECT_EQ(code_of([&] { svm_train(x, bad, KernelSpec::linear(), 1); }), ErrorCode::InvalidArgument);
  const std::vector<int> ok{1, -1, 1};
  EXPECT_EQ(code_of([&] { svm_train(x, ok, KernelSpec::rbf(0), 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { svm_train(x, ok, KernelSpec::linear(), 0); }), ErrorCode::InvalidArgument);
  const std::vector<int> two{1, -1};
  EXPECT_EQ(code_of([&] { svm_train(x, two, KernelSpec::linear(), 1); }), ErrorCode::LengthMismatch);
}

TEST(SvmPredict, EmptyInputAndWidthCheck) {
  Rng rng(1);
  const auto b = blobs(rng, 20, 2.0);
  const auto m = svm_train(b.x, b.y, KernelSpec::linear(), 1);
  EXPECT_EQ(decision_scores(m, MatrixXd(0, 2)).size(), 0);
  EXPECT_TRUE(predict(m, MatrixXd(0, 2)).empty());
  EXPECT_EQ(code_of([&] { decision_scores(m, MatrixXd::Zero(1, 3)); }), ErrorCode::DimensionMismatch);
}

TEST(SvmTrain, SeparableDataIsFittedExactly) {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const auto b = blobs(rng, 60, 4.0);
    const auto m = svm_train(b.x, b.y, KernelSpec::linear(), 100);
    EXPECT_EQ(predict(m, b.x), b.y);
  }
}

TEST(SvmTrain, KktAndDualFeasibility) {
  Rng rng(3);
  for (int rep = 0; rep < 6; ++rep) {
    const auto b = blobs(rng, 80, 0.8, 3);
    const KernelSpec k = rep % 2 ? KernelSpec::rbf(0.5) : KernelSpec::linear();
    const auto m = svm_train(b.x, b.y, k, 1.0);
    ASSERT_TRUE(m.converged);
    EXPECT_NEAR(m.dual_coefs.sum(), 0.0, 1e-8);
    expect_kkt(m, b, 1e-3);
  }
}

TEST(SvmTrain, MarginSupportVectorScoresOne) {
  Rng rng(4);
  const auto b = blobs(rng, 40, 2.5);
  const auto m = svm_train(b.x, b.y, KernelSpec::linear(), 10);
  bool checked = false;
  for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
    const double a = std::abs(m.dual_coefs(static_cast<Eigen::Index>(s)));
    if (a >= m.C * (1 - 1e-9)) continue;
    const MatrixXd row = b.x.row(static_cast<Eigen::Index>(m.support_indices[s]));
    EXPECT_NEAR(std::abs(decision_scores(m, row)(0)), 1.0, 1e-3);
    checked = true;
  }
  EXPECT_TRUE(checked);
}

TEST(SvmTrain, LinearWeightsReproduceScores) {
  Rng rng(5);
  const auto b = blobs(rng, 70, 1.0, 4);
  const auto m = svm_train(b.x, b.y, KernelSpec::linear(), 1.0);
  const VectorXd w = linear_weights(m);
  const MatrixXd z = m.standardizer.apply(b.x);
  const VectorXd direct = (z * w).array() + m.bias;
  // Kernel-form scores computed independently from the support vectors.
  VectorXd kernel_form(b.x.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double s = m.bias;
    for (Eigen::Index t = 0; t < m.support_vectors.rows(); ++t) {
      s += m.dual_coefs(t) * z.row(i).dot(m.support_vectors.row(t));
    }
    kernel_form(i) = s;
  }
  EXPECT_LT((direct - kernel_form).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((decision_scores(m, b.x) - kernel_form).cwiseAbs().maxCoeff(), 1e-8);
  const auto rbf = svm_train(b.x, b.y, KernelSpec::rbf(0.1), 1.0);
  EXPECT_EQ(code_of([&] { linear_weights(rbf); }), ErrorCode::NotLinearKernel);
}

TEST(SvmTrain, RowPermutationInvariance) {
  Rng rng(6);
  const auto b = blobs(rng, 60, 1.0);
  SvmOptions tight;
  tight.tol = 1e-9;
  std::vector<std::size_t> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Blobs p;
  p.x.resize(60, 2);
  for (std::size_t i = 0; i < 60; ++i) {
    p.x.row(static_cast<Eigen::Index>(i)) = b.x.row(static_cast<Eigen::Index>(perm[i]));
    p.y.push_back(b.y[perm[i]]);
  }
  MatrixXd probe(121, 2);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) probe.row(i * 11 + j) << -3 + 0.6 * i, -3 + 0.6 * j;
  for (const auto& k : {KernelSpec::linear(), KernelSpec::rbf(0.3)}) {
    const auto a = svm_train(b.x, b.y, k, 1.0, tight);
    const auto c = svm_train(p.x, p.y, k, 1.0, tight);
    EXPECT_LT((decision_scores(a, probe) - decision_scores(c, probe)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(SvmTrain, IterationCapFlagsNonConvergence) {
  Rng rng(7);
  const auto b = blobs(rng, 100, 0.2);
  SvmOptions o;
  o.max_iterations = 3;
  const auto m = svm_train(b.x, b.y, KernelSpec::rbf(1.0), 10, o);
  EXPECT_FALSE(m.converged);
  EXPECT_EQ(m.iterations, 3u);
}

TEST(SvmTrain, CachedKernelRowsMatchPrecomputed) {
  Rng rng(8);
  const auto b = blobs(rng, 120, 0.7);
  SvmOptions small;
  small.kernel_cache_bytes = 16 * 120 * sizeof(double);
  const auto a = svm_train(b.x, b.y, KernelSpec::rbf(0.5), 1.0);
  const auto c = svm_train(b.x, b.y, KernelSpec::rbf(0.5), 1.0, small);
  EXPECT_EQ(a.iterations, c.iterations);
  EXPECT_LT((decision_scores(a, b.x) - decision_scores(c, b.x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernel, Names) {
  EXPECT_EQ(to_string(KernelSpec::linear()), "linear");
  EXPECT_EQ(kernel_kind_from_string("rbf"), KernelKind::rbf);
  EXPECT_THROW(kernel_kind_from_string("poly"), Error);
}
