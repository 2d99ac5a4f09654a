#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nhanes/error.hpp"
#include "nhanes/serialize.hpp"

using namespace nhanes;
using namespace nhanes::serialize;
using nlohmann::json;

namespace {

json round(const nlohmann::ordered_json& j) { return json::parse(j.dump()); }

}  // namespace

TEST(Serialize, MatrixRoundTripIsExact) {
  Rng rng(1);
  const Eigen::MatrixXd m = testkit::random_matrix(rng, 4, 3) * 1e-7;
  EXPECT_EQ(matrix_from_json(round(matrix_json(m))), m);
  EXPECT_EQ(matrix_from_json(json::array()).size(), 0);
  EXPECT_THROW(matrix_from_json(json::parse("[[1, 2], [3]]")), Error);
  EXPECT_THROW(matrix_from_json(json::parse("{}")), Error);
}

TEST(Serialize, PcaRoundTrip) {
  Rng rng(2);
  const Eigen::MatrixXd X = testkit::random_matrix(rng, 30, 4);
  const auto m = pca::pca_fit(X, 2, {}, {"a", "b", "c", "d"});
  const auto back = pca_from_json(round(to_json(m)));
  EXPECT_EQ(back.directions, m.directions);
  EXPECT_EQ(back.explained_variance, m.explained_variance);
  EXPECT_EQ(back.names, m.names);
  EXPECT_EQ(pca::pca_transform(back, X), pca::pca_transform(m, X));
}

TEST(Serialize, CcaRoundTrip) {
  Rng rng(3);
  const Eigen::MatrixXd X = testkit::random_matrix(rng, 40, 3);
  const Eigen::MatrixXd Y = X.leftCols(2) + 0.5 * testkit::random_matrix(rng, 40, 2);
  const auto m = cca::cca_fit(X, Y, 2);
  const auto back = cca_from_json(round(to_json(m)));
  EXPECT_EQ(back.correlations, m.correlations);
  EXPECT_EQ(back.ridge, m.ridge);
  EXPECT_EQ(cca::cca_transform_x(back, X), cca::cca_transform_x(m, X));
  EXPECT_EQ(cca::cca_transform_y(back, Y), cca::cca_transform_y(m, Y));
}

TEST(Serialize, SvmRoundTripPredictsIdentically) {
  Rng rng(4);
  const Eigen::MatrixXd X = testkit::random_matrix(rng, 60, 2);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < X.rows(); ++i) y.push_back(X(i, 0) * X(i, 1) > 0 ? 1 : -1);
  const auto m = svm::svm_train(X, y, svm::KernelSpec::rbf(0.5), 5);
  const auto back = svm_from_json(round(to_json(m)));
  EXPECT_EQ(back.kernel, m.kernel);
  EXPECT_EQ(back.support_indices, m.support_indices);
  EXPECT_EQ(back.bias, m.bias);
  EXPECT_EQ(svm::decision_scores(back, X), svm::decision_scores(m, X));
  EXPECT_THROW(svm_from_json(json::parse(R"({"kernel": "linear"})")), Error);
}

TEST(Serialize, StandardizerRejectsRaggedFields) {
  Rng rng(5);
  const auto fit = linalg::standardize_fit(testkit::random_matrix(rng, 5, 2));
  const auto back = standardizer_from_json(round(to_json(fit.standardizer)));
  EXPECT_EQ(back.means, fit.standardizer.means);
  EXPECT_THROW(standardizer_from_json(json::parse(R"({"means": [1], "stds": [1, 2], "constant": [false]})")),
               Error);
}
