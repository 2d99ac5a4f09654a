#pragma once

// JSON forms of fitted models. Matrices are stored row-major as nested arrays.

#include <json.hpp>

#include "nhanes/cca.hpp"
#include "nhanes/experiment.hpp"
#include "nhanes/pca.hpp"
#include "nhanes/svm.hpp"

namespace nhanes::serialize {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const linalg::Standardizer<double>& s);
linalg::Standardizer<double> standardizer_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const pca::PcaModel<double>& m);
pca::PcaModel<double> pca_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const cca::CcaModel<double>& m);
cca::CcaModel<double> cca_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const task::ViewEncoding& e);
nlohmann::ordered_json to_json(const task::FittedCca& f);

nlohmann::ordered_json to_json(const svm::SvmModel& m);
svm::SvmModel svm_from_json(const nlohmann::json& j);

}  // namespace nhanes::serialize
