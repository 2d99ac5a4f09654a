#pragma once

// Synthetic multiview cohort with known structure, shaped like the
// harmonized NHANES views.
//
// A latent z in R^3 drives both the demographics view and the laboratory
// view. The laboratory view contains b_i = rho_i z_i + sqrt(1 - rho_i^2) e_i
// (i = 1..3) plus pure-noise columns, all mixed by a random invertible
// matrix; the continuous demographics columns mix z with two noise signals.
// The population canonical correlations between the two views are therefore
// exactly rho. Diabetes status follows a risk score built from z, which
// also shifts body measures and questionnaire answers.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "nhanes/table.hpp"

namespace nhanes::synthetic {

struct SyntheticOptions {
  std::size_t n = 5000;
  std::uint64_t seed = 20240601;
  std::array<double, 3> rho{0.9, 0.6, 0.3};
  std::size_t lab_noise_columns = 17;
  double lab_coverage = 0.8;    ///< share of respondents with a laboratory row
  double fpg_coverage = 0.85;   ///< share of laboratory rows with a fasting glucose value
  double missing_rate = 0.01;   ///< per-cell missingness in body and questionnaire views
};

SyntheticOptions parse_synthetic_options(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SyntheticOptions& o);

struct SyntheticCohort {
  std::map<std::string, ColumnTable> views;
  std::array<double, 3> rho{};
};

SyntheticCohort make_synthetic(const SyntheticOptions& options);

}  // namespace nhanes::synthetic
