#include "nhanes/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Core>

#include "nhanes/error.hpp"
#include "nhanes/random.hpp"

namespace nhanes::synthetic {
namespace {

const char* const kLabNames[] = {
    "wbc",       "lymph_pct", "mono_pct",   "neut_pct",   "eos_pct", "baso_pct", "lymph_n",
    "mono_n",    "neut_n",    "eos_n",      "baso_n",     "rbc",     "hemoglobin", "hematocrit",
    "mcv",       "mch",       "mchc",       "rdw",        "platelets", "mpv"};

struct Scale {
  double mean, sd;
};

// Identity plus a small random perturbation, so columns are correlated but
// the covariance stays far from singular (condition number below ~5).
Eigen::MatrixXd mixing(Rng& rng, Eigen::Index d) {
  const double scale = 0.3 / std::sqrt(static_cast<double>(d));
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) += scale * rng.normal();
  return m;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

CellValue maybe_missing(Rng& rng, double rate, double value) {
  if (rng.uniform() < rate) return Missing{};
  return value;
}

void check(const SyntheticOptions& o) {
  if (o.n < 10) fail(ErrorCode::InvalidConfig, "synthetic cohort needs n >= 10");
  for (double r : o.rho) {
    if (!(r >= 0 && r < 1)) fail(ErrorCode::InvalidConfig, "rho values must lie in [0, 1)");
  }
  auto unit = [](double v) { return v >= 0 && v <= 1; };
  if (!unit(o.lab_coverage) || !unit(o.fpg_coverage) || !unit(o.missing_rate)) {
    fail(ErrorCode::InvalidConfig, "coverage and missing rates must lie in [0, 1]");
  }
}

}  // namespace

SyntheticOptions parse_synthetic_options(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "synthetic options must be an object");
  static const std::set<std::string> known = {"n", "seed", "rho", "lab_noise_columns",
                                              "lab_coverage", "fpg_coverage", "missing_rate"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::InvalidConfig, "unknown synthetic option '" + key + "'");
  }
  SyntheticOptions o;
  try {
    if (j.contains("n")) o.n = j["n"].get<std::size_t>();
    if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("rho")) {
      const auto v = j["rho"].get<std::vector<double>>();
      if (v.size() != 3) fail(ErrorCode::InvalidConfig, "rho must have three entries");
      std::copy(v.begin(), v.end(), o.rho.begin());
    }
    if (j.contains("lab_noise_columns")) o.lab_noise_columns = j["lab_noise_columns"].get<std::size_t>();
    if (j.contains("lab_coverage")) o.lab_coverage = j["lab_coverage"].get<double>();
    if (j.contains("fpg_coverage")) o.fpg_coverage = j["fpg_coverage"].get<double>();
    if (j.contains("missing_rate")) o.missing_rate = j["missing_rate"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("synthetic options: ") + e.what());
  }
  check(o);
  return o;
}

nlohmann::ordered_json to_json(const SyntheticOptions& o) {
  return {{"n", o.n},
          {"seed", o.seed},
          {"rho", o.rho},
          {"lab_noise_columns", o.lab_noise_columns},
          {"lab_coverage", o.lab_coverage},
          {"fpg_coverage", o.fpg_coverage},
          {"missing_rate", o.missing_rate}};
}

SyntheticCohort make_synthetic(const SyntheticOptions& o) {
  check(o);
  Rng rng(o.seed);
  const std::size_t n = o.n;
  const auto dl = static_cast<Eigen::Index>(3 + o.lab_noise_columns);

  const Eigen::MatrixXd demo_mix = mixing(rng, 5);
  const Eigen::MatrixXd lab_mix = mixing(rng, dl);
  const Eigen::VectorXd demo_norm = demo_mix.rowwise().norm();
  const Eigen::VectorXd lab_norm = lab_mix.rowwise().norm();

  const Scale demo_scale[] = {{47, 12}, {7.5, 3}, {3.2, 1.1}, {2.5, 1.4}, {3.1, 1.5}};
  const char* const demo_names[] = {"age", "household_income", "education", "income_poverty_ratio",
                                    "household_size"};

  std::vector<std::vector<CellValue>> demo(7), body(6), quest(3), smoke(2), outcome(2);
  std::vector<std::vector<CellValue>> lab(static_cast<std::size_t>(dl));
  std::vector<CellValue> seqn, lab_seqn;

  for (std::size_t r = 0; r < n; ++r) {
    const double key = static_cast<double>(r + 1);
    seqn.push_back(key);
    Eigen::Vector3d z;
    for (int i = 0; i < 3; ++i) z(i) = rng.normal();

    Eigen::VectorXd d(5);
    d << z(0), z(1), z(2), rng.normal(), rng.normal();
    const Eigen::VectorXd dm = demo_mix * d;
    for (int j = 0; j < 5; ++j) {
      demo[static_cast<std::size_t>(j)].push_back(demo_scale[j].mean +
                                                   demo_scale[j].sd * dm(j) / demo_norm(j));
    }
    demo[5].push_back(static_cast<double>(1 + rng.index(2)));
    demo[6].push_back(static_cast<double>(1 + rng.index(5)));

    Eigen::VectorXd b(dl);
    for (Eigen::Index i = 0; i < dl; ++i) {
      const double e = rng.normal();
      b(i) = i < 3 ? o.rho[static_cast<std::size_t>(i)] * z(i) +
                         std::sqrt(1 - o.rho[static_cast<std::size_t>(i)] * o.rho[static_cast<std::size_t>(i)]) * e
                   : e;
    }
    const Eigen::VectorXd lm = lab_mix * b;
    const bool has_lab = rng.uniform() < o.lab_coverage;
    if (has_lab) {
      lab_seqn.push_back(key);
      for (Eigen::Index i = 0; i < dl; ++i) {
        lab[static_cast<std::size_t>(i)].push_back(10.0 * static_cast<double>(i + 1) +
                                                   2.0 * lm(i) / lab_norm(i));
      }
    }

    // Risk: the first two latent factors plus idiosyncratic noise.
    const double s = (1.4 * z(0) + 0.8 * z(1)) / std::sqrt(1.4 * 1.4 + 0.8 * 0.8);
    const double risk = 1.4 * z(0) + 0.8 * z(1) + 0.6 * rng.normal();

    const double height = 168 + 9 * rng.normal();
    const double bmi = 28 + 5 * (0.55 * s + 0.835 * rng.normal());
    const double weight = bmi * (height / 100) * (height / 100);
    const double waist = 96 + 13 * (0.7 * s + 0.714 * rng.normal());
    const double sbp = 122 + 15 * (0.3 * s + 0.954 * rng.normal());
    const double dbp = 71 + 10 * (0.2 * s + 0.98 * rng.normal());
    const double body_vals[] = {height, weight, bmi, waist, sbp, dbp};
    for (int j = 0; j < 6; ++j) body[static_cast<std::size_t>(j)].push_back(maybe_missing(rng, o.missing_rate, body_vals[j]));

    const double family = rng.uniform() < logistic(-0.8 + 0.9 * s) ? 1 : 0;
    const double hyper = rng.uniform() < logistic(-1.0 + 0.7 * s) ? 1 : 0;
    const double drinks = std::max(0.0, std::round(2.0 + 1.1 * s + rng.normal()));
    quest[0].push_back(maybe_missing(rng, o.missing_rate, family));
    quest[1].push_back(maybe_missing(rng, o.missing_rate, hyper));
    quest[2].push_back(maybe_missing(rng, o.missing_rate, drinks));

    const bool smoker = rng.uniform() < 0.3;
    smoke[0].push_back(maybe_missing(rng, o.missing_rate, smoker ? 1 : 0));
    smoke[1].push_back(maybe_missing(
        rng, o.missing_rate, smoker ? std::max(1.0, std::round(12 + 6 * rng.normal())) : 0.0));

    const bool diabetic = risk > 2.1;
    const bool diagnosed = diabetic && rng.uniform() < 0.7;
    outcome[0].push_back(maybe_missing(rng, o.missing_rate, diagnosed ? 1 : 0));
    const double fpg = 92.4 + 16 * risk + 3 * rng.normal();
    if (has_lab && rng.uniform() < o.fpg_coverage) {
      outcome[1].push_back(std::round(fpg));
    } else {
      outcome[1].push_back(Missing{});
    }
  }

  auto build = [&](const std::vector<CellValue>& keys, std::vector<std::vector<CellValue>>& cols,
                   std::span<const char* const> names, std::span<const ColumnKind> kinds) {
    ColumnTable t;
    t.add_column("SEQN", keys);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      t.add_column(names[j], std::move(cols[j]), kinds.empty() ? ColumnKind::numeric : kinds[j]);
    }
    t.set_provenance(std::vector<std::string>(keys.size(), "synthetic"));
    return t;
  };

  using K = ColumnKind;
  SyntheticCohort out;
  out.rho = o.rho;
  const char* const demo_all[] = {demo_names[0], demo_names[1], demo_names[2], demo_names[3],
                                  demo_names[4], "gender",      "race_ethnicity"};
  const K demo_kinds[] = {K::numeric, K::numeric, K::numeric, K::numeric, K::numeric, K::categorical, K::categorical};
  out.views.emplace("demographics", build(seqn, demo, demo_all, demo_kinds));

  std::vector<std::string> lab_names;
  for (Eigen::Index i = 0; i < dl; ++i) {
    lab_names.push_back(i < 20 ? kLabNames[i] : "lab_" + std::to_string(i + 1));
  }
  std::vector<const char*> lab_cstr;
  for (const auto& s : lab_names) lab_cstr.push_back(s.c_str());
  out.views.emplace("laboratory", build(lab_seqn, lab, lab_cstr, {}));

  const char* const body_names[] = {"height", "weight", "bmi", "waist", "systolic_bp", "diastolic_bp"};
  out.views.emplace("body_measures", build(seqn, body, body_names, {}));
  const char* const quest_names[] = {"family_history", "hypertension", "drinks_per_day"};
  const K quest_kinds[] = {K::categorical, K::categorical, K::numeric};
  out.views.emplace("questionnaire", build(seqn, quest, quest_names, quest_kinds));
  const char* const smoke_names[] = {"smoker", "cigarettes_per_day"};
  const K smoke_kinds[] = {K::categorical, K::numeric};
  out.views.emplace("smoking", build(seqn, smoke, smoke_names, smoke_kinds));
  const char* const outcome_names[] = {"diabetes_diagnosed", "fpg"};
  const K outcome_kinds[] = {K::categorical, K::numeric};
  out.views.emplace("outcome", build(seqn, outcome, outcome_names, outcome_kinds));
  return out;
}

}  // namespace nhanes::synthetic
