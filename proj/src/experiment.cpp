#include "nhanes/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>

#include "nhanes/csv.hpp"
#include "nhanes/error.hpp"

namespace nhanes::task {
namespace {

using KeyIndex = std::unordered_map<std::int64_t, std::size_t>;

KeyIndex index_keys(const ColumnTable& t) {
  KeyIndex idx;
  const auto keys = t.keys();
  for (std::size_t r = 0; r < keys.size(); ++r) {
    if (!idx.emplace(keys[r], r).second) {
      fail(ErrorCode::DuplicateKey, "key " + std::to_string(keys[r]) + " repeats");
    }
  }
  return idx;
}

bool complete(const ColumnTable& t, std::size_t row, std::span<const std::string> cols) {
  for (const auto& c : cols) {
    if (!t.number(c, row)) return false;
  }
  return true;
}

std::string prefix_for(VariantKind kind) {
  return kind == VariantKind::CCA_DL || kind == VariantKind::CCA_DL_ALL ? "cca_dl_" : "cca_bl_";
}

bool is_dl(VariantKind kind) { return kind == VariantKind::CCA_DL || kind == VariantKind::CCA_DL_ALL; }
bool is_all(VariantKind kind) {
  return kind == VariantKind::CCA_DL_ALL || kind == VariantKind::CCA_BL_ALL;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Design assemble_reg(const ViewSet& views, const std::map<std::int64_t, DiabetesLabel>& labels) {
  const auto& feats = reg_features();
  std::map<std::string, KeyIndex> index;
  for (const auto& f : feats) {
    if (!index.count(f.view)) index.emplace(f.view, index_keys(views.get(f.view)));
    if (!views.get(f.view).has_column(f.name)) {
      fail(ErrorCode::UnknownColumn, "view '" + f.view + "' has no column '" + f.name + "'");
    }
  }
  Design d;
  d.names = reg_feature_names();
  std::vector<double> values;
  std::vector<double> row(feats.size());
  for (const auto& [key, label] : labels) {
    if (label == DiabetesLabel::Excluded) {
      ++d.excluded;
      continue;
    }
    bool ok = true;
    for (std::size_t j = 0; j < feats.size() && ok; ++j) {
      const auto& idx = index.at(feats[j].view);
      auto it = idx.find(key);
      if (it == idx.end()) {
        ok = false;
        break;
      }
      auto v = views.get(feats[j].view).number(feats[j].name, it->second);
      if (!v) ok = false;
      else row[j] = *v;
    }
    if (!ok) continue;
    values.insert(values.end(), row.begin(), row.end());
    d.y.push_back(label == DiabetesLabel::Case ? 1 : -1);
    d.keys.push_back(key);
  }
  d.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(d.keys.size()), static_cast<Eigen::Index>(feats.size()));
  return d;
}

Design assemble_cca(const ViewSet& views, const ModelVariant& v, const CcaSet& ccas,
                    const std::map<std::int64_t, DiabetesLabel>& labels) {
  const auto& slot = is_dl(v.kind) ? ccas.dl : ccas.bl;
  if (!slot) {
    fail(ErrorCode::UnfittedCca, variant_name(v) + " needs a fitted " +
                                     std::string(is_dl(v.kind) ? "demographics" : "body measures") +
                                     " x laboratory CCA");
  }
  const FittedCca& fit = *slot;
  const int k = static_cast<int>(fit.model.k());
  const int n = v.n == 0 ? k : v.n;
  if (n > k) {
    fail(ErrorCode::BadVariant, variant_name(v) + " asks for " + std::to_string(n) +
                                    " components but the CCA has " + std::to_string(k));
  }
  const ColumnTable& xt = views.get(fit.x_view);
  const ColumnTable& yt = views.get(fit.y_view);
  const KeyIndex xi = index_keys(xt);
  const KeyIndex yi = index_keys(yt);
  const bool all = is_all(v.kind);

  Design d;
  for (int c = 1; c <= n; ++c) d.names.push_back(prefix_for(v.kind) + std::to_string(c));
  std::vector<Eigen::RowVectorXd> rows;
  for (const auto& [key, label] : labels) {
    if (label == DiabetesLabel::Excluded) {
      ++d.excluded;
      continue;
    }
    auto xit = xi.find(key);
    if (xit == xi.end()) continue;
    auto enc = fit.x_encoding.encode(xt, xit->second);
    if (!enc) continue;
    if (!all) {
      auto yit = yi.find(key);
      if (yit == yi.end() || !fit.y_encoding.encode(yt, yit->second)) continue;
    }
    rows.push_back(project_x(fit, *enc, n));
    d.y.push_back(label == DiabetesLabel::Case ? 1 : -1);
    d.keys.push_back(key);
  }
  d.X.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) d.X.row(static_cast<Eigen::Index>(r)) = rows[r];
  return d;
}

template <typename T>
T get_as(const nlohmann::json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string(what) + ": " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::InvalidConfig, "unknown key '" + key + "' in " + where);
  }
}

cv::GridCell make_cell(const std::string& kernel, double C, std::optional<double> gamma) {
  if (!(C > 0)) fail(ErrorCode::InvalidConfig, "grid C values must be positive");
  cv::GridCell cell;
  cell.C = C;
  const auto kind = svm::kernel_kind_from_string(kernel);
  if (kind == svm::KernelKind::rbf) {
    if (!gamma || !(*gamma > 0)) fail(ErrorCode::InvalidConfig, "rbf grid cells need a positive gamma");
    cell.kernel = svm::KernelSpec::rbf(*gamma);
  }
  return cell;
}

}  // namespace

const std::vector<FeatureSource>& reg_features() {
  static const std::vector<FeatureSource> features = {
      {"family_history", "questionnaire"}, {"age", "demographics"},
      {"gender", "demographics"},          {"race_ethnicity", "demographics"},
      {"household_income", "demographics"}, {"education", "demographics"},
      {"height", "body_measures"},         {"weight", "body_measures"},
      {"bmi", "body_measures"},            {"waist", "body_measures"},
      {"hypertension", "questionnaire"},   {"drinks_per_day", "questionnaire"},
      {"smoker", "smoking"},               {"cigarettes_per_day", "smoking"},
  };
  return features;
}

std::vector<std::string> reg_feature_names() {
  std::vector<std::string> out;
  for (const auto& f : reg_features()) out.push_back(f.name);
  return out;
}

ViewSet::ViewSet(std::map<std::string, ColumnTable> views) {
  for (auto& [name, t] : views) add(name, std::move(t));
}

void ViewSet::add(std::string name, ColumnTable table) { views_.insert_or_assign(std::move(name), std::move(table)); }

bool ViewSet::has(std::string_view name) const { return views_.find(name) != views_.end(); }

const ColumnTable& ViewSet::get(std::string_view name) const {
  auto it = views_.find(name);
  if (it == views_.end()) fail(ErrorCode::MissingView, "view '" + std::string(name) + "' is not loaded");
  return it->second;
}

std::vector<std::string> ViewSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : views_) out.push_back(name);
  return out;
}

ViewSet load_views(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    fail(ErrorCode::IoError, "view directory '" + dir.string() + "' does not exist");
  }
  ViewSet views;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() == ".csv" && std::filesystem::exists(p.string() + ".json")) files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) views.add(p.stem().string(), read_view(p));
  return views;
}

ViewEncoding ViewEncoding::fit(const ColumnTable& table, std::span<const std::string> sources) {
  ViewEncoding enc;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (complete(table, r, sources)) rows.push_back(r);
  }
  for (const auto& s : sources) {
    const Column& col = table.column(s);
    if (col.kind == ColumnKind::text) {
      fail(ErrorCode::InvalidArgument, "text column '" + s + "' cannot enter a numeric view");
    }
    if (col.kind == ColumnKind::numeric) {
      enc.columns.push_back({s, std::nullopt, s});
      continue;
    }
    std::set<double> seen;
    for (std::size_t r : rows) seen.insert(*table.number(s, r));
    std::vector<double> levels(seen.begin(), seen.end());
    for (std::size_t l = 1; l < levels.size(); ++l) {
      enc.columns.push_back({s, levels[l], s + "=" + format_number(levels[l])});
    }
    enc.levels.emplace(s, std::move(levels));
  }
  return enc;
}

std::optional<Eigen::RowVectorXd> ViewEncoding::encode(const ColumnTable& table, std::size_t row) const {
  for (const auto& [source, levels] : this->levels) {
    auto v = table.number(source, row);
    if (!v || !std::binary_search(levels.begin(), levels.end(), *v)) return std::nullopt;
  }
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    auto v = table.number(columns[j].source, row);
    if (!v) return std::nullopt;
    out(static_cast<Eigen::Index>(j)) = columns[j].level ? (*v == *columns[j].level ? 1.0 : 0.0) : *v;
  }
  return out;
}

std::vector<std::string> ViewEncoding::names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

std::vector<std::string> ViewEncoding::sources() const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (std::find(out.begin(), out.end(), c.source) == out.end()) out.push_back(c.source);
  }
  for (const auto& [s, _] : levels) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

std::vector<std::string> view_columns(const ColumnTable& table, std::string_view view,
                                      const std::map<std::string, std::vector<std::string>>& overrides) {
  auto it = overrides.find(std::string(view));
  if (it != overrides.end()) {
    for (const auto& c : it->second) {
      if (!table.has_column(c)) {
        fail(ErrorCode::UnknownColumn, "view '" + std::string(view) + "' has no column '" + c + "'");
      }
    }
    return it->second;
  }
  std::vector<std::string> out;
  for (const auto& c : table.columns()) {
    if (c.name != table.key_name()) out.push_back(c.name);
  }
  return out;
}

FittedCca fit_view_cca(const ViewSet& views, std::string_view x_view, std::string_view y_view,
                       int k, double ridge,
                       const std::map<std::string, std::vector<std::string>>& columns) {
  const ColumnTable& xt = views.get(x_view);
  const ColumnTable& yt = views.get(y_view);
  const auto xcols = view_columns(xt, x_view, columns);
  const auto ycols = view_columns(yt, y_view, columns);
  const KeyIndex yi = index_keys(yt);
  (void)index_keys(xt);

  std::vector<std::size_t> xr, yr;
  const auto xkeys = xt.keys();
  std::vector<std::size_t> order(xkeys.size());
  for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xkeys[a] < xkeys[b]; });
  for (std::size_t r : order) {
    auto it = yi.find(xkeys[r]);
    if (it == yi.end()) continue;
    if (complete(xt, r, xcols) && complete(yt, it->second, ycols)) {
      xr.push_back(r);
      yr.push_back(it->second);
    }
  }
  const ColumnTable xp = xt.take_rows(xr);
  const ColumnTable yp = yt.take_rows(yr);

  FittedCca fit;
  fit.x_view = std::string(x_view);
  fit.y_view = std::string(y_view);
  fit.x_encoding = ViewEncoding::fit(xp, xcols);
  fit.y_encoding = ViewEncoding::fit(yp, ycols);
  fit.paired_rows = xr.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(xr.size()), static_cast<Eigen::Index>(fit.x_encoding.columns.size()));
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(yr.size()), static_cast<Eigen::Index>(fit.y_encoding.columns.size()));
  for (std::size_t r = 0; r < xr.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = *fit.x_encoding.encode(xp, r);
    Y.row(static_cast<Eigen::Index>(r)) = *fit.y_encoding.encode(yp, r);
  }
  if (X.cols() == 0 || Y.cols() == 0) {
    fail(ErrorCode::DimensionMismatch, "a CCA view has no usable columns");
  }
  const Eigen::Index kk = k == 0 ? std::min(X.cols(), Y.cols()) : k;
  fit.model = cca::cca_fit(X, Y, kk, ridge, fit.x_encoding.names(), fit.y_encoding.names());
  return fit;
}

Eigen::RowVectorXd project_x(const FittedCca& fit, const Eigen::RowVectorXd& encoded, int n) {
  const auto& s = fit.model.std_x;
  const auto& U = fit.model.U;
  if (encoded.size() != U.rows()) fail(ErrorCode::DimensionMismatch, "encoded row width differs from the CCA");
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(n);
  for (Eigen::Index j = 0; j < U.rows(); ++j) {
    const double z = (encoded(j) - s.means(j)) / s.stds(j);
    for (int c = 0; c < n; ++c) out(c) += z * U(j, c);
  }
  return out;
}

std::map<std::int64_t, DiabetesLabel> label_respondents(const ViewSet& views, Scheme scheme) {
  const ColumnTable& t = views.get(kOutcome);
  for (auto col : {kDiagnosedColumn, kFpgColumn}) {
    if (!t.has_column(col)) {
      fail(ErrorCode::UnknownColumn, "outcome view has no column '" + std::string(col) + "'");
    }
  }
  const auto keys = t.keys();
  std::map<std::int64_t, DiabetesLabel> out;
  for (std::size_t r = 0; r < keys.size(); ++r) {
    std::optional<bool> diagnosed;
    if (auto v = t.number(kDiagnosedColumn, r)) {
      if (*v == 1) diagnosed = true;
      else if (*v == 0) diagnosed = false;
    }
    if (!out.emplace(keys[r], assign_diabetes_label(diagnosed, t.number(kFpgColumn, r), scheme)).second) {
      fail(ErrorCode::DuplicateKey, "outcome key " + std::to_string(keys[r]) + " repeats");
    }
  }
  return out;
}

std::vector<std::string> rank_cca_features(const Design& base, const RankingOptions& options) {
  std::vector<cv::GridCell> linear;
  for (const auto& c : options.grid.empty() ? cv::default_grid() : options.grid) {
    if (c.kernel.kind == svm::KernelKind::linear) linear.push_back(c);
  }
  if (linear.empty()) linear.push_back({svm::KernelSpec::linear(), 1.0});
  cv::GridSearchOptions go;
  go.folds = options.folds;
  go.threads = options.threads;
  go.svm = options.svm;
  const auto gs = cv::grid_search(base.X, base.y, linear, options.seed, go);
  const auto model = svm::svm_train(base.X, base.y, gs.best.kernel, gs.best.C, options.svm);
  return metrics::rank_features_by_weight(model, base.names);
}

Design assemble_features(const ViewSet& views, const ModelVariant& variant, const CcaSet& ccas,
                         Scheme scheme, const RankingOptions& ranking) {
  const auto labels = label_respondents(views, scheme);
  if (variant.kind == VariantKind::REG) return assemble_reg(views, labels);
  if (variant.is_cca()) return assemble_cca(views, variant, ccas, labels);

  const ModelVariant base_variant = variant.cca_part();
  const Design base = assemble_cca(views, base_variant, ccas, labels);
  if (variant.m > static_cast<int>(base.names.size())) {
    fail(ErrorCode::BadVariant, variant_name(variant) + " stacks " + std::to_string(variant.m) +
                                    " features but the base has " + std::to_string(base.names.size()));
  }
  svm::check_binary_labels(base.y);
  const auto ranked = rank_cca_features(base, ranking);
  std::vector<Eigen::Index> pick;
  for (int i = 0; i < variant.m; ++i) {
    const auto pos = std::find(base.names.begin(), base.names.end(), ranked[static_cast<std::size_t>(i)]);
    pick.push_back(static_cast<Eigen::Index>(pos - base.names.begin()));
  }
  const Design reg = assemble_reg(views, labels);

  Design d;
  d.names = reg.names;
  for (int i = 0; i < variant.m; ++i) d.names.push_back(ranked[static_cast<std::size_t>(i)]);
  d.ranking = ranked;
  d.excluded = reg.excluded;
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  for (std::size_t a = 0, b = 0; a < reg.keys.size() && b < base.keys.size();) {
    if (reg.keys[a] < base.keys[b]) {
      ++a;
    } else if (base.keys[b] < reg.keys[a]) {
      ++b;
    } else {
      matches.emplace_back(a++, b++);
    }
  }
  const auto width = static_cast<Eigen::Index>(d.names.size());
  d.X.resize(static_cast<Eigen::Index>(matches.size()), width);
  for (std::size_t r = 0; r < matches.size(); ++r) {
    const auto [a, b] = matches[r];
    const auto row = static_cast<Eigen::Index>(r);
    d.X.row(row).head(reg.X.cols()) = reg.X.row(static_cast<Eigen::Index>(a));
    for (std::size_t i = 0; i < pick.size(); ++i) {
      d.X(row, reg.X.cols() + static_cast<Eigen::Index>(i)) = base.X(static_cast<Eigen::Index>(b), pick[i]);
    }
    d.y.push_back(reg.y[a]);
    d.keys.push_back(reg.keys[a]);
  }
  return d;
}

std::vector<cv::GridCell> parse_grid(const nlohmann::json& j) {
  std::vector<cv::GridCell> grid;
  if (j.is_array()) {
    for (const auto& c : j) {
      reject_unknown(c, {"kernel", "C", "gamma"}, "grid cell");
      if (!c.contains("kernel") || !c.contains("C")) {
        fail(ErrorCode::InvalidConfig, "grid cells need 'kernel' and 'C'");
      }
      std::optional<double> gamma;
      if (c.contains("gamma")) gamma = get_as<double>(c["gamma"], "gamma");
      grid.push_back(make_cell(get_as<std::string>(c["kernel"], "kernel"), get_as<double>(c["C"], "C"), gamma));
    }
  } else if (j.is_object()) {
    reject_unknown(j, {"kernels", "C", "gamma"}, "grid");
    const auto kernels = j.contains("kernels") ? get_as<std::vector<std::string>>(j["kernels"], "kernels")
                                               : std::vector<std::string>{"linear", "rbf"};
    const auto cs = get_as<std::vector<double>>(j.value("C", nlohmann::json::array()), "C");
    const auto gammas = get_as<std::vector<double>>(j.value("gamma", nlohmann::json::array()), "gamma");
    for (const auto& k : kernels) {
      for (double c : cs) {
        if (svm::kernel_kind_from_string(k) == svm::KernelKind::linear) {
          grid.push_back(make_cell(k, c, std::nullopt));
        } else {
          for (double g : gammas) grid.push_back(make_cell(k, c, g));
        }
      }
    }
  } else {
    fail(ErrorCode::InvalidConfig, "grid must be an array of cells or an object of value lists");
  }
  if (grid.empty()) fail(ErrorCode::EmptyGrid, "configured grid has no cells");
  return grid;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, {"scheme", "variants", "seed", "grid", "split_fraction", "ridge", "folds", "threads",
                     "svm_tol", "paths", "synthetic", "cca_columns"},
                 "experiment config");
  ExperimentConfig c;
  if (j.contains("scheme")) c.scheme = scheme_from_string(get_as<std::string>(j["scheme"], "scheme"));
  if (j.contains("variants")) {
    c.variants = get_as<std::vector<std::string>>(j["variants"], "variants");
    for (const auto& v : c.variants) (void)parse_variant(v);
    if (c.variants.empty()) fail(ErrorCode::InvalidConfig, "no variants configured");
  }
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("grid")) c.grid = parse_grid(j["grid"]);
  if (j.contains("split_fraction")) c.split_fraction = get_as<double>(j["split_fraction"], "split_fraction");
  if (!(c.split_fraction > 0 && c.split_fraction < 1)) {
    fail(ErrorCode::InvalidConfig, "split_fraction must lie in (0, 1)");
  }
  if (j.contains("ridge")) c.ridge = get_as<double>(j["ridge"], "ridge");
  if (!(c.ridge >= 0)) fail(ErrorCode::InvalidConfig, "ridge must be nonnegative");
  if (j.contains("folds")) c.folds = get_as<std::size_t>(j["folds"], "folds");
  if (c.folds < 2) fail(ErrorCode::InvalidConfig, "folds must be at least 2");
  if (j.contains("threads")) c.threads = get_as<std::size_t>(j["threads"], "threads");
  if (j.contains("svm_tol")) c.svm_tol = get_as<double>(j["svm_tol"], "svm_tol");
  if (!(c.svm_tol > 0)) fail(ErrorCode::InvalidConfig, "svm_tol must be positive");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  if (j.contains("paths")) {
    reject_unknown(j["paths"], {"views", "out"}, "paths");
    if (j["paths"].contains("views")) c.views_dir = resolve(get_as<std::string>(j["paths"]["views"], "paths.views"));
    if (j["paths"].contains("out")) c.out_dir = resolve(get_as<std::string>(j["paths"]["out"], "paths.out"));
  }
  if (j.contains("synthetic")) c.synthetic = synthetic::parse_synthetic_options(j["synthetic"]);
  if (c.synthetic && c.views_dir) {
    fail(ErrorCode::InvalidConfig, "give either paths.views or synthetic, not both");
  }
  if (j.contains("cca_columns")) {
    c.cca_columns = get_as<std::map<std::string, std::vector<std::string>>>(j["cca_columns"], "cca_columns");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["scheme"] = std::string(to_string(c.scheme));
  j["variants"] = c.variants;
  j["seed"] = c.seed;
  auto grid = nlohmann::ordered_json::array();
  for (const auto& cell : c.grid) {
    nlohmann::ordered_json g{{"kernel", svm::to_string(cell.kernel.kind)}, {"C", cell.C}};
    if (cell.kernel.kind == svm::KernelKind::rbf) g["gamma"] = cell.kernel.gamma;
    grid.push_back(g);
  }
  j["grid"] = grid;
  j["split_fraction"] = c.split_fraction;
  j["ridge"] = c.ridge;
  j["folds"] = c.folds;
  j["svm_tol"] = c.svm_tol;
  if (c.synthetic) j["synthetic"] = synthetic::to_json(*c.synthetic);
  if (!c.cca_columns.empty()) j["cca_columns"] = c.cca_columns;
  return j;
}

std::vector<report::ClassificationReport> ExperimentResult::reports() const {
  std::vector<report::ClassificationReport> out;
  for (const auto& v : variants) {
    if (v.report) out.push_back(*v.report);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ViewSet& views,
                                 const ProgressFn& progress) {
  auto note = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  std::vector<ModelVariant> variants;
  for (const auto& name : config.variants) variants.push_back(parse_variant(name));

  // One CCA per view pair, sized for the largest request.
  int dl_k = 0, bl_k = -1;
  for (const auto& v : variants) {
    if (v.kind == VariantKind::REG) continue;
    const auto p = v.cca_part();
    if (is_dl(p.kind)) {
      dl_k = std::max(dl_k, p.n);
    } else {
      bl_k = (p.n == 0 || bl_k == 0) ? 0 : std::max(bl_k, p.n);
    }
  }
  ExperimentResult result;
  std::optional<std::string> dl_error, bl_error;
  if (dl_k > 0) {
    note("fitting demographics x laboratory CCA (k = " + std::to_string(dl_k) + ")");
    try {
      result.ccas.dl = fit_view_cca(views, kDemographics, kLaboratory, dl_k, config.ridge, config.cca_columns);
    } catch (const Error& e) {
      dl_error = e.what();
    }
  }
  if (bl_k >= 0) {
    note("fitting body measures x laboratory CCA");
    try {
      result.ccas.bl = fit_view_cca(views, kBodyMeasures, kLaboratory, bl_k, config.ridge, config.cca_columns);
    } catch (const Error& e) {
      bl_error = e.what();
    }
  }

  RankingOptions ranking;
  ranking.grid = config.grid;
  ranking.seed = derive_seed(config.seed, 3);
  ranking.folds = config.folds;
  ranking.threads = config.threads;
  ranking.svm.tol = config.svm_tol;

  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto& v = variants[i];
    VariantResult vr;
    vr.name = variant_name(v);
    note("variant " + vr.name);
    try {
      if (v.kind != VariantKind::REG) {
        const auto p = v.cca_part();
        const auto& err = is_dl(p.kind) ? dl_error : bl_error;
        if (err) fail(ErrorCode::UnfittedCca, "CCA fit failed: " + *err);
      }
      const Design d = assemble_features(views, v, result.ccas, config.scheme, ranking);
      const cv::Split split = cv::train_test_split(d.y, config.split_fraction, derive_seed(config.seed, 1));
      auto take = [&](const std::vector<std::size_t>& idx, Eigen::MatrixXd& X, std::vector<int>& y) {
        X.resize(static_cast<Eigen::Index>(idx.size()), d.X.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) {
          X.row(static_cast<Eigen::Index>(r)) = d.X.row(static_cast<Eigen::Index>(idx[r]));
          y.push_back(d.y[idx[r]]);
        }
      };
      Eigen::MatrixXd Xtr, Xte;
      std::vector<int> ytr, yte;
      take(split.train, Xtr, ytr);
      take(split.test, Xte, yte);

      cv::GridSearchOptions go;
      go.folds = config.folds;
      go.threads = config.threads;
      go.svm.tol = config.svm_tol;
      vr.grid = cv::grid_search(Xtr, ytr, config.grid, derive_seed(config.seed, 2), go);
      const auto& best = vr.grid->best;
      const auto model = svm::svm_train(Xtr, ytr, best.kernel, best.C, go.svm);
      const Eigen::VectorXd scores = svm::decision_scores(model, Xte);
      vr.roc = metrics::roc_curve(yte, std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
      const auto cm = metrics::confusion_metrics(yte, svm::predict(model, Xte));
      auto r = report::make_report(vr.name, std::string(to_string(config.scheme)), d.keys.size(),
                                   split.train.size(), cm, vr.roc.auc);
      r.kernel = svm::to_string(best.kernel.kind);
      r.C = best.C;
      if (best.kernel.kind == svm::KernelKind::rbf) r.gamma = best.kernel.gamma;
      r.cv_auc = vr.grid->cells[vr.grid->best_index].mean_auc;
      r.converged = model.converged && vr.grid->cells[vr.grid->best_index].converged;
      r.features = d.names;
      r.ranking = d.ranking;
      vr.report = std::move(r);
    } catch (const Error& e) {
      vr.error = e.what();
      note("variant " + vr.name + " failed: " + *vr.error);
    }
    result.variants.push_back(std::move(vr));
  }
  return result;
}

}  // namespace nhanes::task
