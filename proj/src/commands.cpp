#include "nhanes/commands.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "nhanes/csv.hpp"
#include "nhanes/error.hpp"
#include "nhanes/harmonize.hpp"
#include "nhanes/pca.hpp"
#include "nhanes/report.hpp"
#include "nhanes/serialize.hpp"
#include "nhanes/xport.hpp"

namespace nhanes::commands {
namespace {

void ensure_dir(const Path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_json(const Path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::vector<ingest::CycleId> resolve_cycles(const std::vector<std::string>& labels) {
  if (labels.empty()) {
    const auto& all = ingest::CycleId::all();
    return {all.begin(), all.end()};
  }
  std::vector<ingest::CycleId> out;
  for (const auto& l : labels) out.push_back(ingest::CycleId::from_label(l));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string loadings_csv_header() { return csv_row({"component", "rank", "variable", "weight"}); }

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j, const Path& base_dir) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "run config must be a JSON object");
  static const std::set<std::string> known = {"cache_dir", "rules", "manifest", "out",
                                              "cycles", "seed", "experiment"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::InvalidConfig, "unknown key '" + key + "' in run config");
  }
  auto path = [&](const char* key) -> std::optional<Path> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_string()) fail(ErrorCode::InvalidConfig, std::string(key) + " must be a string");
    Path p = j[key].get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  RunConfig c;
  c.cache_dir = path("cache_dir");
  c.rules = path("rules");
  c.manifest = path("manifest");
  c.out = path("out");
  try {
    if (j.contains("cycles")) c.cycles = j["cycles"].get<std::vector<std::string>>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("run config: ") + e.what());
  }
  for (const auto& label : c.cycles) (void)ingest::CycleId::from_label(label);
  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    if (e.is_string()) {
      Path p = e.get<std::string>();
      c.experiment = task::load_experiment_config(p.is_relative() && !base_dir.empty() ? base_dir / p : p);
    } else {
      c.experiment = task::parse_experiment_config(e, base_dir);
    }
  }
  return c;
}

RunConfig load_run_config(const Path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

std::string slug(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += c;
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "variant" : out;
}

Json cmd_download(const DownloadOptions& options, ingest::Transport& transport, const Path& out) {
  const auto cycles = resolve_cycles(options.cycles);
  auto manifest = ingest::load_component_manifest(options.manifest);
  if (!options.components.empty()) {
    std::vector<ingest::ComponentSpec> keep;
    for (const auto& name : options.components) {
      auto it = std::find_if(manifest.begin(), manifest.end(),
                             [&](const ingest::ComponentSpec& s) { return s.name == name; });
      if (it == manifest.end()) fail(ErrorCode::InvalidArgument, "component '" + name + "' is not in the manifest");
      keep.push_back(*it);
    }
    manifest = std::move(keep);
  }
  ensure_dir(out);
  Json present = Json::array(), absent = Json::array();
  for (auto category : {ingest::Category::demographics, ingest::Category::examination,
                        ingest::Category::laboratory, ingest::Category::questionnaire}) {
    const auto fetched = ingest::fetch_category(category, cycles, manifest, options.cache_root, transport,
                                                options.fetch, options.base_url);
    for (const auto& f : fetched.present) {
      present.push_back({{"component", f.component},
                         {"cycle", f.ref.cycle.label()},
                         {"url", ingest::build_component_url(f.ref, options.base_url)},
                         {"path", f.path.string()}});
    }
    for (const auto& a : fetched.absent) {
      absent.push_back({{"component", a.component}, {"cycle", a.ref.cycle.label()}, {"url", a.url}, {"reason", a.reason}});
    }
  }
  Json report{{"cache_root", options.cache_root.string()}, {"present", present}, {"absent", absent}};
  write_json(out / "download_report.json", report);
  return report;
}

Json cmd_clean(const CleanOptions& options, const Path& out) {
  const auto cycles = resolve_cycles(options.cycles);
  const auto manifest = ingest::load_component_manifest(options.manifest);
  auto views = harmonize::load_rule_file(options.rules);
  if (!options.views.empty()) {
    std::vector<harmonize::ViewSpec> keep;
    for (const auto& v : views) {
      if (std::find(options.views.begin(), options.views.end(), v.name) != options.views.end()) keep.push_back(v);
    }
    if (keep.size() != options.views.size()) fail(ErrorCode::InvalidArgument, "unknown view requested");
    views = std::move(keep);
  }
  ensure_dir(out);
  Json summary = Json::array();
  std::map<std::string, ColumnTable> component_cache;
  for (const auto& view : views) {
    std::map<std::string, ColumnTable> raw_by_cycle;
    Json missing_files = Json::array();
    for (const auto& cycle : cycles) {
      std::vector<ColumnTable> parts;
      for (const auto& cname : view.components) {
        auto it = std::find_if(manifest.begin(), manifest.end(),
                               [&](const ingest::ComponentSpec& s) { return s.name == cname; });
        if (it == manifest.end()) {
          fail(ErrorCode::InvalidConfig, "view '" + view.name + "' uses unknown component '" + cname + "'");
        }
        if (!it->available_in(cycle)) continue;
        const std::string url = ingest::build_component_url(it->ref(cycle));
        auto cached = ingest::cached_file(url, options.cache_root);
        if (!cached) {
          missing_files.push_back(url);
          continue;
        }
        auto hit = component_cache.find(url);
        if (hit == component_cache.end()) hit = component_cache.emplace(url, xport::read_xport_file(*cached)).first;
        parts.push_back(hit->second);
      }
      if (!parts.empty()) raw_by_cycle.emplace(cycle.label(), harmonize::merge_components(parts));
    }
    harmonize::RuleOptions ro;
    ro.strict = options.strict;
    auto result = harmonize::apply_rules(raw_by_cycle, view.rules, ro);
    const Path file = out / (view.name + ".csv");
    write_view(result.table, file);
    summary.push_back({{"view", view.name},
                       {"path", file.string()},
                       {"rows", result.table.rows()},
                       {"columns", result.table.cols()},
                       {"cycles", raw_by_cycle.size()},
                       {"uncached_files", missing_files},
                       {"warnings", result.warnings}});
  }
  Json report{{"views", summary}};
  write_json(out / "clean_report.json", report);
  return report;
}

Json cmd_eda(const EdaOptions& options, const Path& out) {
  const ColumnTable table = read_view(options.view);
  ensure_dir(out);
  const auto stats = harmonize::summarize(table, options.adult_only, options.age_column);
  write_file_atomic(out / "summary.csv", harmonize::summary_csv(stats));
  write_json(out / "summary.json", harmonize::summary_json(stats));

  ColumnTable subject = table;
  if (options.adult_only) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      auto age = table.number(options.age_column, r);
      if (age && *age > 20) rows.push_back(r);
    }
    subject = table.take_rows(rows);
  }
  std::optional<std::string> group = options.group_by;
  const auto h = harmonize::histogram(subject, options.column, options.bin_width, group);
  write_file_atomic(out / "histogram.csv", harmonize::histogram_csv(h));
  write_json(out / "histogram.json", harmonize::histogram_json(h));
  std::string title = options.column + " distribution";
  if (group) title += " by " + *group;
  write_file_atomic(out / "histogram.svg", report::histogram_svg(h, title));
  return {{"rows_used", stats.rows_used},
          {"summary", (out / "summary.csv").string()},
          {"histogram", (out / "histogram.svg").string()},
          {"bins", h.counts.size()}};
}

Json cmd_pca(const PcaOptions& options, const Path& out) {
  const ColumnTable table = read_view(options.view);
  std::map<std::string, std::vector<std::string>> overrides;
  if (!options.columns.empty()) overrides["view"] = options.columns;
  const auto cols = task::view_columns(table, "view", overrides);
  const auto cc = harmonize::complete_cases(table, cols);
  const auto enc = task::ViewEncoding::fit(cc.table, cols);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(cc.table.rows()), static_cast<Eigen::Index>(enc.columns.size()));
  for (std::size_t r = 0; r < cc.table.rows(); ++r) X.row(static_cast<Eigen::Index>(r)) = *enc.encode(cc.table, r);
  pca::PcaOptions po;
  po.standardize = options.standardize;
  const auto model = pca::pca_fit(X, options.k, po, enc.names());

  ensure_dir(out);
  Json mj = serialize::to_json(model);
  mj["rows"] = cc.retained;
  write_json(out / "pca_model.json", mj);
  std::string csv = loadings_csv_header();
  const auto loadings = pca::pca_loadings(model);
  for (std::size_t c = 0; c < loadings.size(); ++c) {
    for (std::size_t r = 0; r < loadings[c].size(); ++r) {
      csv += csv_row({std::to_string(c + 1), std::to_string(r + 1), loadings[c][r].variable,
                      format_number(loadings[c][r].weight)});
    }
  }
  write_file_atomic(out / "pca_loadings.csv", csv);
  std::vector<double> ev(model.explained_variance.data(), model.explained_variance.data() + model.k());
  return {{"rows", cc.retained}, {"dropped", cc.dropped}, {"explained_variance", ev},
          {"total_variance", model.total_variance}};
}

Json cmd_cca(const CcaOptions& options, const Path& out) {
  task::ViewSet views;
  views.add("x", read_view(options.x_view));
  views.add("y", read_view(options.y_view));
  std::map<std::string, std::vector<std::string>> overrides;
  if (!options.x_columns.empty()) overrides["x"] = options.x_columns;
  if (!options.y_columns.empty()) overrides["y"] = options.y_columns;
  auto fit = task::fit_view_cca(views, "x", "y", options.k, options.ridge, overrides);
  fit.x_view = options.x_view.stem().string();
  fit.y_view = options.y_view.stem().string();

  ensure_dir(out);
  write_json(out / "cca_model.json", serialize::to_json(fit));
  std::string csv = csv_row({"component", "correlation", "side", "rank", "variable", "weight"});
  const auto loadings = cca::cca_loadings(fit.model);
  for (std::size_t c = 0; c < loadings.size(); ++c) {
    const std::string corr = format_number(fit.model.correlations(static_cast<Eigen::Index>(c)));
    for (std::size_t r = 0; r < loadings[c].x.size(); ++r) {
      csv += csv_row({std::to_string(c + 1), corr, "x", std::to_string(r + 1), loadings[c].x[r].variable,
                      format_number(loadings[c].x[r].weight)});
    }
    for (std::size_t r = 0; r < loadings[c].y.size(); ++r) {
      csv += csv_row({std::to_string(c + 1), corr, "y", std::to_string(r + 1), loadings[c].y[r].variable,
                      format_number(loadings[c].y[r].weight)});
    }
  }
  write_file_atomic(out / "cca_loadings.csv", csv);
  std::vector<double> corr(fit.model.correlations.data(), fit.model.correlations.data() + fit.model.k());
  return {{"paired_rows", fit.paired_rows}, {"correlations", corr}};
}

Json cmd_experiment(const task::ExperimentConfig& config, const Path& out, const task::ProgressFn& progress) {
  task::ViewSet views;
  if (config.synthetic) {
    views = task::ViewSet(synthetic::make_synthetic(*config.synthetic).views);
  } else if (config.views_dir) {
    views = task::load_views(*config.views_dir);
  } else {
    fail(ErrorCode::InvalidConfig, "experiment config needs paths.views or synthetic");
  }
  const auto result = task::run_experiment(config, views, progress);
  ensure_dir(out);
  const auto reports = result.reports();
  write_file_atomic(out / "reports.csv", report::reports_csv(reports));
  write_json(out / "reports.json", report::reports_json(reports));

  Json variants = Json::array();
  for (const auto& v : result.variants) {
    Json entry{{"variant", v.name}};
    if (v.report) {
      const std::string base = "roc_" + slug(v.name);
      write_file_atomic(out / (base + ".csv"), report::roc_csv(v.roc));
      write_file_atomic(out / (base + ".svg"), report::roc_svg(v.roc, v.name));
      entry["status"] = "ok";
      entry["roc"] = base + ".svg";
      Json cells = Json::array();
      for (const auto& c : v.grid->cells) {
        Json cell{{"cell", cv::to_string(c.cell)}};
        if (c.failed()) {
          cell["error"] = *c.error;
        } else {
          cell["mean_auc"] = c.mean_auc;
          cell["std_auc"] = c.std_auc;
        }
        cells.push_back(cell);
      }
      entry["grid"] = cells;
    } else {
      entry["status"] = "failed";
      entry["error"] = v.error.value_or("");
    }
    variants.push_back(entry);
  }
  Json run{{"config", task::to_json(config)}, {"variants", variants}};
  if (result.ccas.dl) {
    write_json(out / "cca_dl.json", serialize::to_json(*result.ccas.dl));
    run["cca_dl_correlations"] = std::vector<double>(
        result.ccas.dl->model.correlations.data(),
        result.ccas.dl->model.correlations.data() + result.ccas.dl->model.k());
  }
  if (result.ccas.bl) write_json(out / "cca_bl.json", serialize::to_json(*result.ccas.bl));
  write_json(out / "run.json", run);
  return {{"reports", reports.size()}, {"failed", result.variants.size() - reports.size()},
          {"out", out.string()}};
}

Json cmd_synth(const synthetic::SyntheticOptions& options, const Path& out) {
  const auto cohort = synthetic::make_synthetic(options);
  ensure_dir(out);
  Json views = Json::object();
  for (const auto& [name, table] : cohort.views) {
    write_view(table, out / (name + ".csv"));
    views[name] = table.rows();
  }
  return {{"views", views}, {"rho", cohort.rho}};
}

Json cmd_dump(const Path& xpt, const Path& csv, bool keep_missing_codes) {
  const ColumnTable table = xport::read_xport_file(xpt);
  std::ostringstream s;
  CsvOptions o;
  o.missing_codes = keep_missing_codes ? MissingCodeColumns::all_numeric : MissingCodeColumns::none;
  write_csv(table, s, o);
  write_file_atomic(csv, s.str());
  return {{"rows", table.rows()}, {"columns", table.cols()}, {"csv", csv.string()}};
}

}  // namespace nhanes::commands
