// nhanes: download, clean, explore and model NHANES views from the command line.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhanes/commands.hpp"
#include "nhanes/error.hpp"

namespace {

using nhanes::commands::Path;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool json_errors = false;
};

int report_error(const Globals& g, std::string_view code, const std::string& message) {
  if (g.json_errors) {
    nlohmann::ordered_json j{{"error", {{"code", code}, {"message", message}}}};
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "nhanes: " << message << "\n";
  }
  return 1;
}

void print(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NHANES multiview toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "run config JSON (cache_dir, rules, cycles, seed, experiment, out)");
  app.add_option("--seed", g.seed, "run seed; overrides the config");
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--json-errors", g.json_errors, "print failures as a JSON object on stderr");

  nhanes::commands::DownloadOptions dl;
  std::string base_url = dl.base_url;
  auto* download = app.add_subcommand("download", "fetch component files into the cache");
  download->add_option("--cycles", dl.cycles, "cycle labels such as 2013-2014");
  download->add_option("--components", dl.components, "component names from the manifest");
  download->add_option("--manifest", dl.manifest, "component manifest JSON");
  download->add_option("--base-url", base_url, "repository root URL");

  nhanes::commands::CleanOptions cl;
  auto* clean = app.add_subcommand("clean", "build harmonized views from cached files");
  clean->add_option("--rules", cl.rules, "harmonization rule file");
  clean->add_option("--manifest", cl.manifest, "component manifest JSON");
  clean->add_option("--cycles", cl.cycles, "cycle labels");
  clean->add_option("--views", cl.views, "views to build (default: all)");
  clean->add_flag("--strict", cl.strict, "fail on unmapped recode values");

  nhanes::commands::EdaOptions eda;
  std::string group_by;
  bool all_ages = false;
  auto* eda_cmd = app.add_subcommand("eda", "summary statistics and a histogram of one view");
  eda_cmd->add_option("--view", eda.view, "view CSV")->required();
  eda_cmd->add_option("--column", eda.column, "histogram column");
  eda_cmd->add_option("--bin-width", eda.bin_width, "histogram bin width");
  eda_cmd->add_option("--group-by", group_by, "grouping column for the histogram");
  eda_cmd->add_flag("--all-ages", all_ages, "include respondents aged 20 or younger");

  nhanes::commands::PcaOptions pca;
  bool raw_pca = false;
  auto* pca_cmd = app.add_subcommand("pca", "principal components of one view");
  pca_cmd->add_option("--view", pca.view, "view CSV")->required();
  pca_cmd->add_option("-k,--k", pca.k, "number of components");
  pca_cmd->add_option("--columns", pca.columns, "columns to use (default: all)");
  pca_cmd->add_flag("--no-standardize", raw_pca, "centre only, do not scale");

  nhanes::commands::CcaOptions cca;
  auto* cca_cmd = app.add_subcommand("cca", "canonical correlation between two views");
  cca_cmd->add_option("--x", cca.x_view, "first view CSV")->required();
  cca_cmd->add_option("--y", cca.y_view, "second view CSV")->required();
  cca_cmd->add_option("-k,--k", cca.k, "number of canonical pairs (0 = all)");
  cca_cmd->add_option("--ridge", cca.ridge, "diagonal regularization");
  cca_cmd->add_option("--x-columns", cca.x_columns, "columns of the first view");
  cca_cmd->add_option("--y-columns", cca.y_columns, "columns of the second view");

  std::string experiment_file;
  auto* exp_cmd = app.add_subcommand("experiment", "train and evaluate the diabetes model variants");
  exp_cmd->add_option("--experiment", experiment_file, "experiment config JSON");

  nhanes::synthetic::SyntheticOptions syn;
  auto* synth = app.add_subcommand("synth", "write the synthetic cohort as view files");
  synth->add_option("-n,--n", syn.n, "respondents");

  std::string xpt, csv_out;
  bool keep_codes = false;
  auto* dump = app.add_subcommand("dump", "convert an XPORT file to CSV");
  dump->add_option("--xpt", xpt, "input .XPT file")->required();
  dump->add_option("--csv", csv_out, "output CSV")->required();
  dump->add_flag("--keep-missing-codes", keep_codes, "add <name>__missing columns with SAS missing codes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    if (g.json_errors) return report_error(g, "UsageError", e.what()) + 1;
    return app.exit(e);
  }

  try {
    nhanes::commands::RunConfig rc;
    if (!g.config.empty()) rc = nhanes::commands::load_run_config(g.config);
    const Path out = !g.out.empty() ? Path(g.out) : rc.out.value_or(Path("out"));
    const std::optional<std::uint64_t> seed = g.seed ? g.seed : rc.seed;
    const Path cache = rc.cache_dir.value_or(nhanes::ingest::default_cache_root());

    if (*download) {
      dl.cache_root = cache;
      dl.base_url = base_url;
      if (dl.cycles.empty()) dl.cycles = rc.cycles;
      if (rc.manifest && download->count("--manifest") == 0) dl.manifest = *rc.manifest;
      nhanes::ingest::CurlTransport transport;
      print(nhanes::commands::cmd_download(dl, transport, out));
    } else if (*clean) {
      cl.cache_root = cache;
      if (cl.cycles.empty()) cl.cycles = rc.cycles;
      if (rc.rules && clean->count("--rules") == 0) cl.rules = *rc.rules;
      if (rc.manifest && clean->count("--manifest") == 0) cl.manifest = *rc.manifest;
      print(nhanes::commands::cmd_clean(cl, out));
    } else if (*eda_cmd) {
      if (!group_by.empty()) eda.group_by = group_by;
      eda.adult_only = !all_ages;
      print(nhanes::commands::cmd_eda(eda, out));
    } else if (*pca_cmd) {
      pca.standardize = !raw_pca;
      print(nhanes::commands::cmd_pca(pca, out));
    } else if (*cca_cmd) {
      print(nhanes::commands::cmd_cca(cca, out));
    } else if (*exp_cmd) {
      std::optional<nhanes::task::ExperimentConfig> config;
      if (!experiment_file.empty()) config = nhanes::task::load_experiment_config(experiment_file);
      else config = rc.experiment;
      if (!config) {
        nhanes::fail(nhanes::ErrorCode::InvalidConfig,
                     "no experiment config: pass --experiment or an 'experiment' entry in --config");
      }
      if (seed) config->seed = *seed;
      const Path exp_out = !g.out.empty() ? out : config->out_dir.value_or(out);
      print(nhanes::commands::cmd_experiment(*config, exp_out,
                                             [](const std::string& msg) { std::cerr << msg << "\n"; }));
    } else if (*synth) {
      if (seed) syn.seed = *seed;
      print(nhanes::commands::cmd_synth(syn, out));
    } else if (*dump) {
      print(nhanes::commands::cmd_dump(xpt, csv_out, keep_codes));
    }
  } catch (const nhanes::Error& e) {
    return report_error(g, nhanes::to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return report_error(g, "InternalError", e.what());
  }
  return 0;
}
