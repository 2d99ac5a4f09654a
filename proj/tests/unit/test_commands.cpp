#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nhanes/commands.hpp"
#include "nhanes/csv.hpp"
#include "nhanes/error.hpp"
#include "xport_writer.hpp"

using namespace nhanes;
using namespace nhanes::commands;
using nlohmann::json;

namespace {

class StubTransport final : public ingest::Transport {
 public:
  std::set<std::string> not_found;
  std::vector<std::string> calls;

  ingest::HttpResponse get(const std::string& url) override {
    calls.push_back(url);
    if (not_found.count(url)) return {404, "<html>missing</html>"};
    return {200, testkit::write_xport({})};
  }
};

std::string slurp(const Path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const Path& p) { return json::parse(slurp(p)); }

std::string url_for(const std::string& component, const std::string& cycle) {
  const auto manifest = ingest::load_component_manifest(ingest::default_component_manifest());
  for (const auto& s : manifest) {
    if (s.name == component) return ingest::build_component_url(s.ref(ingest::CycleId::from_label(cycle)));
  }
  ADD_FAILURE() << component;
  return {};
}

synthetic::SyntheticOptions small_cohort() {
  synthetic::SyntheticOptions o;
  o.n = 300;
  o.seed = 11;
  return o;
}

}  // namespace

TEST(Commands, DownloadReportsPresentAndAbsentFiles) {
  testkit::TempDir dir("download");
  StubTransport t;
  t.not_found.insert(url_for("smoking", "2011-2012"));
  DownloadOptions o;
  o.cycles = {"2011-2012", "2013-2014"};
  o.components = {"smoking"};
  o.cache_root = dir.path() / "cache";
  o.fetch.sleep = [](std::chrono::milliseconds) {};
  const auto r = cmd_download(o, t, dir.path() / "out");
  ASSERT_EQ(r["present"].size(), 1u);
  ASSERT_EQ(r["absent"].size(), 1u);
  EXPECT_EQ(r["present"][0]["cycle"], "2013-2014");
  EXPECT_EQ(r["absent"][0]["url"], url_for("smoking", "2011-2012"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "download_report.json"));
  EXPECT_TRUE(ingest::cached_file(url_for("smoking", "2013-2014"), o.cache_root));

  o.components = {"no_such_component"};
  EXPECT_THROW(cmd_download(o, t, dir.path() / "out"), Error);
}

TEST(Commands, CleanHarmonizesCachedFiles) {
  testkit::TempDir dir("clean");
  const Path cache = dir.path() / "cache";
  const auto url = url_for("smoking", "2013-2014");
  testkit::WriterMember m;
  m.name = "SMQ_H";
  m.columns = {{"SEQN"}, {"SMQ020"}, {"SMQ040"}, {"SMD650"}};
  m.rows = {{1.0, 1.0, 1.0, 10.0}, {2.0, 2.0, Missing{}, Missing{}}, {3.0, 7.0, Missing{}, Missing{}}};
  const auto path = ingest::cache_path(url, cache);
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << testkit::write_xport({m});

  CleanOptions o;
  o.cache_root = cache;
  o.cycles = {"2011-2012", "2013-2014"};
  o.views = {"smoking"};
  const auto r = cmd_clean(o, dir.path() / "views");
  ASSERT_EQ(r["views"].size(), 1u);
  EXPECT_EQ(r["views"][0]["rows"], 3);
  EXPECT_EQ(r["views"][0]["cycles"], 1);
  EXPECT_EQ(r["views"][0]["uncached_files"].size(), 1u);

  const auto t = read_view(dir.path() / "views" / "smoking.csv");
  EXPECT_EQ(t.number("smoker", 0), 1.0);
  EXPECT_EQ(t.number("smoker", 1), 0.0);
  EXPECT_FALSE(t.number("smoker", 2));
  EXPECT_EQ(t.number("cigarettes_per_day", 0), 10.0);
  EXPECT_EQ(t.number("cigarettes_per_day", 1), 0.0);
  EXPECT_FALSE(t.number("cigarettes_per_day", 2));

  o.views = {"nonexistent"};
  EXPECT_THROW(cmd_clean(o, dir.path() / "views"), Error);
}

TEST(Commands, SynthEdaPcaCca) {
  testkit::TempDir dir("analysis");
  const Path views = dir.path() / "views";
  cmd_synth(small_cohort(), views);
  ASSERT_TRUE(std::filesystem::exists(views / "demographics.csv"));

  EdaOptions e;
  e.view = views / "demographics.csv";
  e.group_by = "gender";
  cmd_eda(e, dir.path() / "eda");
  for (const char* f : {"summary.csv", "summary.json", "histogram.csv", "histogram.json", "histogram.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "eda" / f)) << f;
  }
  EXPECT_TRUE(read_json(dir.path() / "eda" / "summary.json").dump().find("rows_used") != std::string::npos);

  PcaOptions p;
  p.view = views / "body_measures.csv";
  p.k = 3;
  cmd_pca(p, dir.path() / "pca");
  const auto pm = read_json(dir.path() / "pca" / "pca_model.json");
  EXPECT_EQ(pm["directions"][0].size(), 3u);
  const auto loadings = slurp(dir.path() / "pca" / "pca_loadings.csv");
  EXPECT_EQ(loadings.rfind("component,rank,variable,weight\r\n", 0), 0u);
  EXPECT_EQ(std::count(loadings.begin(), loadings.end(), '\n'), 1 + 3 * 6);

  CcaOptions c;
  c.x_view = views / "demographics.csv";
  c.y_view = views / "laboratory.csv";
  c.k = 2;
  cmd_cca(c, dir.path() / "cca");
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "cca" / "cca_model.json"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "cca" / "cca_loadings.csv"));

  p.k = 99;
  EXPECT_THROW(cmd_pca(p, dir.path() / "pca"), Error);
}

TEST(Commands, ExperimentOutputsAreByteIdenticalAcrossRuns) {
  testkit::TempDir dir("experiment");
  task::ExperimentConfig c;
  c.synthetic = small_cohort();
  c.variants = {"REG", "CCA-DL-2"};
  c.grid = {{svm::KernelSpec::linear(), 1.0}, {svm::KernelSpec::rbf(0.05), 10.0}};
  c.folds = 3;
  cmd_experiment(c, dir.path() / "a");
  cmd_experiment(c, dir.path() / "b");
  for (const char* f : {"reports.csv", "reports.json", "roc_REG.csv", "roc_CCA_DL_2.svg"}) {
    ASSERT_TRUE(std::filesystem::exists(dir.path() / "a" / f)) << f;
    EXPECT_EQ(slurp(dir.path() / "a" / f), slurp(dir.path() / "b" / f)) << f;
  }
  const auto csv = slurp(dir.path() / "a" / "reports.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_TRUE(read_json(dir.path() / "a" / "run.json").is_object());

  task::ExperimentConfig none;
  EXPECT_THROW(cmd_experiment(none, dir.path() / "c"), Error);
}

TEST(Commands, RunConfigParsing) {
  const auto c = parse_run_config(json::parse(R"({"cache_dir": "cache", "cycles": ["2013-2014"], "seed": 7,
      "experiment": {"variants": ["REG"], "synthetic": {"n": 100}}})"),
                                  "/base");
  EXPECT_EQ(*c.cache_dir, Path("/base/cache"));
  EXPECT_EQ(c.cycles, std::vector<std::string>{"2013-2014"});
  EXPECT_EQ(*c.seed, 7u);
  ASSERT_TRUE(c.experiment);
  EXPECT_EQ(c.experiment->synthetic->n, 100u);
  for (const char* bad : {R"({"bogus": 1})", R"({"cycles": ["2015-2016"]})", R"({"seed": "x"})", R"([])",
                          R"({"cache_dir": 3})", R"({"experiment": {"folds": 1}})"}) {
    EXPECT_THROW(parse_run_config(json::parse(bad)), Error) << bad;
  }
  EXPECT_EQ(slug("REG+[CCA-DL-15-ALL]-5"), "REG_CCA_DL_15_ALL_5");
}
