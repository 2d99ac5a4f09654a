#include <algorithm>
#include <array>
#include <functional>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nhanes/error.hpp"
#include "nhanes/harmonize.hpp"

using namespace nhanes;
using namespace nhanes::harmonize;
using nlohmann::json;

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

const HarmonizationRule& find_rule(const std::vector<ViewSpec>& views, const std::string& target) {
  for (const auto& v : views) {
    for (const auto& r : v.rules) {
      if (r.target == target) return r;
    }
  }
  throw std::runtime_error("no rule " + target);
}

}  // namespace

TEST(ApplyRules, CountryOfBirthLandsOnTwoLevels) {
  const auto views = load_rule_file(default_rule_file());
  const HarmonizationRule rule = find_rule(views, "country_of_birth");
  std::map<std::string, ColumnTable> raw;
  raw.emplace("2005-2006", testkit::make_table({1, 2, 3}, {{"DMDBORN", {1.0, 2.0, 3.0}}}));
  raw.emplace("2013-2014", testkit::make_table({4, 5, 6}, {{"DMDBORN4", {1.0, 2.0, 77.0}}}));
  const std::array rules{rule};
  const auto out = apply_rules(raw, rules).table;
  const auto& c = out.column("country_of_birth");
  ASSERT_EQ(c.values.size(), 6u);
  EXPECT_EQ(std::get<std::string>(c.values[0]), "US");
  EXPECT_EQ(std::get<std::string>(c.values[1]), "Other");  // Mexico
  EXPECT_EQ(std::get<std::string>(c.values[2]), "Other");
  EXPECT_EQ(std::get<std::string>(c.values[3]), "US");
  EXPECT_EQ(std::get<std::string>(c.values[4]), "Other");  // Others
  EXPECT_TRUE(is_missing(c.values[5]));
  EXPECT_EQ(c.kind, ColumnKind::categorical);
  EXPECT_EQ(out.provenance()[0], "2005-2006");
  EXPECT_EQ(out.provenance()[5], "2013-2014");
}

TEST(ApplyRules, PassThroughAndDropCodes) {
  const auto rules = parse_rules(json::parse(R"([
    {"target": "bmi", "sources": {"*": "BMXBMI"}},
    {"target": "edu", "sources": {"1999-2000": "DMDEDUC2"}, "drop_codes": [7, 9]}
  ])"));
  std::map<std::string, ColumnTable> raw;
  raw.emplace("1999-2000", testkit::make_table({1, 2, 3}, {{"BMXBMI", {22.5, Missing{}, 31.0}},
                                                          {"DMDEDUC2", {3.0, 7.0, 9.0}}}));
  const auto out = apply_rules(raw, rules);
  EXPECT_EQ(out.table.rows(), 3u);
  EXPECT_EQ(*out.table.number("bmi", 0), 22.5);
  EXPECT_FALSE(out.table.number("bmi", 1));
  EXPECT_EQ(*out.table.number("edu", 0), 3.0);
  EXPECT_FALSE(out.table.number("edu", 1));
  EXPECT_FALSE(out.table.number("edu", 2));
  EXPECT_TRUE(out.warnings.empty());
}

TEST(ApplyRules, MissingSourceGivesMissingForThatCycle) {
  const auto rules = parse_rules(json::parse(R"([{"target": "w", "sources": {"*": "WAIST"}}])"));
  std::map<std::string, ColumnTable> raw;
  raw.emplace("1999-2000", testkit::make_table({1}, {{"WAIST", {90.0}}}));
  raw.emplace("2001-2002", testkit::make_table({2, 3}, {}));
  const auto out = apply_rules(raw, rules).table;
  EXPECT_EQ(out.rows(), 3u);
  EXPECT_EQ(*out.number("w", 0), 90.0);
  EXPECT_FALSE(out.number("w", 2));
}

TEST(ApplyRules, MeanCombineEligibilityAndFallback) {
  const auto rules = parse_rules(json::parse(R"([
    {"target": "sbp", "sources": {"*": ["A", "B"]}, "combine": "mean", "drop_codes": [0]},
    {"target": "adult_val", "sources": {"*": "V"}, "eligibility": {"variable": "AGE", "min": 18}},
    {"target": "cig", "sources": {"*": "N"}, "fallback": {"sources": {"*": "S"}, "recodes": [{"map": {"2": 0}}]}}
  ])"));
  std::map<std::string, ColumnTable> raw;
  raw.emplace("1999-2000", testkit::make_table({1, 2, 3}, {{"A", {120.0, 0.0, Missing{}}},
                                                          {"B", {130.0, 110.0, Missing{}}},
                                                          {"V", {5.0, 6.0, 7.0}},
                                                          {"AGE", {40.0, 12.0, Missing{}}},
                                                          {"N", {10.0, Missing{}, Missing{}}},
                                                          {"S", {1.0, 2.0, 1.0}}}));
  const auto out = apply_rules(raw, rules);
  EXPECT_EQ(*out.table.number("sbp", 0), 125.0);
  EXPECT_EQ(*out.table.number("sbp", 1), 110.0);
  EXPECT_FALSE(out.table.number("sbp", 2));
  EXPECT_EQ(*out.table.number("adult_val", 0), 5.0);
  EXPECT_FALSE(out.table.number("adult_val", 1));
  EXPECT_FALSE(out.table.number("adult_val", 2));
  EXPECT_EQ(*out.table.number("cig", 0), 10.0);
  EXPECT_EQ(*out.table.number("cig", 1), 0.0);
  EXPECT_FALSE(out.table.number("cig", 2));  // 1 unmapped in the fallback
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(ApplyRules, RuleConflict) {
  const auto rules = parse_rules(json::parse(R"([
    {"target": "x", "sources": {"*": "A"}}, {"target": "x", "sources": {"*": "B"}}])"));
  std::map<std::string, ColumnTable> raw;
  raw.emplace("1999-2000", testkit::make_table({1}, {{"A", {1.0}}, {"B", {2.0}}}));
  EXPECT_EQ(code_of([&] { apply_rules(raw, rules); }), ErrorCode::RuleConflict);
}

TEST(ApplyRules, StrictModeRaisesOnUnmappedValue) {
  const auto rules = parse_rules(json::parse(
      R"([{"target": "g", "sources": {"*": "RIAGENDR"}, "recodes": [{"map": {"1": "male", "2": "female"}}]}])"));
  std::map<std::string, ColumnTable> raw;
  raw.emplace("1999-2000", testkit::make_table({1, 2}, {{"RIAGENDR", {1.0, 3.0}}}));
  const auto lenient = apply_rules(raw, rules);
  EXPECT_TRUE(is_missing(lenient.table.column("g").values[1]));
  EXPECT_EQ(lenient.warnings.size(), 1u);
  RuleOptions strict;
  strict.strict = true;
  EXPECT_EQ(code_of([&] { apply_rules(raw, rules, strict); }), ErrorCode::RecodeDomainError);
}

TEST(ApplyRules, RowCountPreservedOnRandomInput) {
  Rng rng(7);
  const auto rules = parse_rules(json::parse(
      R"([{"target": "v", "sources": {"*": "V"}, "drop_codes": [7], "recodes": [{"map": {"1": 1, "2": 0}}]}])"));
  for (int rep = 0; rep < 20; ++rep) {
    std::map<std::string, ColumnTable> raw;
    std::size_t total = 0;
    std::int64_t key = 1;
    for (const auto& cycle : {"1999-2000", "2003-2004", "2011-2012"}) {
      const auto n = static_cast<std::size_t>(rng.index(31));
      std::vector<std::int64_t> keys;
      std::vector<CellValue> v;
      for (std::size_t i = 0; i < n; ++i) {
        keys.push_back(key++);
        const auto code = rng.index(8);
        v.push_back(code == 0 ? CellValue{Missing{}} : CellValue{static_cast<double>(code)});
      }
      total += n;
      raw.emplace(cycle, testkit::make_table(keys, {{"V", v}}));
    }
    EXPECT_EQ(apply_rules(raw, rules).table.rows(), total);
  }
}

TEST(RuleParsing, RejectsBadRules) {
  EXPECT_EQ(code_of([] { parse_rule(json::parse(R"({"target": "x", "sources": {"*": "A"}, "bogus": 1})")); }),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_rule(json::parse(R"({"target": "x", "sources": {"2015-2016": "A"}})")); }),
            ErrorCode::UnsupportedCycle);
  EXPECT_EQ(code_of([] {
              parse_rule(json::parse(R"({"target": "x", "sources": {"*": "A"},
                "recodes": [{"map": {"1": 1}}, {"cycles": ["1999-2000"], "map": {"1": 2}}]})"));
            }),
            ErrorCode::InvalidConfig);
}

TEST(RuleParsing, ShippedRuleFileHasAllViews) {
  const auto views = load_rule_file(default_rule_file());
  std::set<std::string> names;
  for (const auto& v : views) names.insert(v.name);
  for (const auto& n : {"demographics", "body_measures", "laboratory", "questionnaire", "smoking", "outcome"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
  for (const auto& v : views) {
    std::set<std::string> targets;
    for (const auto& r : v.rules) EXPECT_TRUE(targets.insert(r.target).second) << r.target;
  }
}

TEST(JoinViews, Intersection) {
  const auto l = testkit::make_table({1, 2, 3}, {{"a", {10.0, 20.0, 30.0}}});
  const auto r = testkit::make_table({4, 3, 2}, {{"b", {4.0, 3.0, 2.0}}});
  const auto j = join_views(l, r);
  EXPECT_EQ(j.keys(), (std::vector<std::int64_t>{2, 3}));
  EXPECT_EQ(*j.number("a", 0), 20.0);
  EXPECT_EQ(*j.number("b", 0), 2.0);
  EXPECT_EQ(*j.number("b", 1), 3.0);
}

TEST(JoinViews, DisjointKeepsSchema) {
  const auto l = testkit::make_table({1, 2}, {{"a", {1.0, 2.0}}});
  const auto r = testkit::make_table({3}, {{"b", {3.0}}});
  const auto j = join_views(l, r);
  EXPECT_EQ(j.rows(), 0u);
  EXPECT_EQ(j.names(), (std::vector<std::string>{"SEQN", "a", "b"}));
}

TEST(JoinViews, IdenticalKeysAndDuplicates) {
  const auto l = testkit::make_table({1, 2, 3}, {{"a", {1.0, 2.0, 3.0}}});
  const auto r = testkit::make_table({3, 1, 2}, {{"b", {3.0, 1.0, 2.0}}});
  EXPECT_EQ(join_views(l, r).rows(), 3u);
  const auto dup = testkit::make_table({1, 1}, {{"b", {1.0, 1.0}}});
  EXPECT_EQ(code_of([&] { join_views(l, dup); }), ErrorCode::DuplicateKey);
}

TEST(JoinViews, MatchesBruteForceSetIntersection) {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    std::set<std::int64_t> a, b;
    for (int i = 0; i < 40; ++i) a.insert(static_cast<std::int64_t>(rng.index(81)));
    for (int i = 0; i < 40; ++i) b.insert(static_cast<std::int64_t>(rng.index(81)));
    std::vector<std::int64_t> ka(a.begin(), a.end()), kb(b.begin(), b.end());
    const auto j = join_views(testkit::make_table(ka, {}), testkit::make_table(kb, {}));
    std::set<std::int64_t> expected;
    for (auto k : a) {
      if (b.count(k)) expected.insert(k);
    }
    const auto got = j.keys();
    EXPECT_EQ(std::set<std::int64_t>(got.begin(), got.end()), expected);
    EXPECT_EQ(got.size(), expected.size());
  }
}

TEST(MergeComponents, OuterMergeFirstWins) {
  const std::vector<ColumnTable> parts{testkit::make_table({1, 2}, {{"A", {1.0, 2.0}}}),
                                       testkit::make_table({2, 3}, {{"A", {9.0, 9.0}}, {"B", {5.0, 6.0}}})};
  const auto m = merge_components(parts);
  EXPECT_EQ(m.keys(), (std::vector<std::int64_t>{1, 2, 3}));
  EXPECT_EQ(*m.number("A", 1), 2.0);
  EXPECT_FALSE(m.number("A", 2));
  EXPECT_FALSE(m.number("B", 0));
  EXPECT_EQ(*m.number("B", 2), 6.0);
}

TEST(CompleteCases, Examples) {
  const auto t = testkit::make_table({1, 2, 3, 4, 5}, {{"BMI", {20.0, 21.0, Missing{}, 23.0, 24.0}},
                                                      {"age", {Missing{}, Missing{}, Missing{}, Missing{}, Missing{}}}});
  const std::vector<std::string> bmi{"BMI"};
  const auto c = complete_cases(t, bmi);
  EXPECT_EQ(c.table.rows(), 4u);
  EXPECT_EQ(c.retained, 4u);
  EXPECT_EQ(c.dropped, 1u);
  EXPECT_EQ(complete_cases(t, {}).table.rows(), 5u);
  const std::vector<std::string> age{"age"};
  const auto none = complete_cases(t, age);
  EXPECT_EQ(none.table.rows(), 0u);
  EXPECT_EQ(none.dropped, 5u);
  const std::vector<std::string> bad{"nope"};
  EXPECT_EQ(code_of([&] { complete_cases(t, bad); }), ErrorCode::UnknownColumn);
}

TEST(Summarize, HandComputed) {
  const auto t = testkit::make_table({1, 2, 3, 4}, {{"x", {1.0, 2.0, 3.0, 4.0}},
                                                   {"y", {5.0, Missing{}, Missing{}, Missing{}}},
                                                   {"z", {Missing{}, Missing{}, Missing{}, Missing{}}}});
  const auto s = summarize(t, false);
  ASSERT_EQ(s.columns.size(), 3u);
  EXPECT_DOUBLE_EQ(*s.columns[0].mean, 2.5);
  EXPECT_DOUBLE_EQ(*s.columns[0].p50, 2.5);
  EXPECT_DOUBLE_EQ(*s.columns[0].p25, 1.75);
  EXPECT_DOUBLE_EQ(*s.columns[0].std, std::sqrt(5.0 / 3.0));
  EXPECT_EQ(*s.columns[1].mean, 5.0);
  EXPECT_FALSE(s.columns[1].std);
  EXPECT_EQ(s.columns[2].count, 0u);
  EXPECT_FALSE(s.columns[2].mean);
}

TEST(Summarize, AdultOnly) {
  const auto t = testkit::make_table({1, 2, 3}, {{"age", {15.0, 25.0, 30.0}}, {"h", {150.0, 170.0, 180.0}}});
  const auto s = summarize(t, true);
  EXPECT_EQ(s.rows_used, 2u);
  EXPECT_EQ(*s.columns[1].mean, 175.0);
  EXPECT_FALSE(summary_csv(s).empty());
  EXPECT_EQ(summary_json(s)["rows_used"], 2);
}

TEST(Histogram, Bins) {
  const auto t = testkit::make_table({1, 2, 3, 4}, {{"age", {1.0, 2.0, 11.0, 12.0}}});
  const auto h = histogram(t, "age", 10);
  EXPECT_EQ(h.lower_edges, (std::vector<double>{0, 10}));
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 2}));
  const auto edge = histogram(testkit::make_table({1}, {{"age", {10.0}}}), "age", 10);
  EXPECT_EQ(edge.lower_edges, (std::vector<double>{10}));
}

TEST(Histogram, GroupsPartitionTheTotal) {
  const auto t = testkit::make_table({1, 2, 3, 4, 5}, {{"age", {1.0, 2.0, 11.0, 12.0, 15.0}},
                                                      {"gender", {1.0, 2.0, 2.0, 1.0, 2.0}}});
  const auto h = histogram(t, "age", 10, std::string("gender"));
  ASSERT_EQ(h.groups, (std::vector<std::string>{"1", "2"}));
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    EXPECT_EQ(h.group_counts[0][b] + h.group_counts[1][b], h.counts[b]);
  }
  EXPECT_EQ(h.group_counts[1], (std::vector<std::size_t>{1, 2}));
}

TEST(Histogram, EmptyAndErrors) {
  const auto empty = testkit::make_table({}, {{"age", {}}});
  EXPECT_TRUE(histogram(empty, "age", 5).counts.empty());
  EXPECT_EQ(code_of([&] { histogram(empty, "age", 0); }), ErrorCode::NonPositiveBinWidth);
  EXPECT_EQ(code_of([&] { histogram(empty, "age", -1); }), ErrorCode::NonPositiveBinWidth);
}
