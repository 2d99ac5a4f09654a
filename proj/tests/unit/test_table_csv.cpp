#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nhanes/csv.hpp"
#include "nhanes/error.hpp"
#include "nhanes/table.hpp"

using namespace nhanes;

TEST(Missing, ParseLabels) {
  EXPECT_EQ(Missing::parse(".")->code, '.');
  EXPECT_EQ(Missing::parse(".C")->code, 'C');
  EXPECT_EQ(Missing::parse("._")->code, '_');
  EXPECT_FALSE(Missing::parse(".a"));
  EXPECT_FALSE(Missing::parse("x"));
  EXPECT_EQ(Missing{'Q'}.label(), ".Q");
}

TEST(ColumnTable, RejectsUnequalColumns) {
  ColumnTable t;
  t.add_column("SEQN", {1.0, 2.0});
  EXPECT_THROW(t.add_column("X", {1.0}), Error);
}

TEST(ColumnTable, DuplicateKeys) {
  auto t = testkit::make_table({1, 2, 2}, {});
  try {
    t.check_unique_keys();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateKey);
  }
}

TEST(ColumnTable, TakeRowsKeepsSchema) {
  auto t = testkit::make_table({1, 2, 3}, {{"X", {10.0, Missing{}, 30.0}}});
  const std::vector<std::size_t> rows{2, 0};
  const auto s = t.take_rows(rows);
  EXPECT_EQ(s.keys(), (std::vector<std::int64_t>{3, 1}));
  EXPECT_EQ(*s.number("X", 0), 30.0);
  EXPECT_EQ(t.empty_like().rows(), 0u);
  EXPECT_EQ(t.empty_like().cols(), 2u);
}

TEST(ColumnTable, ToMatrix) {
  auto t = testkit::make_table({1, 2}, {{"A", {1.0, 2.0}}, {"B", {3.0, 4.0}}});
  const std::vector<std::string> cols{"B", "A"};
  const Eigen::MatrixXd m = to_matrix(t, cols);
  EXPECT_EQ(m(0, 0), 3.0);
  EXPECT_EQ(m(1, 1), 2.0);
  const std::vector<std::string> bad{"C"};
  EXPECT_THROW(to_matrix(t, bad), Error);
}

TEST(Render, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(25), "25");
  EXPECT_EQ(render(CellValue{Missing{}}), "");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Csv, QuotingFollowsRfc4180) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  const auto rows = parse_csv("a,\"b,c\",\"d\ne\"\n1,2,3");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "b,c");
  EXPECT_EQ(rows[0][2], "d\ne");
  EXPECT_EQ(rows[1][2], "3");
}

TEST(Csv, ParseNumberIsStrict) {
  EXPECT_EQ(*parse_number("1.5"), 1.5);
  EXPECT_EQ(*parse_number("-3e2"), -300.0);
  EXPECT_FALSE(parse_number("1.5x"));
  EXPECT_FALSE(parse_number(""));
  EXPECT_FALSE(parse_number("nan"));
}

TEST(Csv, MissingCodeCompanionColumns) {
  auto t = testkit::make_table({1, 2}, {{"X", {1.5, Missing{'R'}}}});
  std::ostringstream s;
  CsvOptions o;
  o.missing_codes = MissingCodeColumns::all_numeric;
  write_csv(t, s, o);
  EXPECT_EQ(s.str(), "SEQN,SEQN__missing,X,X__missing\r\n1,,1.5,\r\n2,,,.R\r\n");
  std::ostringstream plain;
  write_csv(t, plain);
  EXPECT_EQ(plain.str(), "SEQN,X\r\n1,1.5\r\n2,\r\n");
}

TEST(View, RoundTripKeepsKindsCodesAndProvenance) {
  testkit::TempDir dir("view");
  auto t = testkit::make_table(
      {1, 2, 3}, {{"X", {1.25, Missing{'.'}, Missing{'Z'}}}, {"G", {1.0, 2.0, Missing{}}}});
  t.column("G").kind = ColumnKind::categorical;
  t.add_column("NOTE", {std::string("a,b"), std::string(""), std::string("q")}, ColumnKind::text);
  t.set_provenance({"1999-2000", "2001-2002", "2001-2002"});
  const auto file = dir.path() / "v.csv";
  write_view(t, file);
  const ColumnTable back = read_view(file);
  ASSERT_EQ(back.rows(), 3u);
  EXPECT_EQ(back.column("G").kind, ColumnKind::categorical);
  EXPECT_EQ(back.column("NOTE").kind, ColumnKind::text);
  EXPECT_EQ(std::get<double>(back.column("X").values[0]), 1.25);
  EXPECT_EQ(std::get<Missing>(back.column("X").values[2]).code, 'Z');
  EXPECT_EQ(std::get<std::string>(back.column("NOTE").values[0]), "a,b");
  EXPECT_EQ(back.provenance(), t.provenance());
}

TEST(View, MissingSidecarIsAnError) {
  testkit::TempDir dir("view_nosidecar");
  write_file_atomic(dir.path() / "v.csv", "SEQN\n1\n");
  EXPECT_THROW(read_view(dir.path() / "v.csv"), Error);
}
