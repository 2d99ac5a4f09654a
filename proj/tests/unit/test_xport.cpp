#include <array>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nhanes/csv.hpp"
#include "nhanes/error.hpp"
#include "nhanes/random.hpp"
#include "nhanes/xport.hpp"
#include "oracles.hpp"
#include "xport_writer.hpp"

using namespace nhanes;
using nhanes::testkit::ibm_encode;
using nhanes::testkit::WriterColumn;
using nhanes::testkit::WriterMember;

namespace {

CellValue decode(std::array<std::uint8_t, 8> b) { return xport::decode_ibm_double(b); }

std::stringstream stream_of(const std::string& bytes) { return std::stringstream(bytes); }

WriterMember seqn_gender_fixture() {
  WriterMember m;
  m.name = "DEMO";
  m.label = "Demographics";
  m.columns = {{"SEQN", false, 8, "Respondent sequence number"}, {"RIAGENDR", false, 8, "Gender"}};
  m.rows = {{1.0, 1.0}, {2.0, 2.0}, {3.0, 2.0}};
  return m;
}

bool same_cell(const CellValue& a, const CellValue& b) {
  if (a.index() != b.index()) return false;
  if (const double* x = std::get_if<double>(&a)) return *x == std::get<double>(b);
  return a == b;
}

}  // namespace

TEST(DecodeIbm, StatedPatterns) {
  EXPECT_EQ(std::get<double>(decode({0x41, 0x10, 0, 0, 0, 0, 0, 0})), 1.0);
  EXPECT_EQ(std::get<double>(decode({0x42, 0x19, 0, 0, 0, 0, 0, 0})), 25.0);
  EXPECT_EQ(std::get<Missing>(decode({0x2E, 0, 0, 0, 0, 0, 0, 0})).code, '.');
}

TEST(DecodeIbm, ZeroAndNegative) {
  EXPECT_EQ(std::get<double>(decode({0, 0, 0, 0, 0, 0, 0, 0})), 0.0);
  EXPECT_EQ(std::get<double>(decode({0xC1, 0x10, 0, 0, 0, 0, 0, 0})), -1.0);
  EXPECT_EQ(std::get<double>(decode({0x40, 0x80, 0, 0, 0, 0, 0, 0})), 0.5);
}

TEST(DecodeIbm, SpecialMissingCodes) {
  EXPECT_EQ(std::get<Missing>(decode({'A', 0, 0, 0, 0, 0, 0, 0})).code, 'A');
  EXPECT_EQ(std::get<Missing>(decode({'Z', 0, 0, 0, 0, 0, 0, 0})).code, 'Z');
  EXPECT_EQ(std::get<Missing>(decode({'_', 0, 0, 0, 0, 0, 0, 0})).code, '_');
}

TEST(DecodeIbm, MarkerWithTrailingBytesIsANumber) {
  const CellValue v = decode({0x2E, 0, 0, 0, 0, 0, 0, 1});
  ASSERT_TRUE(std::holds_alternative<double>(v));
  EXPECT_GT(std::get<double>(v), 0.0);
}

TEST(DecodeIbm, RandomPatternsMatchFormula) {
  Rng rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    std::array<std::uint8_t, 8> b{};
    const std::uint64_t bits = rng.bits();
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(bits >> (8 * i));
    const CellValue got = decode(b);
    const CellValue want = testkit::ibm_formula_decode(b.data());
    ASSERT_TRUE(same_cell(got, want)) << "trial " << trial;
    if (const double* x = std::get_if<double>(&got)) ASSERT_FALSE(std::isnan(*x));
  }
}

TEST(DecodeIbm, MonotoneInMantissa) {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint8_t e = static_cast<std::uint8_t>(1 + rng.index(126));
    std::uint64_t m1 = rng.bits() >> 8, m2 = rng.bits() >> 8;
    if (m1 == m2) continue;
    if (m1 > m2) std::swap(m1, m2);
    std::array<std::uint8_t, 8> a{}, b{};
    a[0] = b[0] = e;
    for (int i = 1; i < 8; ++i) {
      a[i] = static_cast<std::uint8_t>(m1 >> (8 * (7 - i)));
      b[i] = static_cast<std::uint8_t>(m2 >> (8 * (7 - i)));
    }
    const auto va = testkit::ibm_formula_decode(a.data());
    const auto vb = testkit::ibm_formula_decode(b.data());
    if (!std::holds_alternative<double>(va) || !std::holds_alternative<double>(vb)) continue;
    EXPECT_LE(std::get<double>(decode(a)), std::get<double>(decode(b)));
  }
}

TEST(DecodeIbm, EncoderRoundTrip) {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const double x = std::ldexp(rng.normal(), static_cast<int>(rng.index(200)) - 100);
    EXPECT_EQ(std::get<double>(decode(ibm_encode(x))), x);
  }
}

TEST(DecodeNumeric, ShortFieldsZeroExtend) {
  const std::array<std::uint8_t, 3> b{0x42, 0x19, 0x00};
  EXPECT_EQ(std::get<double>(xport::decode_numeric(b)), 25.0);
  const std::array<std::uint8_t, 2> m{0x2E, 0x00};
  EXPECT_TRUE(is_missing(xport::decode_numeric(m)));
}

TEST(ParseLibrary, ThreeObservationFixture) {
  auto in = stream_of(testkit::write_xport({seqn_gender_fixture()}));
  const auto lib = xport::parse_library(in);
  ASSERT_EQ(lib.members.size(), 1u);
  const auto& m = lib.members[0];
  EXPECT_EQ(m.name, "DEMO");
  EXPECT_EQ(m.observation_count, 3u);
  ASSERT_EQ(m.variables.size(), 2u);
  EXPECT_EQ(m.variables[0].name, "SEQN");
  EXPECT_EQ(m.variables[1].name, "RIAGENDR");
  EXPECT_EQ(m.variables[1].position, 8u);
  EXPECT_EQ(m.variables[1].label, "Gender");
  EXPECT_EQ(m.record_length(), 16u);
}

TEST(ParseLibrary, EmptyMember) {
  auto fixture = seqn_gender_fixture();
  fixture.rows.clear();
  auto in = stream_of(testkit::write_xport({fixture}));
  const auto lib = xport::parse_library(in);
  ASSERT_EQ(lib.members.size(), 1u);
  EXPECT_EQ(lib.members[0].observation_count, 0u);
}

TEST(ParseLibrary, ZeroHeaderIsMalformed) {
  auto in = stream_of(std::string(160, '\0'));
  try {
    xport::parse_library(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedHeader);
  }
}

TEST(ParseLibrary, TruncatedHeader) {
  const std::string bytes = testkit::write_xport({seqn_gender_fixture()});
  auto in = stream_of(bytes.substr(0, 200));
  try {
    xport::parse_library(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TruncatedFile);
  }
}

TEST(ParseLibrary, NamestrCountDisagreement) {
  std::string bytes = testkit::write_xport({seqn_gender_fixture()});
  // The NAMESTR header is the 8th record; claim 9 variables instead of 2.
  const std::size_t at = 7 * 80 + 54;
  ASSERT_EQ(bytes.substr(at, 4), "0002");
  bytes.replace(at, 4, "0009");
  auto in = stream_of(bytes);
  try {
    xport::parse_library(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadNamestrCount);
  }
}

TEST(ReadObservations, ValuesTrimAndMissing) {
  WriterMember m;
  m.name = "MIX";
  m.columns = {{"SEQN", false, 8, ""}, {"SEX", true, 4, ""}, {"LBX", false, 8, ""}};
  m.rows = {{1.0, std::string("M"), 5.5}, {2.0, std::string("F"), Missing{'.'}},
            {3.0, std::string("MF"), Missing{'B'}}};
  auto in = stream_of(testkit::write_xport({m}));
  const auto lib = xport::parse_library(in);
  const ColumnTable t = xport::read_observations(lib.members[0], in);
  ASSERT_EQ(t.rows(), 3u);
  EXPECT_EQ(std::get<double>(t.column("SEQN").values[2]), 3.0);
  EXPECT_EQ(std::get<std::string>(t.column("SEX").values[0]), "M");
  EXPECT_EQ(std::get<std::string>(t.column("SEX").values[2]), "MF");
  EXPECT_EQ(std::get<double>(t.column("LBX").values[0]), 5.5);
  EXPECT_EQ(std::get<Missing>(t.column("LBX").values[1]).code, '.');
  EXPECT_EQ(std::get<Missing>(t.column("LBX").values[2]).code, 'B');
}

TEST(ReadObservations, SeqnColumnOfFixture) {
  auto in = stream_of(testkit::write_xport({seqn_gender_fixture()}));
  const auto lib = xport::parse_library(in);
  const ColumnTable t = xport::read_observations(lib.members[0], in);
  ASSERT_EQ(t.rows(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(std::get<double>(t.column("SEQN").values[i]), i + 1.0);
}

TEST(ReadObservations, TruncatedPayload) {
  std::string bytes = testkit::write_xport({seqn_gender_fixture()});
  auto in_full = stream_of(bytes);
  const auto lib = xport::parse_library(in_full);
  auto in = stream_of(bytes.substr(0, bytes.size() - 80));
  EXPECT_THROW(xport::read_observations(lib.members[0], in), Error);
}

TEST(ReadObservations, BlankPaddingIsNotAnObservation) {
  // 3 rows of 8 bytes leave 56 bytes of blank padding in the last record.
  WriterMember m;
  m.name = "PAD";
  m.columns = {{"SEQN", false, 8, ""}};
  m.rows = {{1.0}, {2.0}, {3.0}};
  auto in = stream_of(testkit::write_xport({m}));
  const auto lib = xport::parse_library(in);
  EXPECT_EQ(lib.members[0].observation_count, 3u);
}

TEST(ReadObservations, ShortNumericColumns) {
  WriterMember m;
  m.name = "SHORT";
  m.columns = {{"SEQN", false, 8, ""}, {"AGE", false, 3, ""}};
  m.rows = {{1.0, 25.0}, {2.0, 1.0}, {3.0, Missing{'.'}}};
  auto in = stream_of(testkit::write_xport({m}));
  const auto lib = xport::parse_library(in);
  const ColumnTable t = xport::read_observations(lib.members[0], in);
  EXPECT_EQ(std::get<double>(t.column("AGE").values[0]), 25.0);
  EXPECT_EQ(std::get<double>(t.column("AGE").values[1]), 1.0);
  EXPECT_TRUE(is_missing(t.column("AGE").values[2]));
}

TEST(RoundTrip, RandomTablesSurviveWriteAndRead) {
  Rng rng(99);
  testkit::TempDir dir("xport_rt");
  for (int trial = 0; trial < 20; ++trial) {
    ColumnTable t;
    const std::size_t n = rng.index(40);
    std::vector<CellValue> keys, num, text;
    for (std::size_t i = 0; i < n; ++i) {
      keys.push_back(static_cast<double>(i + 1));
      const auto pick = rng.index(10);
      if (pick == 0) num.push_back(Missing{'.'});
      else if (pick == 1) num.push_back(Missing{static_cast<char>('A' + rng.index(26))});
      else num.push_back(std::ldexp(rng.normal(), static_cast<int>(rng.index(60)) - 30));
      text.push_back(std::string(1 + rng.index(5), static_cast<char>('a' + rng.index(26))));
    }
    t.add_column("SEQN", keys);
    t.add_column("VALUE", num);
    t.add_column("NOTE", text, ColumnKind::text);
    const auto file = dir.path() / ("t" + std::to_string(trial) + ".xpt");
    write_file_atomic(file, testkit::write_xport({testkit::member_from_table(t, "RT")}));
    const ColumnTable back = xport::read_xport_file(file);
    ASSERT_EQ(back.rows(), n);
    for (const std::string name : {"SEQN", "VALUE", "NOTE"}) {
      for (std::size_t r = 0; r < n; ++r) {
        ASSERT_TRUE(same_cell(back.column(name).values[r], t.column(name).values[r]))
            << name << " row " << r << " trial " << trial;
      }
    }
  }
}

TEST(Sniff, LibraryHeader) {
  EXPECT_TRUE(xport::looks_like_xport(testkit::write_xport({})));
  EXPECT_FALSE(xport::looks_like_xport("<html>not found</html>"));
}
