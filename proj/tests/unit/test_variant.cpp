#include <gtest/gtest.h>

#include "nhanes/error.hpp"
#include "nhanes/variant.hpp"

using namespace nhanes;
using namespace nhanes::task;

TEST(Variant, ParsesEveryForm) {
  EXPECT_EQ(parse_variant("REG").kind, VariantKind::REG);
  const auto dl = parse_variant("CCA-DL-15");
  EXPECT_EQ(dl.kind, VariantKind::CCA_DL);
  EXPECT_EQ(dl.n, 15);
  EXPECT_EQ(parse_variant("CCA-DL-15-ALL").kind, VariantKind::CCA_DL_ALL);
  EXPECT_EQ(parse_variant("CCA-BL").kind, VariantKind::CCA_BL);
  EXPECT_EQ(parse_variant("CCA-BL").n, 0);
  EXPECT_EQ(parse_variant("CCA-BL-4").n, 4);
  EXPECT_EQ(parse_variant("CCA-BL-ALL").kind, VariantKind::CCA_BL_ALL);
  const auto plus = parse_variant("REG+[CCA-DL-15-ALL]-5");
  EXPECT_EQ(plus.kind, VariantKind::REG_PLUS_CCA);
  EXPECT_EQ(plus.m, 5);
  EXPECT_EQ(plus.base_kind, VariantKind::CCA_DL_ALL);
  EXPECT_EQ(plus.base_n, 15);
  EXPECT_EQ(plus.cca_part(), parse_variant("CCA-DL-15-ALL"));
  EXPECT_TRUE(dl.is_cca());
  EXPECT_FALSE(plus.is_cca());
}

TEST(Variant, NamesRoundTrip) {
  for (const char* name : {"REG", "CCA-DL-3", "CCA-DL-15-ALL", "CCA-BL", "CCA-BL-2", "CCA-BL-ALL",
                           "REG+[CCA-DL-15-ALL]-5", "REG+[CCA-BL]-1"}) {
    EXPECT_EQ(variant_name(parse_variant(name)), name);
  }
}

TEST(Variant, RejectsMalformedNames) {
  for (const char* name : {"", "REG2", "CCA", "CCA-XL-3", "CCA-DL", "CCA-DL-ALL", "CCA-DL-0", "CCA-DL-x",
                           "CCA-DL-3-4", "REG+[CCA-DL-3]", "REG+[CCA-DL-3]-0", "REG+CCA-DL-3-2"}) {
    try {
      parse_variant(name);
      ADD_FAILURE() << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadVariant) << name;
    }
  }
}
