#pragma once

#include <string>
#include <string_view>

namespace nhanes::task {

enum class VariantKind { REG, CCA_DL, CCA_DL_ALL, CCA_BL, CCA_BL_ALL, REG_PLUS_CCA };

// A model variant and its parameters. For the CCA kinds `n` is the number of
// canonical components kept (0 on a body-measures variant means all of
// them). REG_PLUS_CCA stacks the REG features with the `m` best features of
// the CCA variant described by base_kind / base_n.
struct ModelVariant {
  VariantKind kind = VariantKind::REG;
  int n = 0;
  int m = 0;
  VariantKind base_kind = VariantKind::CCA_DL_ALL;
  int base_n = 0;

  bool is_cca() const noexcept { return kind != VariantKind::REG && kind != VariantKind::REG_PLUS_CCA; }
  /// The CCA variant whose features are used: itself, or the stacked base.
  ModelVariant cca_part() const;

  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;
};

/// "REG", "CCA-DL-15", "CCA-DL-15-ALL", "CCA-BL", "CCA-BL-4", "CCA-BL-ALL",
/// "REG+[CCA-DL-15-ALL]-5". Throws BadVariant.
ModelVariant parse_variant(std::string_view name);
std::string variant_name(const ModelVariant& v);

}  // namespace nhanes::task
