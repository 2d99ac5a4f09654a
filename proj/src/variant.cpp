#include "nhanes/variant.hpp"

#include <charconv>
#include <optional>
#include <vector>

#include "nhanes/error.hpp"

namespace nhanes::task {
namespace {

[[noreturn]] void bad(std::string_view name, const std::string& why) {
  fail(ErrorCode::BadVariant, "'" + std::string(name) + "': " + why);
}

std::optional<int> positive_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 1) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_dash(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '-') {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

ModelVariant parse_cca(std::string_view name, std::string_view full) {
  auto parts = split_dash(name);
  if (parts.size() < 2 || parts[0] != "CCA" || (parts[1] != "DL" && parts[1] != "BL")) {
    bad(full, "expected REG, CCA-DL-<n>[-ALL], CCA-BL[-<n>][-ALL] or REG+[<cca>]-<m>");
  }
  const bool dl = parts[1] == "DL";
  bool all = false;
  if (parts.back() == "ALL") {
    all = true;
    parts.pop_back();
  }
  ModelVariant v;
  if (parts.size() == 3) {
    auto n = positive_int(parts[2]);
    if (!n) bad(full, "component count must be a positive integer");
    v.n = *n;
  } else if (parts.size() != 2) {
    bad(full, "too many fields");
  }
  if (dl && v.n == 0) bad(full, "CCA-DL needs a component count");
  v.kind = dl ? (all ? VariantKind::CCA_DL_ALL : VariantKind::CCA_DL)
              : (all ? VariantKind::CCA_BL_ALL : VariantKind::CCA_BL);
  return v;
}

}  // namespace

ModelVariant ModelVariant::cca_part() const {
  if (kind != VariantKind::REG_PLUS_CCA) return *this;
  ModelVariant v;
  v.kind = base_kind;
  v.n = base_n;
  return v;
}

ModelVariant parse_variant(std::string_view name) {
  if (name == "REG") return {};
  if (name.starts_with("REG+[")) {
    const auto close = name.rfind("]-");
    if (close == std::string_view::npos || close < 5) bad(name, "expected REG+[<cca>]-<m>");
    const ModelVariant base = parse_cca(name.substr(5, close - 5), name);
    auto m = positive_int(name.substr(close + 2));
    if (!m) bad(name, "stacked feature count must be a positive integer");
    ModelVariant v;
    v.kind = VariantKind::REG_PLUS_CCA;
    v.m = *m;
    v.base_kind = base.kind;
    v.base_n = base.n;
    return v;
  }
  return parse_cca(name, name);
}

std::string variant_name(const ModelVariant& v) {
  auto cca = [](VariantKind kind, int n) {
    std::string s;
    switch (kind) {
      case VariantKind::CCA_DL:
      case VariantKind::CCA_DL_ALL: s = "CCA-DL"; break;
      case VariantKind::CCA_BL:
      case VariantKind::CCA_BL_ALL: s = "CCA-BL"; break;
      default: return std::string("?");
    }
    if (n > 0) s += "-" + std::to_string(n);
    if (kind == VariantKind::CCA_DL_ALL || kind == VariantKind::CCA_BL_ALL) s += "-ALL";
    return s;
  };
  if (v.kind == VariantKind::REG) return "REG";
  if (v.kind == VariantKind::REG_PLUS_CCA) {
    return "REG+[" + cca(v.base_kind, v.base_n) + "]-" + std::to_string(v.m);
  }
  return cca(v.kind, v.n);
}

}  // namespace nhanes::task
