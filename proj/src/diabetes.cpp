#include "nhanes/diabetes.hpp"

#include <cmath>
#include <string>

#include "nhanes/error.hpp"

namespace nhanes::task {

std::string_view to_string(DiabetesLabel label) noexcept {
  switch (label) {
    case DiabetesLabel::Case: return "Case";
    case DiabetesLabel::NonCase: return "NonCase";
    case DiabetesLabel::Excluded: return "Excluded";
  }
  return "?";
}

std::string_view to_string(Scheme scheme) noexcept { return scheme == Scheme::I ? "I" : "II"; }

Scheme scheme_from_string(std::string_view s) {
  if (s == "I" || s == "1") return Scheme::I;
  if (s == "II" || s == "2") return Scheme::II;
  fail(ErrorCode::InvalidConfig, "unknown classification scheme '" + std::string(s) + "'");
}

DiabetesLabel assign_diabetes_label(std::optional<bool> diagnosed, std::optional<double> fpg,
                                    Scheme scheme) noexcept {
  if (!diagnosed) return DiabetesLabel::Excluded;
  if (*diagnosed) return scheme == Scheme::I ? DiabetesLabel::Case : DiabetesLabel::Excluded;
  if (!fpg || std::isnan(*fpg)) return DiabetesLabel::Excluded;
  const double cut = scheme == Scheme::I ? kDiabetesFpg : kPrediabetesFpg;
  return *fpg >= cut ? DiabetesLabel::Case : DiabetesLabel::NonCase;
}

}  // namespace nhanes::task
