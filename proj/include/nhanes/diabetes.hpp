#pragma once

#include <optional>
#include <string_view>

namespace nhanes::task {

enum class DiabetesLabel { Case, NonCase, Excluded };
enum class Scheme { I, II };

std::string_view to_string(DiabetesLabel label) noexcept;
std::string_view to_string(Scheme scheme) noexcept;
/// Accepts "I" / "II" (also "1" / "2").
Scheme scheme_from_string(std::string_view s);

inline constexpr double kDiabetesFpg = 126.0;     ///< mg/dl, undiagnosed diabetes at or above
inline constexpr double kPrediabetesFpg = 100.0;  ///< mg/dl, impaired fasting glucose at or above

/// Scheme I separates diabetes (diagnosed, or FPG >= 126) from everyone
/// else. Scheme II leaves out diagnosed respondents and separates FPG >= 100
/// from FPG < 100. A missing input on the path that needs it excludes the row.
DiabetesLabel assign_diabetes_label(std::optional<bool> diagnosed, std::optional<double> fpg,
                                    Scheme scheme) noexcept;

}  // namespace nhanes::task
