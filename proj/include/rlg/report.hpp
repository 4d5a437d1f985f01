#pragma once

// JSON and text renderings of fits, summaries and tests.

#include <json.hpp>
#include <optional>
#include <string>

#include "rlg/control.hpp"
#include "rlg/fit_result.hpp"
#include "rlg/inference.hpp"

namespace rlg {

inline constexpr int kJsonSchema = 1;

/// Four significant digits, fixed notation for moderate magnitudes.
std::string format_number(double x, int digits = 4);

nlohmann::json to_json(const Control& control);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const FitSummary& summary);
nlohmann::json to_json(const TestResult& test);

/// Inverse of to_json(FitResult); non-finite numbers travel as null.
FitResult fit_from_json(const nlohmann::json& j);

/// The print and summary layout: point estimates, then (when available) the
/// intervals, then a summary of the robustness weights.
std::string format_fit_text(const FitResult& fit, const std::optional<FitSummary>& summary,
                            const std::string& summary_error = "");

std::string format_wald_text(const TestResult& test, Method method);
std::string format_wilks_text(const TestResult& test, Method method);

}  // namespace rlg
