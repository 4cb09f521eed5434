#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "json.hpp"

#include "multistage/detect.hpp"
#include "multistage/model.hpp"
#include "multistage/survival.hpp"

namespace multistage {

using ModelVariant = std::variant<SharedStepModel, IndependentModel>;

/// Shared-step schema:
///   {"first": {"kind","lambda","q"}, "diseases": [{"name","kind","lambda","q"}]}
/// Independent schema:
///   {"diseases": [{"name","first": {...}, "second": {...}}]}
/// kind is one of "power-law-cdf", "exponential", "weibull"; q is required for
/// the power-law and Weibull kinds and must be absent or 0 for exponential.
/// Unknown fields are rejected.
ModelVariant parse_model_json(const nlohmann::json& doc);
ModelVariant load_model_file(const std::filesystem::path& path);

nlohmann::json step_law_to_json(const StepLaw& law);
nlohmann::json model_to_json(const SharedStepModel& model);
nlohmann::json model_to_json(const IndependentModel& model);

nlohmann::json fit_to_json(const FitResult& fit, const std::string& disease,
                           const std::string& conditioned_on = "");
nlohmann::json detection_report_to_json(const DetectionReport& report);

}  // namespace multistage
