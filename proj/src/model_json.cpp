#include "multistage/json_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace multistage {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* name : allowed)
            if (key == name) known = true;
        if (!known)
            throw std::invalid_argument(std::string("model json: unknown field '") + key +
                                        "' in " + where);
    }
}

double require_number(const json& obj, const char* key, const char* where) {
    if (!obj.contains(key))
        throw std::invalid_argument(std::string("model json: missing '") + key + "' in " + where);
    if (!obj[key].is_number())
        throw std::invalid_argument(std::string("model json: '") + key + "' in " + where +
                                    " must be a number");
    return obj[key].get<double>();
}

StepLaw parse_step_law_fields(const json& obj, const char* where) {
    if (!obj.is_object())
        throw std::invalid_argument(std::string("model json: ") + where + " must be an object");
    if (!obj.contains("kind") || !obj["kind"].is_string())
        throw std::invalid_argument(std::string("model json: missing string 'kind' in ") + where);
    const std::string kind = obj["kind"].get<std::string>();
    const double lambda = require_number(obj, "lambda", where);

    if (kind == "exponential") {
        if (obj.contains("q") && obj["q"].get<double>() != 0.0)
            throw std::invalid_argument(
                std::string("model json: exponential law takes no power (q must be 0) in ") +
                where);
        return StepLaw::exponential(lambda);
    }
    const double q = require_number(obj, "q", where);
    if (kind == "power-law-cdf") return StepLaw::power_law_cdf(lambda, q);
    if (kind == "weibull") return StepLaw::weibull(lambda, q);
    throw std::invalid_argument("model json: unknown kind '" + kind + "' in " + where +
                                " (expected power-law-cdf, exponential, or weibull)");
}

std::string validated_name(const json& obj, const char* where) {
    if (!obj.contains("name") || !obj["name"].is_string())
        throw std::invalid_argument(std::string("model json: missing string 'name' in ") + where);
    const std::string name = obj["name"].get<std::string>();
    if (name.empty() || name.find_first_of(",\n\r\"") != std::string::npos)
        throw std::invalid_argument("model json: disease name '" + name +
                                    "' is empty or contains CSV-hostile characters");
    return name;
}

const char* kind_name(StepLawKind kind) {
    switch (kind) {
        case StepLawKind::PowerLawCdf: return "power-law-cdf";
        case StepLawKind::Exponential: return "exponential";
        case StepLawKind::Weibull: return "weibull";
    }
    return "exponential";
}

json optional_number(const std::optional<double>& value) {
    if (value && std::isfinite(*value)) return *value;
    return nullptr;
}

json finite_or_null(double value) {
    if (std::isfinite(value)) return value;
    return nullptr;
}

}  // namespace

ModelVariant parse_model_json(const json& doc) {
    if (!doc.is_object())
        throw std::invalid_argument("model json: document must be an object");

    if (doc.contains("first")) {
        reject_unknown_keys(doc, {"first", "diseases"}, "model");
        StepLaw first = parse_step_law_fields(doc["first"], "first");
        if (!doc.contains("diseases") || !doc["diseases"].is_array() || doc["diseases"].empty())
            throw std::invalid_argument("model json: 'diseases' must be a non-empty array");
        std::vector<std::pair<std::string, StepLaw>> diseases;
        for (const auto& entry : doc["diseases"]) {
            reject_unknown_keys(entry, {"name", "kind", "lambda", "q"}, "disease");
            diseases.emplace_back(validated_name(entry, "disease"),
                                  parse_step_law_fields(entry, "disease"));
        }
        return SharedStepModel(first, std::move(diseases));
    }

    reject_unknown_keys(doc, {"diseases"}, "model");
    if (!doc.contains("diseases") || !doc["diseases"].is_array() || doc["diseases"].empty())
        throw std::invalid_argument("model json: 'diseases' must be a non-empty array");
    std::vector<IndependentModel::Chain> chains;
    for (const auto& entry : doc["diseases"]) {
        reject_unknown_keys(entry, {"name", "first", "second"}, "disease");
        if (!entry.contains("first") || !entry.contains("second"))
            throw std::invalid_argument(
                "model json: independent diseases need 'first' and 'second' laws");
        chains.push_back({validated_name(entry, "disease"),
                          parse_step_law_fields(entry["first"], "first"),
                          parse_step_law_fields(entry["second"], "second")});
    }
    return IndependentModel(std::move(chains));
}

ModelVariant load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& err) {
        throw std::invalid_argument("model json: parse error in " + path.string() + ": " +
                                    err.what());
    }
    return parse_model_json(doc);
}

json step_law_to_json(const StepLaw& law) {
    json obj;
    obj["kind"] = kind_name(law.kind);
    obj["lambda"] = law.lambda;
    if (law.kind != StepLawKind::Exponential) obj["q"] = law.q;
    return obj;
}

json model_to_json(const SharedStepModel& model) {
    json obj;
    obj["first"] = step_law_to_json(model.first);
    obj["diseases"] = json::array();
    for (const auto& [name, law] : model.diseases) {
        json entry = step_law_to_json(law);
        entry["name"] = name;
        obj["diseases"].push_back(std::move(entry));
    }
    return obj;
}

json model_to_json(const IndependentModel& model) {
    json obj;
    obj["diseases"] = json::array();
    for (const auto& chain : model.diseases) {
        json entry;
        entry["name"] = chain.name;
        entry["first"] = step_law_to_json(chain.first);
        entry["second"] = step_law_to_json(chain.second);
        obj["diseases"].push_back(std::move(entry));
    }
    return obj;
}

json fit_to_json(const FitResult& fit, const std::string& disease,
                 const std::string& conditioned_on) {
    json obj;
    obj["disease"] = disease;
    if (!conditioned_on.empty()) obj["conditioned_on"] = conditioned_on;
    obj["q"] = fit.q;
    obj["lambda"] = fit.lambda;
    obj["se_q"] = fit.se_q;
    obj["se_log_lambda"] = fit.se_log_lambda;
    obj["cov_q_log_lambda"] = fit.cov_q_log_lambda;
    obj["log_likelihood"] = finite_or_null(fit.log_likelihood);
    obj["n_events"] = fit.n_events;
    obj["n_at_risk"] = fit.n_at_risk;
    return obj;
}

json detection_report_to_json(const DetectionReport& report) {
    json obj;
    obj["alpha"] = report.alpha;
    obj["reference_age"] = report.reference_age;
    obj["fit_free"] = fit_to_json(report.fit_free, "", "");
    obj["fit_cond"] = fit_to_json(report.fit_cond, "", "");
    obj["fit_free"].erase("disease");
    obj["fit_cond"].erase("disease");
    obj["slope_diff"] = report.slope_diff;
    obj["z"] = report.z;
    obj["p_value"] = report.p_value;
    obj["verdict"] = std::string(verdict_name(report.verdict));
    obj["recovered_q0"] = optional_number(report.recovered_q0);
    obj["recovered_lambda0"] = optional_number(report.recovered_lambda0);
    obj["recovered_se_q0"] = optional_number(report.recovered_se_q0);
    obj["recovered_se_log_lambda0"] = optional_number(report.recovered_se_log_lambda0);
    return obj;
}

}  // namespace multistage
