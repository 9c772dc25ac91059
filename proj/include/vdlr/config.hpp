#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vdlr/core.hpp"
#include "vdlr/likelihood.hpp"
#include "vdlr/mcmc.hpp"

namespace vdlr {

struct DataSource {
    std::string path;
    LoadOptions load;
    Standardize standardize = Standardize::none;
    // Extra file whose covariates join the pooled scaling.
    std::string pool_with;
};

// Values that may be set to "auto" and resolved from the training response.
struct AutoHyper {
    bool m0 = false;
    bool v = false;
    bool a_sigma0 = false;
};

struct FitPlan {
    DataSource data;
    ModelConfig model;
    AutoHyper autos;
    // [similarity] defaults plus [similarity.<column>] overrides, applied
    // once the covariate names are known.
    SimilarityParams similarity_default;
    std::vector<std::pair<std::string, SimilarityParams>> similarity_overrides;
    McmcConfig mcmc;
    std::string out_dir;
};

// Parses an INI file. Errors are DataError messages naming "section.key".
FitPlan load_fit_plan(const std::string& path);
FitPlan parse_fit_plan(const std::string& text, const std::string& origin = "<config>");

// Fills the similarity vector and resolves "auto" hyperparameters from `train`
// (which must already be on the model scale).
void finalize_model(FitPlan& plan, const Dataset& train);

ModelKind parse_model_kind(const std::string& s);
std::string to_string(ModelKind k);
Standardize parse_standardize(const std::string& s);
std::string to_string(Standardize s);

nlohmann::json to_json(const SimilarityParams& s);
SimilarityParams similarity_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelConfig& m);
ModelConfig model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const McmcConfig& c);
McmcConfig mcmc_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scaling& s);
Scaling scaling_from_json(const nlohmann::json& j);

}  // namespace vdlr
