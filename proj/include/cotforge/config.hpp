#pragma once
// Application configuration: one JSON document covering every stage.
//
// An empty (or all-whitespace) file yields the defaults. Unknown keys are
// rejected so typos never silently fall back to a default. Environment
// variables COTFORGE_PROVIDER_URL and COTFORGE_PROVIDER_KEY override the
// provider endpoint and auth token only.

#include <filesystem>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "cotforge/grpo.hpp"
#include "cotforge/reward.hpp"
#include "cotforge/synthesis.hpp"
#include "cotforge/treebuild.hpp"

namespace cotforge::config {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AppConfig {
    synthesis::ProviderConfig provider;
    treebuild::EmbedderConfig embedder;
    reward::CCVRConfig ccvr;
    grpo::GRPOConfig grpo;
    std::pair<int, int> merge_range{2, 4};
    int neg_per_pos = 1;

    // Throws InvariantViolation naming the offending field.
    void validate() const;
};

AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AppConfig& config);

// Parses the file (defaults when empty), applies env overrides, validates.
AppConfig load_config(const std::filesystem::path& path);

void apply_env_overrides(AppConfig& config);

} // namespace cotforge::config
