#include "cotforge/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cotforge::config {

namespace {

// Rejects keys that are not in the allowed set; nested objects are checked
// by their own section parsers.
void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError("unknown config key '" + where + key + "'");
        }
    }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) {
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("config field '" + std::string(key) + "': " + e.what());
        }
    }
}

void parse_provider(const nlohmann::json& j, synthesis::ProviderConfig& p) {
    reject_unknown_keys(
        j, {"mode", "endpoint", "auth_token", "seed", "timeout_s", "retries", "max_in_flight"},
        "provider.");
    std::string mode = p.mode == synthesis::ProviderConfig::Mode::mock ? "mock" : "remote";
    read_field(j, "mode", mode);
    if (mode == "mock") {
        p.mode = synthesis::ProviderConfig::Mode::mock;
    } else if (mode == "remote") {
        p.mode = synthesis::ProviderConfig::Mode::remote;
    } else {
        throw InvariantViolation("provider.mode must be \"mock\" or \"remote\"");
    }
    read_field(j, "endpoint", p.endpoint);
    read_field(j, "auth_token", p.auth_token);
    read_field(j, "seed", p.seed);
    read_field(j, "timeout_s", p.timeout_s);
    read_field(j, "retries", p.retries);
    read_field(j, "max_in_flight", p.max_in_flight);
}

void parse_embedder(const nlohmann::json& j, treebuild::EmbedderConfig& e) {
    reject_unknown_keys(j, {"mode", "dim", "endpoint", "auth_token", "timeout_s", "retries"},
                        "embedder.");
    std::string mode = e.mode == treebuild::EmbedderConfig::Mode::reference ? "reference" : "remote";
    read_field(j, "mode", mode);
    if (mode == "reference") {
        e.mode = treebuild::EmbedderConfig::Mode::reference;
    } else if (mode == "remote") {
        e.mode = treebuild::EmbedderConfig::Mode::remote;
    } else {
        throw InvariantViolation("embedder.mode must be \"reference\" or \"remote\"");
    }
    read_field(j, "dim", e.dim);
    read_field(j, "endpoint", e.endpoint);
    read_field(j, "auth_token", e.auth_token);
    read_field(j, "timeout_s", e.timeout_s);
    read_field(j, "retries", e.retries);
}

void parse_ccvr(const nlohmann::json& j, reward::CCVRConfig& c) {
    reject_unknown_keys(j,
                        {"lambda_format", "lambda_answer", "lambda_process", "lambda", "delta",
                         "theta", "epsilon"},
                        "ccvr.");
    read_field(j, "lambda_format", c.lambda_format);
    read_field(j, "lambda_answer", c.lambda_answer);
    read_field(j, "lambda_process", c.lambda_process);
    read_field(j, "lambda", c.lambda);
    read_field(j, "delta", c.delta);
    read_field(j, "theta", c.theta);
    read_field(j, "epsilon", c.epsilon);
}

void parse_grpo(const nlohmann::json& j, grpo::GRPOConfig& g) {
    reject_unknown_keys(j,
                        {"K", "beta", "learning_rate", "steps", "seed", "sigma_floor", "mode",
                         "length_normalize"},
                        "grpo.");
    read_field(j, "K", g.K);
    read_field(j, "beta", g.beta);
    read_field(j, "learning_rate", g.learning_rate);
    read_field(j, "steps", g.steps);
    read_field(j, "seed", g.seed);
    read_field(j, "sigma_floor", g.sigma_floor);
    std::string mode = g.mode == grpo::GRPOConfig::Mode::alg1 ? "alg1" : "eq5";
    read_field(j, "mode", mode);
    if (mode == "alg1") {
        g.mode = grpo::GRPOConfig::Mode::alg1;
    } else if (mode == "eq5") {
        g.mode = grpo::GRPOConfig::Mode::eq5;
    } else {
        throw InvariantViolation("grpo.mode must be \"alg1\" or \"eq5\"");
    }
    read_field(j, "length_normalize", g.length_normalize);
}

} // namespace

void AppConfig::validate() const {
    if (provider.mode == synthesis::ProviderConfig::Mode::remote && provider.endpoint.empty()) {
        throw InvariantViolation("provider.endpoint is required in remote mode");
    }
    if (embedder.mode == treebuild::EmbedderConfig::Mode::remote && embedder.endpoint.empty()) {
        throw InvariantViolation("embedder.endpoint is required in remote mode");
    }
    if (embedder.dim <= 0) {
        throw InvariantViolation("embedder.dim must be positive");
    }
    try {
        ccvr.validate();
        grpo.validate();
    } catch (const std::invalid_argument& e) {
        throw InvariantViolation(e.what());
    }
    if (merge_range.first < 2 || merge_range.first > merge_range.second) {
        throw InvariantViolation("merge_range must satisfy 2 <= min <= max");
    }
    if (neg_per_pos < 0) {
        throw InvariantViolation("neg_per_pos must be nonnegative");
    }
}

AppConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ParseError("config document must be a JSON object");
    }
    reject_unknown_keys(j, {"provider", "embedder", "ccvr", "grpo", "merge_range", "neg_per_pos"},
                        "");
    AppConfig config;
    if (j.contains("provider")) parse_provider(j.at("provider"), config.provider);
    if (j.contains("embedder")) parse_embedder(j.at("embedder"), config.embedder);
    if (j.contains("ccvr")) parse_ccvr(j.at("ccvr"), config.ccvr);
    if (j.contains("grpo")) parse_grpo(j.at("grpo"), config.grpo);
    if (j.contains("merge_range")) {
        const auto& mr = j.at("merge_range");
        if (!mr.is_array() || mr.size() != 2) {
            throw ParseError("merge_range must be a [min, max] array");
        }
        config.merge_range = {mr.at(0).get<int>(), mr.at(1).get<int>()};
    }
    read_field(j, "neg_per_pos", config.neg_per_pos);
    return config;
}

nlohmann::json to_json(const AppConfig& c) {
    return {
        {"provider",
         {{"mode", c.provider.mode == synthesis::ProviderConfig::Mode::mock ? "mock" : "remote"},
          {"endpoint", c.provider.endpoint},
          {"seed", c.provider.seed},
          {"timeout_s", c.provider.timeout_s},
          {"retries", c.provider.retries},
          {"max_in_flight", c.provider.max_in_flight}}},
        {"embedder",
         {{"mode",
           c.embedder.mode == treebuild::EmbedderConfig::Mode::reference ? "reference" : "remote"},
          {"dim", c.embedder.dim},
          {"endpoint", c.embedder.endpoint}}},
        {"ccvr",
         {{"lambda_format", c.ccvr.lambda_format},
          {"lambda_answer", c.ccvr.lambda_answer},
          {"lambda_process", c.ccvr.lambda_process},
          {"lambda", c.ccvr.lambda},
          {"delta", c.ccvr.delta},
          {"theta", c.ccvr.theta},
          {"epsilon", c.ccvr.epsilon}}},
        {"grpo",
         {{"K", c.grpo.K},
          {"beta", c.grpo.beta},
          {"learning_rate", c.grpo.learning_rate},
          {"steps", c.grpo.steps},
          {"seed", c.grpo.seed},
          {"sigma_floor", c.grpo.sigma_floor},
          {"mode", c.grpo.mode == grpo::GRPOConfig::Mode::alg1 ? "alg1" : "eq5"},
          {"length_normalize", c.grpo.length_normalize}}},
        {"merge_range", {c.merge_range.first, c.merge_range.second}},
        {"neg_per_pos", c.neg_per_pos},
    };
}

void apply_env_overrides(AppConfig& config) {
    if (const char* url = std::getenv("COTFORGE_PROVIDER_URL"); url != nullptr && *url != '\0') {
        config.provider.endpoint = url;
    }
    if (const char* key = std::getenv("COTFORGE_PROVIDER_KEY"); key != nullptr && *key != '\0') {
        config.provider.auth_token = key;
    }
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) {
        throw ParseError("cannot open config file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    AppConfig config;
    if (content.find_first_not_of(" \t\r\n") != std::string::npos) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(content);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
        config = config_from_json(j);
    }
    apply_env_overrides(config);
    config.validate();
    return config;
}

} // namespace cotforge::config
