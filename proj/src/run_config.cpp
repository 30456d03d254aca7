#include "phenoclust/run_config.hpp"

#include "phenoclust/error.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace phenoclust {
namespace {

template <typename T>
void read_key(const nlohmann::json& doc, const char* key, T& out) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return;
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config", std::string("config key '") + key + "' has the wrong type");
    }
}

void read_integer(const nlohmann::json& doc, const char* key, int& out) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return;
    if (!it->is_number_integer()) throw ConfigError("config", std::string("config key '") + key + "' must be an integer");
    out = it->get<int>();
}

} // namespace

RunConfig parse_run_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config", "config document must be a JSON object");
    static const std::set<std::string> known = {"input", "schema",  "output",  "K",     "gamma0",
                                                "gamma_step", "n_min", "n_max", "k",   "restarts",
                                                "repeats", "necessity_threshold", "alpha", "seed"};
    for (const auto& item : doc.items()) {
        if (!known.contains(item.key())) throw ConfigError("config", "unknown config key '" + item.key() + "'");
    }

    RunConfig config;
    read_key(doc, "input", config.input);
    read_key(doc, "schema", config.schema);
    read_key(doc, "output", config.output);
    read_integer(doc, "K", config.folds);
    read_key(doc, "gamma0", config.gamma0);
    read_key(doc, "gamma_step", config.gamma_step);
    read_integer(doc, "n_min", config.n_min);
    read_integer(doc, "n_max", config.n_max);
    read_integer(doc, "k", config.rank);
    read_integer(doc, "restarts", config.restarts);
    read_integer(doc, "repeats", config.repeats);
    read_key(doc, "necessity_threshold", config.necessity_threshold);
    read_key(doc, "alpha", config.alpha);
    if (const auto it = doc.find("seed"); it != doc.end() && !it->is_null()) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
            throw ConfigError("config", "config key 'seed' must be a non-negative integer");
        }
        config.seed = it->get<std::uint64_t>();
    }
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", "config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

nlohmann::json to_json(const RunConfig& config) {
    nlohmann::json doc = nlohmann::json::object();
    doc["input"] = config.input;
    doc["schema"] = config.schema;
    doc["K"] = config.folds;
    doc["gamma0"] = config.gamma0;
    doc["gamma_step"] = config.gamma_step;
    doc["n_min"] = config.n_min;
    doc["n_max"] = config.n_max;
    doc["k"] = config.rank;
    doc["restarts"] = config.restarts;
    doc["repeats"] = config.repeats;
    doc["necessity_threshold"] = config.necessity_threshold;
    doc["alpha"] = config.alpha;
    doc["seed"] = config.seed ? nlohmann::json(*config.seed) : nlohmann::json(nullptr);
    return doc;
}

void validate(const RunConfig& config) {
    auto fail = [](const std::string& what) { throw ConfigError("parameter", what); };
    if (config.folds < 2) fail("K must be at least 2");
    if (!(config.gamma0 >= 0.0) || !std::isfinite(config.gamma0)) fail("gamma0 must be finite and >= 0");
    if (!(config.gamma_step >= 0.0) || !std::isfinite(config.gamma_step)) fail("gamma_step must be finite and >= 0");
    if (config.n_min < 2 || config.n_max < config.n_min) fail("cluster range requires 2 <= n_min <= n_max");
    if (config.rank < 1) fail("k must be at least 1");
    if (config.restarts < 1) fail("restarts must be at least 1");
    if (config.repeats < 1) fail("repeats must be at least 1");
    if (!(config.necessity_threshold > 0.0 && config.necessity_threshold <= 1.0)) {
        fail("necessity_threshold must lie in (0, 1]");
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) fail("alpha must lie in (0, 1)");
}

std::uint64_t require_seed(const RunConfig& config) {
    if (!config.seed) throw ConfigError("config", "a seed is required (--seed or \"seed\" in the config)");
    return *config.seed;
}

pipeline::PipelineConfig to_pipeline_config(const RunConfig& config, std::size_t threads) {
    validate(config);
    pipeline::PipelineConfig out;
    out.folds = config.folds;
    out.sweep.gamma0 = config.gamma0;
    out.sweep.gamma_step = config.gamma_step;
    out.sweep.n_min = config.n_min;
    out.sweep.n_max = config.n_max;
    out.sweep.rank = config.rank;
    out.sweep.fit.restarts = config.restarts;
    out.necessity.repeats = config.repeats;
    out.necessity.threshold = config.necessity_threshold;
    out.alpha = config.alpha;
    out.seed = config.seed.value_or(0);
    out.sweep.fit.seed = out.seed;
    out.necessity.seed = out.seed;
    out.necessity.threads = threads;
    out.threads = threads;
    return out;
}

} // namespace phenoclust
