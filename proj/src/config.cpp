#include "psst/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "psst/digest.hpp"
#include "psst/errors.hpp"

namespace psst {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> parts;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

// Endpoint fields addressed as "<section>.<field>", e.g. "scorer.model".
bool apply_endpoint_setting(EndpointConfig& ep, const std::string& field,
                            const std::string& value) {
    if (field == "base_url") ep.base_url = value;
    else if (field == "model") ep.model = value;
    else if (field == "temperature") ep.temperature = std::stod(value);
    else if (field == "top_p") ep.top_p = std::stod(value);
    else if (field == "max_tokens") ep.max_tokens = std::stoi(value);
    else if (field == "seed") ep.seed = std::stol(value);
    else if (field == "api_key_env") ep.api_key_env = value;
    else if (field == "timeout") ep.timeout_seconds = std::stod(value);
    else if (field == "max_retries") ep.max_retries = std::stoi(value);
    else if (field == "max_concurrency") ep.max_concurrency = std::stoi(value);
    else return false;
    return true;
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot != std::string::npos) {
        const std::string section = key.substr(0, dot);
        const std::string field = key.substr(dot + 1);
        EndpointConfig* ep = nullptr;
        if (section == "transfer") ep = &config.transfer;
        else if (section == "scorer") ep = &config.scorer;
        else if (section == "qa_generator") ep = &config.qa_generator;
        else if (section == "qa_model") ep = &config.qa_model;
        if (ep == nullptr) throw ValidationError("unknown config section: " + section);
        if (!apply_endpoint_setting(*ep, field, value))
            throw ValidationError("unknown endpoint setting: " + key);
        config.settings[key] = value;
        return;
    }

    if (key == "corpus") {
        config.corpus_path = value;
    } else if (key == "band") {
        config.band = band_from_string(value);
    } else if (key == "dimensions") {
        config.dimensions.clear();
        for (const auto& d : split_csv(value))
            config.dimensions.push_back(dimension_from_string(d));
        if (config.dimensions.empty()) throw ValidationError("dimensions must not be empty");
    } else if (key == "k") {
        config.k = std::stoi(value);
        if (config.k < 1) throw ValidationError("k must be >= 1");
    } else if (key == "nset") {
        config.n_set.clear();
        for (const auto& n : split_csv(value)) {
            const int v = std::stoi(n);
            if (v < 1 || v > 4) throw ValidationError("nset entries must lie in 1..4");
            config.n_set.insert(v);
        }
        if (config.n_set.empty()) throw ValidationError("nset must not be empty");
    } else if (key == "cache_mode") {
        if (value == "record") config.cache_mode = CacheMode::record;
        else if (value == "replay") config.cache_mode = CacheMode::replay;
        else throw ValidationError("cache_mode must be record or replay");
    } else if (key == "cache_file") {
        config.cache_file = value;
    } else if (key == "output_dir") {
        config.output_dir = value;
    } else if (key == "seed") {
        config.seed = std::stoul(value);
    } else if (key == "prompts_dir") {
        config.prompts_dir = value;
    } else if (key == "scorer_backend") {
        if (value != "lexical" && value != "remote")
            throw ValidationError("scorer_backend must be lexical or remote");
        config.scorer_backend = value;
    } else if (key == "validation_retries") {
        config.validation_retries = std::stoi(value);
        if (config.validation_retries < 0)
            throw ValidationError("validation_retries must be >= 0");
    } else if (key == "distill_ratio_min") {
        config.distill_ratio_min = std::stod(value);
    } else if (key == "distill_ratio_max") {
        config.distill_ratio_max = std::stod(value);
    } else {
        throw ValidationError("unknown config key: " + key);
    }
    config.settings[key] = value;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    RunConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected key = value");
        try {
            apply_setting(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " +
                                  e.what());
        } catch (const std::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": bad value: " +
                                  e.what());
        }
    }
    return config;
}

std::string config_hash(const RunConfig& config) {
    // File locations are excluded so the hash identifies the measurement
    // configuration itself and stays stable across checkouts.
    static const std::set<std::string> location_keys = {"cache_file", "prompts_dir",
                                                        "output_dir"};
    std::string canonical;
    for (const auto& [k, v] : config.settings) {
        if (location_keys.count(k)) continue;
        canonical += k;
        canonical += '=';
        canonical += v;
        canonical += '\n';
    }
    return sha256_hex(canonical);
}

}  // namespace psst
