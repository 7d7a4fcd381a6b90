#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "psst/corpus.hpp"
#include "psst/gateway.hpp"
#include "psst/scorer.hpp"
#include "psst/style_metrics.hpp"

namespace psst {

/// Static run configuration: a key = value file plus command-line overrides.
/// Endpoint secrets stay in environment variables named by api_key_env.
struct RunConfig {
    std::filesystem::path corpus_path;  // default input when --in is omitted
    Band band = Band::none;
    std::vector<StyleDimension> dimensions = all_dimensions();
    int k = kDefaultK;
    std::set<int> n_set = default_n_set();
    CacheMode cache_mode = CacheMode::replay;
    std::filesystem::path cache_file = "cache.jsonl";
    std::filesystem::path output_dir = "out";
    unsigned long seed = 13;
    std::filesystem::path prompts_dir = "resources/prompts";
    std::string scorer_backend = "lexical";  // lexical | remote
    int validation_retries = 1;
    double distill_ratio_min = 0.5;
    double distill_ratio_max = 2.0;

    EndpointConfig transfer;
    EndpointConfig scorer;
    EndpointConfig qa_generator;
    EndpointConfig qa_model;

    /// Every explicitly-set key, in file/flag order of last write; the
    /// config hash is computed over these.
    std::map<std::string, std::string> settings;
};

RunConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` pair (same keys as the config file). Unknown keys
/// throw ValidationError.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// SHA-256 over the sorted explicit settings; embedded into every artifact.
std::string config_hash(const RunConfig& config);

}  // namespace psst
