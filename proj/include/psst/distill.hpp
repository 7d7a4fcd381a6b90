#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "psst/corpus.hpp"
#include "psst/gateway.hpp"
#include "psst/scorer.hpp"

namespace psst {

/// One generated sentence of a list-wise quintuple: rewrite of a seed at
/// style level 1..5, scored by the generating model in the same reply.
struct GenSample {
    StyleDimension dimension = StyleDimension::interactivity;
    std::string seed_id;
    std::string seed_sentence;
    int level = 1;
    std::string sentence;
    int score = 1;
};

enum class ViolationKind {
    malformed_json,
    wrong_count,
    duplicate_score,
    non_monotone,
    score_out_of_range,
    empty_sentence,
    length_violation,
};

std::string to_string(ViolationKind v);

struct Violation {
    ViolationKind kind;
    std::string detail;
};

/// A quintuple that failed validation after all re-asks.
class DistillRejection : public std::runtime_error {
public:
    DistillRejection(std::vector<Violation> violations, std::string raw_reply);
    const std::vector<Violation>& violations() const { return violations_; }
    const std::string& raw_reply() const { return raw_reply_; }

private:
    std::vector<Violation> violations_;
    std::string raw_reply_;
};

struct DistillOptions {
    int validation_retries = 1;
    // Interactivity/vividness sentences must stay within this ratio of the
    // seed's token count; emotionality/orality lengths are unconstrained.
    double length_ratio_min = 0.5;
    double length_ratio_max = 2.0;
};

/// Structural check of one sample against the GenSample invariants.
std::vector<Violation> validate_sample(const GenSample& sample);

/// Generates the five-level quintuple for one seed sentence. Validation
/// failures trigger structured re-asks; a still-invalid reply raises
/// DistillRejection carrying the violations and the raw reply.
std::vector<GenSample> gen_listwise(const std::string& seed_id,
                                    const std::string& seed_sentence,
                                    StyleDimension dimension, Gateway& gateway,
                                    const DistillOptions& options = {});

struct DistillStats {
    std::string dimension;
    int seeds = 0;
    int quintuples_ok = 0;
    int rejected = 0;
    int train_samples = 0;
    int val_samples = 0;
    unsigned long rng_seed = 0;
    std::vector<std::string> rejection_labels;
};

/// Generates quintuples for every seed, splits train/validation at quintuple
/// granularity with a seeded shuffle, and writes JSONL files plus stats.
DistillStats build_training_set(const std::vector<Document>& seeds, StyleDimension dimension,
                                Gateway& gateway, double split_ratio,
                                unsigned long rng_seed,
                                const std::filesystem::path& train_path,
                                const std::filesystem::path& val_path,
                                const DistillOptions& options = {});

const char* distill_prompt_version();

}  // namespace psst
