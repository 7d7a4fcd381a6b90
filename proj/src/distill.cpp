#include "psst/distill.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "psst/corpus.hpp"
#include "psst/errors.hpp"

namespace psst {

using json = nlohmann::json;

namespace {
constexpr const char* kDistillPromptVersion = "distill-prompt-1";
constexpr int kLevels = 5;
}  // namespace

const char* distill_prompt_version() { return kDistillPromptVersion; }

std::string to_string(ViolationKind v) {
    switch (v) {
        case ViolationKind::malformed_json: return "malformed_json";
        case ViolationKind::wrong_count: return "wrong_count";
        case ViolationKind::duplicate_score: return "duplicate_score";
        case ViolationKind::non_monotone: return "non_monotone";
        case ViolationKind::score_out_of_range: return "score_out_of_range";
        case ViolationKind::empty_sentence: return "empty_sentence";
        case ViolationKind::length_violation: return "length_violation";
    }
    return "malformed_json";
}

namespace {

std::string violations_message(const std::vector<Violation>& violations) {
    std::string msg = "quintuple rejected:";
    for (const auto& v : violations) msg += " [" + to_string(v.kind) + "] " + v.detail + ";";
    return msg;
}

}  // namespace

DistillRejection::DistillRejection(std::vector<Violation> violations, std::string raw_reply)
    : std::runtime_error(violations_message(violations)),
      violations_(std::move(violations)),
      raw_reply_(std::move(raw_reply)) {}

std::vector<Violation> validate_sample(const GenSample& sample) {
    std::vector<Violation> violations;
    if (sample.score < 1 || sample.score > kLevels)
        violations.push_back({ViolationKind::score_out_of_range,
                              "score " + std::to_string(sample.score) + " outside 1..5"});
    if (sample.level < 1 || sample.level > kLevels)
        violations.push_back({ViolationKind::score_out_of_range,
                              "level " + std::to_string(sample.level) + " outside 1..5"});
    if (sample.score != sample.level)
        violations.push_back({ViolationKind::non_monotone,
                              "score " + std::to_string(sample.score) + " != level " +
                                  std::to_string(sample.level)});
    bool blank = true;
    for (unsigned char c : sample.sentence)
        if (!std::isspace(c)) blank = false;
    if (blank) violations.push_back({ViolationKind::empty_sentence, "sentence is empty"});
    return violations;
}

namespace {

bool length_constrained(StyleDimension d) {
    // Emotion content and simplified sentence patterns legitimately change
    // length, so those two dimensions are exempt.
    return d == StyleDimension::interactivity || d == StyleDimension::vividness;
}

const char* dimension_instruction(StyleDimension d) {
    switch (d) {
        case StyleDimension::interactivity:
            return "Levels differ in how directly the sentence engages a listener: "
                   "questions, invitations to reflect, hypothetical scenarios. Keep "
                   "every rewrite close to the original sentence length.";
        case StyleDimension::emotionality:
            return "First decide which emotion fits the content, then express it with "
                   "increasing strength across the levels. Sentence length may vary.";
        case StyleDimension::vividness:
            return "Levels differ in imagery: analogies, metaphors, concrete pictures "
                   "of abstract points. Keep every rewrite close to the original "
                   "sentence length.";
        case StyleDimension::orality:
            return "Levels differ in how spoken the sentence sounds: filler words, "
                   "simple clause structure, casual word choices. Sentence length may "
                   "vary.";
    }
    return "";
}

ChatRequest listwise_request(const std::string& seed_sentence, StyleDimension dimension) {
    ChatRequest req;
    req.messages.push_back(
        {"system",
         "You rewrite one official-style sentence at five increasing strengths of a "
         "named speaking-style quality and score each rewrite. Output strict JSON "
         "only. [" + std::string(kDistillPromptVersion) + "]"});
    req.messages.push_back(
        {"user",
         "Rewrite the sentence below five times with strictly increasing " +
             to_string(dimension) +
             ", keeping the meaning unchanged. Score each rewrite with its level, "
             "1 (weakest) through 5 (strongest), in order. " +
             dimension_instruction(dimension) +
             "\nReturn JSON of the form {\"samples\":[{\"sentence\":\"...\","
             "\"score\":1}]} with exactly five entries scored 1,2,3,4,5.\n\n"
             "Sentence: " +
             seed_sentence});
    return req;
}

std::vector<GenSample> parse_listwise_reply(const std::string& reply,
                                            const std::string& seed_id,
                                            const std::string& seed_sentence,
                                            StyleDimension dimension,
                                            const DistillOptions& options) {
    std::vector<Violation> violations;
    json j;
    try {
        j = json::parse(reply);
    } catch (const json::exception& e) {
        throw DistillRejection({{ViolationKind::malformed_json, e.what()}}, reply);
    }
    if (!j.is_object() || !j.contains("samples") || !j.at("samples").is_array())
        throw DistillRejection({{ViolationKind::malformed_json, "no samples array"}}, reply);
    const auto& arr = j.at("samples");
    if (arr.size() != kLevels)
        throw DistillRejection({{ViolationKind::wrong_count,
                                 "expected " + std::to_string(kLevels) + ", got " +
                                     std::to_string(arr.size())}},
                               reply);

    std::vector<GenSample> samples;
    std::vector<bool> seen_score(kLevels + 1, false);
    int previous_score = 0;
    const int seed_tokens = count_tokens(seed_sentence);
    for (int idx = 0; idx < kLevels; ++idx) {
        GenSample sample;
        sample.dimension = dimension;
        sample.seed_id = seed_id;
        sample.seed_sentence = seed_sentence;
        sample.level = idx + 1;
        try {
            sample.sentence = arr.at(idx).at("sentence").get<std::string>();
            sample.score = arr.at(idx).at("score").get<int>();
        } catch (const json::exception& e) {
            throw DistillRejection({{ViolationKind::malformed_json,
                                     "entry " + std::to_string(idx + 1) + ": " + e.what()}},
                                   reply);
        }
        if (sample.score >= 1 && sample.score <= kLevels) {
            if (seen_score[sample.score])
                violations.push_back({ViolationKind::duplicate_score,
                                      "duplicate score " + std::to_string(sample.score)});
            seen_score[sample.score] = true;
        }
        if (sample.score <= previous_score)
            violations.push_back(
                {ViolationKind::non_monotone,
                 "score " + std::to_string(sample.score) + " after " +
                     std::to_string(previous_score)});
        previous_score = sample.score;
        for (const auto& v : validate_sample(sample)) violations.push_back(v);
        bool blank = true;
        for (unsigned char c : sample.sentence)
            if (!std::isspace(c)) blank = false;
        if (!blank && length_constrained(dimension) && seed_tokens > 0) {
            const int tokens = count_tokens(sample.sentence);
            const double ratio = static_cast<double>(tokens) / seed_tokens;
            if (ratio < options.length_ratio_min || ratio > options.length_ratio_max)
                violations.push_back(
                    {ViolationKind::length_violation,
                     "level " + std::to_string(sample.level) + " is " +
                         std::to_string(tokens) + " tokens vs seed " +
                         std::to_string(seed_tokens)});
        }
        samples.push_back(std::move(sample));
    }
    if (!violations.empty()) throw DistillRejection(std::move(violations), reply);
    return samples;
}

}  // namespace

std::vector<GenSample> gen_listwise(const std::string& seed_id,
                                    const std::string& seed_sentence,
                                    StyleDimension dimension, Gateway& gateway,
                                    const DistillOptions& options) {
    bool blank = true;
    for (unsigned char c : seed_sentence)
        if (!std::isspace(c)) blank = false;
    if (blank) throw ValidationError("empty seed sentence '" + seed_id + "'");

    ChatRequest request = listwise_request(seed_sentence, dimension);
    ChatResponse response = gateway.chat(request);
    for (int attempt = 0;; ++attempt) {
        try {
            return parse_listwise_reply(response.content, seed_id, seed_sentence, dimension,
                                        options);
        } catch (const DistillRejection& e) {
            if (attempt >= options.validation_retries) throw;
            request.messages.push_back({"assistant", response.content});
            request.messages.push_back(
                {"user", std::string("That reply was invalid (") + e.what() +
                             "). Return only the JSON object in the requested schema, five "
                             "entries scored 1,2,3,4,5."});
            response = gateway.chat(request);
        }
    }
}

namespace {

void write_samples(const std::vector<const std::vector<GenSample>*>& quintuples,
                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write training file: " + path.string());
    for (const auto* quintuple : quintuples) {
        for (const auto& s : *quintuple) {
            json rec{{"dimension", to_string(s.dimension)},
                     {"sentence", s.sentence},
                     {"score", s.score},
                     {"seed_id", s.seed_id},
                     {"level", s.level}};
            out << rec.dump() << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

DistillStats build_training_set(const std::vector<Document>& seeds, StyleDimension dimension,
                                Gateway& gateway, double split_ratio, unsigned long rng_seed,
                                const std::filesystem::path& train_path,
                                const std::filesystem::path& val_path,
                                const DistillOptions& options) {
    if (split_ratio < 0.0 || split_ratio > 1.0)
        throw ValidationError("split_ratio must lie in [0,1]");

    DistillStats stats;
    stats.dimension = to_string(dimension);
    stats.seeds = static_cast<int>(seeds.size());
    stats.rng_seed = rng_seed;

    std::vector<std::vector<GenSample>> quintuples;
    for (const auto& seed : seeds) {
        try {
            quintuples.push_back(
                gen_listwise(seed.id, seed.text, dimension, gateway, options));
        } catch (const DistillRejection& e) {
            ++stats.rejected;
            for (const auto& v : e.violations())
                stats.rejection_labels.push_back(seed.id + ":" + to_string(v.kind));
        }
    }
    stats.quintuples_ok = static_cast<int>(quintuples.size());

    // Split at quintuple granularity so no seed sentence straddles the split.
    std::vector<std::size_t> order(quintuples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(rng_seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(split_ratio * static_cast<double>(quintuples.size())));

    std::vector<const std::vector<GenSample>*> train, val;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_train ? train : val).push_back(&quintuples[order[i]]);

    write_samples(train, train_path);
    write_samples(val, val_path);
    stats.train_samples = static_cast<int>(train.size()) * kLevels;
    stats.val_samples = static_cast<int>(val.size()) * kLevels;
    return stats;
}

}  // namespace psst
