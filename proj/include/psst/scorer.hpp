#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "psst/gateway.hpp"
#include "psst/segmenter.hpp"

namespace psst {

enum class StyleDimension { interactivity, emotionality, vividness, orality };

std::string to_string(StyleDimension d);
StyleDimension dimension_from_string(const std::string& s);
const std::vector<StyleDimension>& all_dimensions();

struct BackendDescriptor {
    std::string name;
    bool deterministic = false;
    std::vector<StyleDimension> dimensions;
    std::string version;
};

struct ScoreOutcome {
    std::optional<double> value;
    std::string error;
    bool ok() const { return value.has_value(); }
};

/// Style-strength scorer contract. Scores are reals in [1,5]; deterministic
/// backends return identical scores for identical (dimension, text).
class ScorerBackend {
public:
    virtual ~ScorerBackend() = default;
    virtual BackendDescriptor descriptor() const = 0;

    /// Throws on empty text, unparseable replies, or out-of-range scores.
    virtual double score(StyleDimension dimension, const std::string& text) = 0;

    /// Per-item outcomes, aligned with input order.
    virtual std::vector<ScoreOutcome> score_batch(StyleDimension dimension,
                                                  const std::vector<std::string>& texts);
};

/// Range- and precondition-checked scoring entry point.
double score(ScorerBackend& backend, StyleDimension dimension, const std::string& text);

/// Scores each window text; output aligned with input order, errors positional.
std::vector<ScoreOutcome> score_windows(ScorerBackend& backend, StyleDimension dimension,
                                        const std::vector<Window>& windows);

/// First numeric token of a scorer reply; rejects values outside [1,5].
double parse_remote_score(const std::string& reply);

// ---------------------------------------------------------------------------
// Lexical reference backend
// ---------------------------------------------------------------------------

/// Surface-feature rule for one dimension: characters counted anywhere,
/// whole-word lexicon hits, boundary-checked phrases, sentence-initial
/// openers, and optionally contraction tokens.
struct FeatureRule {
    std::string chars;
    std::unordered_set<std::string> words;
    std::vector<std::string> phrases;
    std::unordered_set<std::string> openers;
    bool contractions = false;
};

/// Deterministic lexical scorer used as the CI reference backend. Raw
/// feature counts map to [1,5] through a fixed non-decreasing piecewise
/// linear table, so appending a feature token never lowers the score and
/// appending an unrelated token never changes the count.
class LexicalBackend : public ScorerBackend {
public:
    /// Built-in rule table, version "lex-1". resources/lexical_scoring.json
    /// ships the same table.
    LexicalBackend();

    static LexicalBackend from_file(const std::filesystem::path& path);

    BackendDescriptor descriptor() const override;
    double score(StyleDimension dimension, const std::string& text) override;

    int feature_count(StyleDimension dimension, const std::string& text) const;
    const FeatureRule& rule(StyleDimension dimension) const;
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }

private:
    std::string version_;
    std::vector<FeatureRule> rules_;  // indexed by StyleDimension
    std::vector<std::pair<double, double>> knots_;
};

// ---------------------------------------------------------------------------
// Remote backend
// ---------------------------------------------------------------------------

/// Scores through a chat endpoint behind a Gateway. With the gateway in
/// replay mode this doubles as the replay backend. Unparseable or
/// out-of-range replies trigger up to `validation_retries` structured
/// re-asks (each a distinct request), then fail carrying the raw reply.
class RemoteScorerBackend : public ScorerBackend {
public:
    explicit RemoteScorerBackend(Gateway& gateway, int validation_retries = 1);

    BackendDescriptor descriptor() const override;
    double score(StyleDimension dimension, const std::string& text) override;
    std::vector<ScoreOutcome> score_batch(StyleDimension dimension,
                                          const std::vector<std::string>& texts) override;

    ChatRequest build_request(StyleDimension dimension, const std::string& text) const;

    static const char* prompt_version();

private:
    double parse_with_retries(StyleDimension dimension, const std::string& text,
                              const ChatRequest& request, const ChatResponse& first);

    Gateway& gateway_;
    int validation_retries_;
};

}  // namespace psst
