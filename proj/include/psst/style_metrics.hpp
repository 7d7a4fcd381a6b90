#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "psst/corpus.hpp"
#include "psst/scorer.hpp"
#include "psst/segmenter.hpp"

namespace psst {

/// Window-score sequences for one document and one dimension, keyed by n.
/// Under the default configuration all of n = 1..4 are present and each
/// list has max(M - n + 1, 1) entries for a document of M sentences.
struct ScoreSequences {
    std::string document_id;
    StyleDimension dimension = StyleDimension::interactivity;
    std::map<int, std::vector<double>> per_n;
};

constexpr int kDefaultK = 5;
const std::set<int>& default_n_set();

struct DimensionScores {
    double text_score = 0.0;
    double text_score_scaled = 0.0;
    std::vector<double> distribution;
    std::vector<double> distribution_scaled;
};

struct StyleReport {
    std::string document_id;
    int k = kDefaultK;
    std::map<StyleDimension, DimensionScores> dimensions;
};

/// Mean over n of the mean window score per n. Requires exactly the
/// expected n keys, each with a non-empty list.
double text_level_score(const ScoreSequences& seqs,
                        const std::set<int>& expected_n = default_n_set());

/// Positional style-strength distribution: each per-n sequence is chunked
/// into K segments (element i of a length-L sequence lands in segment
/// floor(i*K/L); sequences shorter than K are upsampled by nearest sample),
/// then the per-n K-vectors are averaged position-wise.
std::vector<double> chunk_distribution(const ScoreSequences& seqs, int k,
                                       const std::set<int>& expected_n = default_n_set());

/// Display scaling, 1-5 to 20-100.
double scale_to_display(double raw);

/// Segments the document, scores every n-gram window for each requested
/// dimension, and aggregates both metrics. Errors carry the document id.
StyleReport style_report(const Document& doc, ScorerBackend& backend,
                         const std::vector<StyleDimension>& dimensions,
                         int k = kDefaultK,
                         const std::set<int>& n_set = default_n_set(),
                         const Segmenter& segmenter = Segmenter());

/// The per-dimension ScoreSequences behind a style report; exposed so
/// callers can persist or inspect raw window scores.
std::map<StyleDimension, ScoreSequences> build_score_sequences(
    const Document& doc, ScorerBackend& backend,
    const std::vector<StyleDimension>& dimensions,
    const std::set<int>& n_set = default_n_set(),
    const Segmenter& segmenter = Segmenter());

}  // namespace psst
