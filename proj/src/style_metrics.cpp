#include "psst/style_metrics.hpp"

#include <numeric>

#include "psst/errors.hpp"

namespace psst {

const std::set<int>& default_n_set() {
    static const std::set<int> ns = {1, 2, 3, 4};
    return ns;
}

namespace {

void validate_sequences(const ScoreSequences& seqs, const std::set<int>& expected_n) {
    if (expected_n.empty()) throw ValidationError("n-set must not be empty");
    for (int n : expected_n) {
        auto it = seqs.per_n.find(n);
        if (it == seqs.per_n.end())
            throw ValidationError("document '" + seqs.document_id + "': missing score sequence for n=" +
                                  std::to_string(n));
        if (it->second.empty())
            throw ValidationError("document '" + seqs.document_id + "': empty score sequence for n=" +
                                  std::to_string(n));
    }
}

double mean(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Segment values for one sequence: proportional index mapping for L >= K,
// nearest-sample upsampling for L < K.
std::vector<double> chunk_one(const std::vector<double>& seq, int k) {
    const std::size_t len = seq.size();
    const std::size_t kk = static_cast<std::size_t>(k);
    std::vector<double> chunks(kk, 0.0);
    if (len >= kk) {
        std::vector<double> sums(kk, 0.0);
        std::vector<std::size_t> counts(kk, 0);
        for (std::size_t i = 0; i < len; ++i) {
            const std::size_t c = i * kk / len;
            sums[c] += seq[i];
            ++counts[c];
        }
        for (std::size_t c = 0; c < kk; ++c) chunks[c] = sums[c] / static_cast<double>(counts[c]);
    } else {
        for (std::size_t c = 0; c < kk; ++c) chunks[c] = seq[c * len / kk];
    }
    return chunks;
}

}  // namespace

double text_level_score(const ScoreSequences& seqs, const std::set<int>& expected_n) {
    validate_sequences(seqs, expected_n);
    double total = 0.0;
    for (int n : expected_n) total += mean(seqs.per_n.at(n));
    return total / static_cast<double>(expected_n.size());
}

std::vector<double> chunk_distribution(const ScoreSequences& seqs, int k,
                                       const std::set<int>& expected_n) {
    if (k < 1) throw ValidationError("K must be >= 1");
    validate_sequences(seqs, expected_n);
    std::vector<double> dist(static_cast<std::size_t>(k), 0.0);
    for (int n : expected_n) {
        const auto chunks = chunk_one(seqs.per_n.at(n), k);
        for (std::size_t c = 0; c < chunks.size(); ++c) dist[c] += chunks[c];
    }
    for (auto& v : dist) v /= static_cast<double>(expected_n.size());
    return dist;
}

double scale_to_display(double raw) { return 20.0 * raw; }

std::map<StyleDimension, ScoreSequences> build_score_sequences(
    const Document& doc, ScorerBackend& backend,
    const std::vector<StyleDimension>& dimensions, const std::set<int>& n_set,
    const Segmenter& segmenter) {
    std::vector<SentenceSpan> sentences;
    try {
        sentences = segmenter.split_sentences(doc.text);
    } catch (const std::exception& e) {
        throw ValidationError("document '" + doc.id + "': " + e.what());
    }

    std::map<StyleDimension, ScoreSequences> out;
    for (StyleDimension dim : dimensions) {
        ScoreSequences seqs;
        seqs.document_id = doc.id;
        seqs.dimension = dim;
        for (int n : n_set) {
            const auto windows = ngram_windows(sentences, n, doc.text);
            const auto outcomes = score_windows(backend, dim, windows);
            std::vector<double> scores;
            scores.reserve(outcomes.size());
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                if (!outcomes[i].ok())
                    throw ValidationError("document '" + doc.id + "', dimension " +
                                          to_string(dim) + ", n=" + std::to_string(n) +
                                          ", window " + std::to_string(i) + ": " +
                                          outcomes[i].error);
                scores.push_back(*outcomes[i].value);
            }
            seqs.per_n[n] = std::move(scores);
        }
        out.emplace(dim, std::move(seqs));
    }
    return out;
}

StyleReport style_report(const Document& doc, ScorerBackend& backend,
                         const std::vector<StyleDimension>& dimensions, int k,
                         const std::set<int>& n_set, const Segmenter& segmenter) {
    const auto sequences = build_score_sequences(doc, backend, dimensions, n_set, segmenter);
    StyleReport report;
    report.document_id = doc.id;
    report.k = k;
    for (const auto& [dim, seqs] : sequences) {
        DimensionScores scores;
        scores.text_score = text_level_score(seqs, n_set);
        scores.text_score_scaled = scale_to_display(scores.text_score);
        scores.distribution = chunk_distribution(seqs, k, n_set);
        scores.distribution_scaled.reserve(scores.distribution.size());
        for (double v : scores.distribution)
            scores.distribution_scaled.push_back(scale_to_display(v));
        report.dimensions.emplace(dim, std::move(scores));
    }
    return report;
}

}  // namespace psst
