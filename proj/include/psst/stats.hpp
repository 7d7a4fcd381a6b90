#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace psst {

enum class AgreementMetric { nominal, ordinal, interval };

std::string to_string(AgreementMetric m);
AgreementMetric agreement_metric_from_string(const std::string& s);

/// Raters x items grid of optional ratings feeding Krippendorff's alpha.
struct ReliabilityMatrix {
    std::vector<std::vector<std::optional<double>>> ratings;  // [rater][item]
    AgreementMetric metric = AgreementMetric::interval;

    std::size_t raters() const { return ratings.size(); }
    std::size_t items() const { return ratings.empty() ? 0 : ratings.front().size(); }
};

/// CSV with one row per rater, one column per item, blank cell = missing.
ReliabilityMatrix load_reliability_csv(const std::filesystem::path& path,
                                       AgreementMetric metric);

/// One comparison set: candidate texts plus one or more rankings over them.
struct Ranking {
    std::string rater;
    std::vector<double> ranks;  // aligned with RankingSet::candidate_ids
};

struct RankingSet {
    std::string set_id;
    std::vector<std::string> candidate_ids;
    std::vector<Ranking> rankings;
};

std::vector<RankingSet> load_ranking_sets(const std::filesystem::path& path);

/// Descending scores get ranks 1..m; ties share the average of the ranks
/// they span.
std::vector<double> rank_from_scores(const std::vector<double>& scores);

/// Pearson correlation of the two rank vectors (tie-safe).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Kendall's tau-b (tie-corrected).
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

/// alpha = 1 - D_o/D_e over the coincidence matrix, with the metric's
/// difference function; missing ratings are excluded pairwise.
double krippendorff_alpha(const ReliabilityMatrix& matrix);

struct CorrelationSummary {
    double mean_rho_percent = 0.0;    // mean of per-set Spearman, x100
    double pooled_rho_percent = 0.0;  // single Spearman over all pooled pairs, x100
    int sets_used = 0;
    int sets_skipped = 0;  // degenerate variance
};

/// Per set: ranks system scores, builds the consensus human ranking
/// (average of annotator rank vectors, re-ranked), and correlates the two.
CorrelationSummary correlate_sets(const std::vector<RankingSet>& sets,
                                  const std::map<std::string, double>& system_scores);

}  // namespace psst
