#include "psst/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "psst/errors.hpp"

namespace psst {

using json = nlohmann::json;

std::string to_string(AgreementMetric m) {
    switch (m) {
        case AgreementMetric::nominal: return "nominal";
        case AgreementMetric::ordinal: return "ordinal";
        case AgreementMetric::interval: return "interval";
    }
    return "interval";
}

AgreementMetric agreement_metric_from_string(const std::string& s) {
    if (s == "nominal") return AgreementMetric::nominal;
    if (s == "ordinal") return AgreementMetric::ordinal;
    if (s == "interval") return AgreementMetric::interval;
    throw ValidationError("unknown agreement metric: " + s);
}

ReliabilityMatrix load_reliability_csv(const std::filesystem::path& path,
                                       AgreementMetric metric) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open reliability matrix: " + path.string());
    ReliabilityMatrix m;
    m.metric = metric;
    std::string line;
    std::size_t width = 0;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::optional<double>> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::string trimmed;
            for (char c : cell)
                if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
            if (trimmed.empty()) {
                row.push_back(std::nullopt);
            } else {
                try {
                    row.push_back(std::stod(trimmed));
                } catch (const std::exception&) {
                    throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                          ": non-numeric cell '" + trimmed + "'");
                }
            }
        }
        if (!line.empty() && line.back() == ',') row.push_back(std::nullopt);
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": ragged row (" + std::to_string(row.size()) + " vs " +
                                  std::to_string(width) + " cells)");
        m.ratings.push_back(std::move(row));
    }
    if (m.raters() < 2) throw ValidationError("reliability matrix needs at least 2 raters");
    return m;
}

std::vector<RankingSet> load_ranking_sets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ranking file: " + path.string());
    std::vector<RankingSet> sets;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json rec = json::parse(line);
            RankingSet set;
            set.set_id = rec.at("set_id").get<std::string>();
            for (const auto& id : rec.at("candidate_ids"))
                set.candidate_ids.push_back(id.get<std::string>());
            for (const auto& r : rec.at("rankings")) {
                Ranking ranking;
                ranking.rater = r.at("rater").get<std::string>();
                for (const auto& v : r.at("ranks")) ranking.ranks.push_back(v.get<double>());
                if (ranking.ranks.size() != set.candidate_ids.size())
                    throw ValidationError("ranking by '" + ranking.rater +
                                          "' does not cover the candidate ids");
                set.rankings.push_back(std::move(ranking));
            }
            sets.push_back(std::move(set));
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed ranking set: " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    return sets;
}

std::vector<double> rank_from_scores(const std::vector<double>& scores) {
    const std::size_t m = scores.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<double> ranks(m, 0.0);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && scores[order[j + 1]] == scores[order[i]]) ++j;
        // positions i..j share the average rank
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

void check_pair(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw ValidationError("rank vectors differ in length: " + std::to_string(x.size()) +
                              " vs " + std::to_string(y.size()));
    if (x.size() < 2) throw ValidationError("need at least 2 ranks");
}

double variance_sum(const std::vector<double>& xs, double mean) {
    double s = 0.0;
    for (double v : xs) s += (v - mean) * (v - mean);
    return s;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    check_pair(x, y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    const double sx = variance_sum(x, mx);
    const double sy = variance_sum(y, my);
    if (sx == 0.0 || sy == 0.0) throw ValidationError("zero variance in rank vector");
    double cov = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx) * (y[i] - my);
    return cov / std::sqrt(sx * sy);
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
    check_pair(x, y);
    long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0 || dy == 0.0) continue;  // tied pairs enter via the corrections
            if (dx * dy > 0.0) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    const double n0 = static_cast<double>(x.size()) * (static_cast<double>(x.size()) - 1) / 2.0;
    double tx = 0.0, ty = 0.0;
    {
        // Tie corrections from group sizes.
        auto tie_term = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            double term = 0.0;
            std::size_t i = 0;
            while (i < v.size()) {
                std::size_t j = i;
                while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
                const double t = static_cast<double>(j - i + 1);
                term += t * (t - 1) / 2.0;
                i = j + 1;
            }
            return term;
        };
        tx = tie_term(x);
        ty = tie_term(y);
    }
    const double denom = std::sqrt((n0 - tx) * (n0 - ty));
    if (denom == 0.0) throw ValidationError("degenerate rank vectors for kendall tau");
    return (static_cast<double>(concordant) - static_cast<double>(discordant)) / denom;
}

double krippendorff_alpha(const ReliabilityMatrix& matrix) {
    if (matrix.raters() < 2) throw ValidationError("need at least 2 raters");
    const std::size_t items = matrix.items();

    // Distinct values sorted ascending define the categories.
    std::vector<double> values;
    for (const auto& row : matrix.ratings)
        for (const auto& cell : row)
            if (cell) values.push_back(*cell);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const std::size_t ncat = values.size();
    if (ncat == 0) throw ValidationError("reliability matrix has no ratings");
    auto category_of = [&](double v) {
        return static_cast<std::size_t>(
            std::lower_bound(values.begin(), values.end(), v) - values.begin());
    };

    // Coincidence matrix over pairable units (items with >= 2 ratings).
    std::vector<std::vector<double>> coincidence(ncat, std::vector<double>(ncat, 0.0));
    double n_pairable = 0.0;
    for (std::size_t item = 0; item < items; ++item) {
        std::vector<std::size_t> cats;
        for (const auto& row : matrix.ratings)
            if (row[item]) cats.push_back(category_of(*row[item]));
        const double mu = static_cast<double>(cats.size());
        if (mu < 2) continue;
        n_pairable += mu;
        for (std::size_t a = 0; a < cats.size(); ++a)
            for (std::size_t b = 0; b < cats.size(); ++b)
                if (a != b) coincidence[cats[a]][cats[b]] += 1.0 / (mu - 1.0);
    }
    if (n_pairable < 2.0) throw ValidationError("fewer than 2 pairable ratings");

    std::vector<double> margin(ncat, 0.0);
    for (std::size_t c = 0; c < ncat; ++c)
        margin[c] = std::accumulate(coincidence[c].begin(), coincidence[c].end(), 0.0);
    const double n = std::accumulate(margin.begin(), margin.end(), 0.0);

    auto delta_sq = [&](std::size_t c, std::size_t k) -> double {
        if (c == k) return 0.0;
        switch (matrix.metric) {
            case AgreementMetric::nominal:
                return 1.0;
            case AgreementMetric::interval: {
                const double d = values[c] - values[k];
                return d * d;
            }
            case AgreementMetric::ordinal: {
                const std::size_t lo = std::min(c, k), hi = std::max(c, k);
                double cum = 0.0;
                for (std::size_t g = lo; g <= hi; ++g) cum += margin[g];
                cum -= (margin[lo] + margin[hi]) / 2.0;
                return cum * cum;
            }
        }
        return 0.0;
    };

    double d_observed = 0.0;
    double d_expected = 0.0;
    for (std::size_t c = 0; c < ncat; ++c) {
        for (std::size_t k = 0; k < ncat; ++k) {
            const double d2 = delta_sq(c, k);
            d_observed += coincidence[c][k] * d2;
            d_expected += margin[c] * margin[k] * d2;
        }
    }
    d_observed /= n;
    d_expected /= n * (n - 1.0);

    if (d_expected == 0.0) {
        if (d_observed == 0.0) return 1.0;  // complete agreement on one category
        throw ValidationError("zero expected disagreement with observed disagreement");
    }
    return 1.0 - d_observed / d_expected;
}

CorrelationSummary correlate_sets(const std::vector<RankingSet>& sets,
                                  const std::map<std::string, double>& system_scores) {
    CorrelationSummary summary;
    double rho_total = 0.0;
    std::vector<double> pooled_system, pooled_human;

    for (const auto& set : sets) {
        if (set.rankings.empty())
            throw ValidationError("set '" + set.set_id + "' has no rankings");
        std::vector<double> scores;
        scores.reserve(set.candidate_ids.size());
        for (const auto& id : set.candidate_ids) {
            auto it = system_scores.find(id);
            if (it == system_scores.end())
                throw ValidationError("no system score for candidate '" + id + "' in set '" +
                                      set.set_id + "'");
            scores.push_back(it->second);
        }
        const auto system_ranks = rank_from_scores(scores);

        // Consensus = average of annotator rank vectors, re-ranked. Lower
        // average rank means stronger, so rank the negated averages.
        std::vector<double> avg(set.candidate_ids.size(), 0.0);
        for (const auto& ranking : set.rankings)
            for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += ranking.ranks[i];
        for (auto& v : avg) v = -v / static_cast<double>(set.rankings.size());
        const auto consensus_ranks = rank_from_scores(avg);

        for (std::size_t i = 0; i < system_ranks.size(); ++i) {
            pooled_system.push_back(system_ranks[i]);
            pooled_human.push_back(consensus_ranks[i]);
        }
        try {
            rho_total += spearman(system_ranks, consensus_ranks);
            ++summary.sets_used;
        } catch (const ValidationError&) {
            ++summary.sets_skipped;
        }
    }
    if (summary.sets_used > 0)
        summary.mean_rho_percent = 100.0 * rho_total / static_cast<double>(summary.sets_used);
    if (pooled_system.size() >= 2) {
        try {
            summary.pooled_rho_percent = 100.0 * spearman(pooled_system, pooled_human);
        } catch (const ValidationError&) {
            summary.pooled_rho_percent = 0.0;
        }
    }
    return summary;
}

}  // namespace psst
