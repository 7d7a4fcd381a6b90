#include "psst/report.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "psst/errors.hpp"

namespace psst {

using json = nlohmann::json;

namespace {
constexpr const char* kStyleSchema = "stylereport-v1";
constexpr const char* kSemanticSchema = "semreport-v1";

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}
}  // namespace

std::string render_label(const Document& doc) {
    switch (doc.role) {
        case Role::source: return "src_text";
        case Role::target_style: return to_string(doc.origin) + "_text";
        case Role::paraphrase: return "paraphrase";
        case Role::transferred: {
            const auto model = doc.provenance.find("model");
            const auto kind = doc.provenance.find("prompt_kind");
            std::string label = model != doc.provenance.end() ? model->second : "unknown";
            label += "/";
            label += kind != doc.provenance.end() ? kind->second : "unknown";
            return label;
        }
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Report row round-trips
// ---------------------------------------------------------------------------

void write_style_reports(const std::vector<StyleReportRow>& rows,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write style reports: " + path.string());
    for (const auto& row : rows) {
        json dims = json::object();
        for (const auto& [dim, scores] : row.report.dimensions) {
            dims[to_string(dim)] = {{"text_score", scores.text_score},
                                    {"text_score_scaled", scores.text_score_scaled},
                                    {"distribution", scores.distribution},
                                    {"distribution_scaled", scores.distribution_scaled}};
        }
        json rec{{"schema", kStyleSchema},
                 {"document_id", row.report.document_id},
                 {"label", row.label},
                 {"k", row.report.k},
                 {"backend", row.backend},
                 {"backend_version", row.backend_version},
                 {"dimensions", std::move(dims)}};
        out << rec.dump() << "\n";
    }
}

std::vector<StyleReportRow> load_style_reports(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open style reports: " + path.string());
    std::vector<StyleReportRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json rec = json::parse(line);
            StyleReportRow row;
            row.label = rec.at("label").get<std::string>();
            row.backend = rec.value("backend", "");
            row.backend_version = rec.value("backend_version", "");
            row.report.document_id = rec.at("document_id").get<std::string>();
            row.report.k = rec.at("k").get<int>();
            for (const auto& [name, scores] : rec.at("dimensions").items()) {
                DimensionScores ds;
                ds.text_score = scores.at("text_score").get<double>();
                ds.text_score_scaled = scores.at("text_score_scaled").get<double>();
                ds.distribution = scores.at("distribution").get<std::vector<double>>();
                ds.distribution_scaled =
                    scores.at("distribution_scaled").get<std::vector<double>>();
                row.report.dimensions.emplace(dimension_from_string(name), std::move(ds));
            }
            rows.push_back(std::move(row));
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed style report: " + e.what());
        }
    }
    return rows;
}

void write_semantic_reports(const std::vector<SemanticReportRow>& rows,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write semantic reports: " + path.string());
    for (const auto& row : rows) {
        json rec{{"schema", kSemanticSchema},
                 {"document_id", row.report.document_id},
                 {"label", row.label},
                 {"qa_prompt_version", row.qa_prompt_version},
                 {"key_information", row.report.key_information_accuracy},
                 {"logical_structure", row.report.logical_structure_accuracy},
                 {"average", row.report.average_accuracy},
                 {"key_information_asked", row.report.key_information_asked},
                 {"logical_structure_asked", row.report.logical_structure_asked},
                 {"unparsed", row.report.unparsed_replies}};
        out << rec.dump() << "\n";
    }
}

std::vector<SemanticReportRow> load_semantic_reports(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open semantic reports: " + path.string());
    std::vector<SemanticReportRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json rec = json::parse(line);
            SemanticReportRow row;
            row.label = rec.at("label").get<std::string>();
            row.qa_prompt_version = rec.value("qa_prompt_version", "");
            row.report.document_id = rec.at("document_id").get<std::string>();
            row.report.key_information_accuracy = rec.at("key_information").get<double>();
            row.report.logical_structure_accuracy = rec.at("logical_structure").get<double>();
            row.report.average_accuracy = rec.at("average").get<double>();
            row.report.key_information_asked = rec.value("key_information_asked", 0);
            row.report.logical_structure_asked = rec.value("logical_structure_asked", 0);
            row.report.unparsed_replies = rec.value("unparsed", 0);
            rows.push_back(std::move(row));
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed semantic report: " + e.what());
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

struct StyleAggregate {
    // dimension -> accumulated scaled text scores / distributions
    std::map<StyleDimension, std::vector<double>> text_scaled;
    std::map<StyleDimension, std::vector<std::vector<double>>> dist_scaled;
};

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double v : xs) s += v;
    return s / static_cast<double>(xs.size());
}

}  // namespace

ReportBundle render_report(const std::vector<StyleReportRow>& style_rows,
                           const std::vector<SemanticReportRow>& semantic_rows,
                           const std::string& config_hash) {
    if (style_rows.empty() && semantic_rows.empty()) throw ValidationError("no reports");

    int k = 0;
    for (const auto& row : style_rows) {
        if (k == 0) k = row.report.k;
        if (row.report.k != k)
            throw ValidationError("mixed K across style reports: " + std::to_string(k) +
                                  " vs " + std::to_string(row.report.k) + " (document '" +
                                  row.report.document_id + "')");
    }

    std::map<std::string, StyleAggregate> by_label;
    for (const auto& row : style_rows) {
        auto& agg = by_label[row.label];
        for (const auto& [dim, scores] : row.report.dimensions) {
            agg.text_scaled[dim].push_back(scores.text_score_scaled);
            agg.dist_scaled[dim].push_back(scores.distribution_scaled);
        }
    }

    struct QAAggregate {
        std::vector<double> ki, ls, avg;
        int unparsed = 0;
    };
    std::map<std::string, QAAggregate> qa_by_label;
    for (const auto& row : semantic_rows) {
        auto& agg = qa_by_label[row.label];
        agg.ki.push_back(row.report.key_information_accuracy);
        agg.ls.push_back(row.report.logical_structure_accuracy);
        agg.avg.push_back(row.report.average_accuracy);
        agg.unparsed += row.report.unparsed_replies;
    }

    // Versions seen across the inputs, for the provenance chain.
    std::set<std::string> versions;
    for (const auto& row : style_rows)
        if (!row.backend.empty())
            versions.insert(row.backend + ":" + row.backend_version);
    for (const auto& row : semantic_rows)
        if (!row.qa_prompt_version.empty()) versions.insert("qa:" + row.qa_prompt_version);

    std::string stamp = "# config_hash=" + config_hash + " versions=";
    bool first_version = true;
    for (const auto& v : versions) {
        if (!first_version) stamp += ';';
        stamp += v;
        first_version = false;
    }
    stamp += "\n";

    ReportBundle bundle;

    bundle.radar_csv = stamp + "label,dimension,score\n";
    for (const auto& [label, agg] : by_label) {
        for (StyleDimension dim : all_dimensions()) {
            auto it = agg.text_scaled.find(dim);
            if (it == agg.text_scaled.end()) continue;
            bundle.radar_csv += label + "," + to_string(dim) + "," + fmt2(mean_of(it->second)) + "\n";
        }
    }

    bundle.distribution_csv = stamp + "label,dimension,k,score\n";
    for (const auto& [label, agg] : by_label) {
        for (StyleDimension dim : all_dimensions()) {
            auto it = agg.dist_scaled.find(dim);
            if (it == agg.dist_scaled.end()) continue;
            for (int pos = 0; pos < k; ++pos) {
                double s = 0.0;
                for (const auto& d : it->second) s += d[static_cast<std::size_t>(pos)];
                s /= static_cast<double>(it->second.size());
                bundle.distribution_csv += label + "," + to_string(dim) + "," +
                                           std::to_string(pos + 1) + "," + fmt2(s) + "\n";
            }
        }
    }

    bundle.qa_csv = stamp + "label,key_information,logical_structure,average\n";
    for (const auto& [label, agg] : qa_by_label) {
        bundle.qa_csv += label + "," + fmt2(100.0 * mean_of(agg.ki)) + "," +
                         fmt2(100.0 * mean_of(agg.ls)) + "," + fmt2(100.0 * mean_of(agg.avg)) +
                         "\n";
    }

    json summary;
    summary["config_hash"] = config_hash;
    summary["k"] = k;
    summary["versions"] = versions;
    json style_json = json::object();
    for (const auto& row : style_rows) {
        json dims = json::object();
        for (const auto& [dim, scores] : row.report.dimensions) {
            dims[to_string(dim)] = {{"text_score", scores.text_score},
                                    {"text_score_scaled", scores.text_score_scaled},
                                    {"distribution", scores.distribution},
                                    {"distribution_scaled", scores.distribution_scaled}};
        }
        style_json[row.label][row.report.document_id] = std::move(dims);
    }
    summary["style"] = std::move(style_json);
    json sem_json = json::object();
    for (const auto& row : semantic_rows) {
        sem_json[row.label][row.report.document_id] = {
            {"key_information", row.report.key_information_accuracy},
            {"logical_structure", row.report.logical_structure_accuracy},
            {"average", row.report.average_accuracy},
            {"unparsed", row.report.unparsed_replies}};
    }
    summary["semantic"] = std::move(sem_json);
    bundle.summary_json = summary.dump(2) + "\n";

    std::string md = "# Evaluation summary\n\nconfig: `" + config_hash + "`\n\nversions:";
    for (const auto& v : versions) md += " `" + v + "`";
    md += "\n";
    if (!by_label.empty()) {
        md += "\n## Style strength (scaled 20-100)\n\n|label|";
        for (StyleDimension dim : all_dimensions()) md += to_string(dim) + "|";
        md += "\n|---|";
        for (std::size_t i = 0; i < all_dimensions().size(); ++i) md += "---|";
        md += "\n";
        for (const auto& [label, agg] : by_label) {
            md += "|" + label + "|";
            for (StyleDimension dim : all_dimensions()) {
                auto it = agg.text_scaled.find(dim);
                md += (it == agg.text_scaled.end() ? std::string("-")
                                                   : fmt2(mean_of(it->second))) + "|";
            }
            md += "\n";
        }
    }
    if (!qa_by_label.empty()) {
        md += "\n## Semantic preservation (QA accuracy, %)\n\n"
              "|label|key information|logical structure|average|\n|---|---|---|---|\n";
        for (const auto& [label, agg] : qa_by_label) {
            md += "|" + label + "|" + fmt2(100.0 * mean_of(agg.ki)) + "|" +
                  fmt2(100.0 * mean_of(agg.ls)) + "|" + fmt2(100.0 * mean_of(agg.avg)) + "|\n";
        }
    }
    bundle.summary_md = md;
    return bundle;
}

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out) throw IoError("cannot write " + (out_dir / name).string());
        out << content;
    };
    write("summary.json", bundle.summary_json);
    write("radar.csv", bundle.radar_csv);
    write("distribution.csv", bundle.distribution_csv);
    write("qa.csv", bundle.qa_csv);
    write("summary.md", bundle.summary_md);
}

}  // namespace psst
