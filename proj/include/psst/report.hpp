#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "psst/corpus.hpp"
#include "psst/semantics.hpp"
#include "psst/style_metrics.hpp"

namespace psst {

/// Display label a document's scores are grouped under: "src_text",
/// "<origin>_text" for real target-style data, "paraphrase", or
/// "<model>/<prompt kind>" for transferred documents.
std::string render_label(const Document& doc);

struct StyleReportRow {
    std::string label;
    std::string backend;
    std::string backend_version;
    StyleReport report;
};

struct SemanticReportRow {
    std::string label;
    std::string qa_prompt_version;
    SemanticReport report;
};

void write_style_reports(const std::vector<StyleReportRow>& rows,
                         const std::filesystem::path& path);
std::vector<StyleReportRow> load_style_reports(const std::filesystem::path& path);
void write_semantic_reports(const std::vector<SemanticReportRow>& rows,
                            const std::filesystem::path& path);
std::vector<SemanticReportRow> load_semantic_reports(const std::filesystem::path& path);

/// The rendered artifact set. CSV values are display-scaled (20-100 for
/// style, percent for QA accuracy); summary.json carries raw and scaled.
struct ReportBundle {
    std::string summary_json;
    std::string radar_csv;         // label,dimension,score
    std::string distribution_csv;  // label,dimension,k,score
    std::string qa_csv;            // label,key_information,logical_structure,average
    std::string summary_md;
};

/// Aggregates rows by label and renders all artifacts. Every artifact
/// embeds the config hash and the resource versions seen in the inputs
/// (CSVs as a leading # comment). Throws on an empty input set or mixed K
/// across style reports.
ReportBundle render_report(const std::vector<StyleReportRow>& style_rows,
                           const std::vector<SemanticReportRow>& semantic_rows,
                           const std::string& config_hash);

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace psst
