#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psst/corpus.hpp"
#include "psst/gateway.hpp"

namespace psst {

enum class QACategory { key_information, logical_structure };

std::string to_string(QACategory c);
QACategory qa_category_from_string(const std::string& s);

constexpr int kQuestionsPerCategory = 10;
constexpr int kOptionsPerQuestion = 4;

struct QAItem {
    std::string id;
    std::string source_document_id;
    QACategory category = QACategory::key_information;
    std::string question;
    std::array<std::string, kOptionsPerQuestion> options;
    int answer_index = 0;  // 0..3
};

struct QAResult {
    std::string item_id;
    std::string evaluated_document_id;
    std::optional<int> model_answer_index;  // nullopt = unparsed
    bool correct = false;
    std::string raw_reply;
};

struct SemanticReport {
    std::string document_id;
    double key_information_accuracy = 0.0;
    double logical_structure_accuracy = 0.0;
    double average_accuracy = 0.0;
    int key_information_asked = 0;
    int logical_structure_asked = 0;
    int unparsed_replies = 0;
};

/// First standalone A-D token of a reply (case-insensitive, optionally
/// followed by ')', '.' or ':'), or nullopt when no such token exists.
std::optional<int> parse_choice(const std::string& reply);

/// Asks the generator endpoint for exactly kQuestionsPerCategory validated
/// multiple-choice items about the source text. Malformed output is re-asked
/// up to `retries` times, then rejected with the raw reply attached.
std::vector<QAItem> generate_questionnaire(const Document& source, QACategory category,
                                           Gateway& gateway, int retries = 1);

/// Poses one item against `text`; parse failures grade as incorrect rather
/// than raising.
QAResult answer_question(const Document& text, const QAItem& item, Gateway& gateway);

/// Asks both questionnaires against the evaluated document and aggregates
/// per-category accuracies. `evaluated` must be the source itself or derive
/// from it via parent_id.
SemanticReport semantic_report(const Document& source, const Document& evaluated,
                               const std::vector<QAItem>& items, Gateway& gateway);

SemanticReport aggregate_results(const std::string& evaluated_document_id,
                                 const std::vector<QAItem>& items,
                                 const std::vector<QAResult>& results);

const char* qa_prompt_version();

void write_questionnaire(const std::vector<QAItem>& items, const std::filesystem::path& path);
std::vector<QAItem> load_questionnaire(const std::filesystem::path& path);
void write_qa_results(const std::vector<QAResult>& results, const std::filesystem::path& path);
std::vector<QAResult> load_qa_results(const std::filesystem::path& path);

}  // namespace psst
