#include "psst/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <json.hpp>

#include "psst/errors.hpp"

namespace psst {

using json = nlohmann::json;

namespace {
constexpr const char* kQaPromptVersion = "qa-prompt-1";
constexpr const char* kItemSchema = "qaitem-v1";
constexpr const char* kResultSchema = "qaresult-v1";
}  // namespace

const char* qa_prompt_version() { return kQaPromptVersion; }

std::string to_string(QACategory c) {
    return c == QACategory::key_information ? "key_information" : "logical_structure";
}

QACategory qa_category_from_string(const std::string& s) {
    if (s == "key_information") return QACategory::key_information;
    if (s == "logical_structure") return QACategory::logical_structure;
    throw ValidationError("unknown QA category: " + s);
}

std::optional<int> parse_choice(const std::string& reply) {
    const std::size_t n = reply.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = reply[i];
        const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (upper < 'A' || upper > 'D') continue;
        const bool left_ok =
            i == 0 || std::isspace(static_cast<unsigned char>(reply[i - 1])) ||
            reply[i - 1] == '(' || reply[i - 1] == '"' || reply[i - 1] == '\'';
        if (!left_ok) continue;
        const bool right_ok =
            i + 1 == n || std::isspace(static_cast<unsigned char>(reply[i + 1])) ||
            reply[i + 1] == ')' || reply[i + 1] == '.' || reply[i + 1] == ':';
        if (!right_ok) continue;
        return upper - 'A';
    }
    return std::nullopt;
}

namespace {

// Models often wrap JSON in markdown fences; tolerate that one decoration.
std::string strip_code_fence(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return s;
    if (s.compare(b, 3, "```") != 0) return s;
    b = s.find('\n', b);
    if (b == std::string::npos) return s;
    ++b;
    const std::size_t e = s.rfind("```");
    if (e == std::string::npos || e <= b) return s;
    return s.substr(b, e - b);
}

const char* category_guidance(QACategory category) {
    switch (category) {
        case QACategory::key_information:
            return "essential information, facts, and details stated in the passage. "
                   "Each question must be answerable directly from the passage without "
                   "outside knowledge or extra reasoning, and the set should mix "
                   "question types (what, who, when, where, how)";
        case QACategory::logical_structure:
            return "the emotions, logical relationships, and role relationships "
                   "carried by the passage, such as who is speaking to whom, what "
                   "attitude is expressed, and how one point follows from another";
    }
    return "";
}

ChatRequest questionnaire_request(const Document& source, QACategory category) {
    ChatRequest req;
    req.messages.push_back(
        {"system",
         "You write multiple-choice reading-comprehension questionnaires. Output "
         "strict JSON only, no prose, matching the schema in the user message. "
         "[" + std::string(kQaPromptVersion) + "]"});
    req.messages.push_back(
        {"user",
         "Write exactly " + std::to_string(kQuestionsPerCategory) +
             " multiple-choice questions about " + category_guidance(category) +
             ".\nEach question has exactly " + std::to_string(kOptionsPerQuestion) +
             " distinct options and one correct option.\nReturn JSON of the form "
             "{\"items\":[{\"question\":\"...\",\"options\":[\"...\",\"...\",\"...\","
             "\"...\"],\"answer_index\":0}]} with answer_index in 0..3.\n\nPassage:\n" +
             source.text});
    return req;
}

std::vector<QAItem> parse_questionnaire_reply(const std::string& reply,
                                              const Document& source, QACategory category) {
    json j;
    try {
        j = json::parse(strip_code_fence(reply));
    } catch (const json::exception& e) {
        throw ReplyParseError(std::string("questionnaire reply is not JSON: ") + e.what(),
                              reply);
    }
    if (!j.is_object() || !j.contains("items") || !j.at("items").is_array())
        throw ReplyParseError("questionnaire reply lacks an items array", reply);
    const auto& arr = j.at("items");
    if (arr.size() != kQuestionsPerCategory)
        throw ReplyParseError("expected " + std::to_string(kQuestionsPerCategory) + ", got " +
                                  std::to_string(arr.size()),
                              reply);
    std::vector<QAItem> items;
    const std::string prefix =
        category == QACategory::key_information ? ":ki:" : ":ls:";
    for (std::size_t idx = 0; idx < arr.size(); ++idx) {
        const auto& rec = arr[idx];
        QAItem item;
        item.id = source.id + prefix + std::to_string(idx + 1);
        item.source_document_id = source.id;
        item.category = category;
        try {
            item.question = rec.at("question").get<std::string>();
            const auto& opts = rec.at("options");
            if (!opts.is_array() || opts.size() != kOptionsPerQuestion)
                throw ReplyParseError("item " + std::to_string(idx + 1) +
                                          " does not have exactly 4 options",
                                      reply);
            for (int o = 0; o < kOptionsPerQuestion; ++o)
                item.options[o] = opts.at(o).get<std::string>();
            item.answer_index = rec.at("answer_index").get<int>();
        } catch (const json::exception& e) {
            throw ReplyParseError("item " + std::to_string(idx + 1) + " malformed: " +
                                      e.what(),
                                  reply);
        }
        if (item.question.empty())
            throw ReplyParseError("item " + std::to_string(idx + 1) + " has an empty question",
                                  reply);
        std::set<std::string> distinct(item.options.begin(), item.options.end());
        if (distinct.size() != item.options.size())
            throw ReplyParseError("item " + std::to_string(idx + 1) + " has duplicate options",
                                  reply);
        if (item.answer_index < 0 || item.answer_index >= kOptionsPerQuestion)
            throw ReplyParseError("item " + std::to_string(idx + 1) +
                                      " answer_index out of range",
                                  reply);
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace

std::vector<QAItem> generate_questionnaire(const Document& source, QACategory category,
                                           Gateway& gateway, int retries) {
    if (source.role != Role::source)
        throw ValidationError("questionnaires are generated from source documents; '" +
                              source.id + "' has role " + to_string(source.role));
    ChatRequest request = questionnaire_request(source, category);
    ChatResponse response = gateway.chat(request);
    for (int attempt = 0;; ++attempt) {
        try {
            return parse_questionnaire_reply(response.content, source, category);
        } catch (const ReplyParseError& e) {
            if (attempt >= retries) throw;
            request.messages.push_back({"assistant", response.content});
            request.messages.push_back(
                {"user", std::string("That reply was invalid (") + e.what() +
                             "). Return only the JSON object in the requested schema."});
            response = gateway.chat(request);
        }
    }
}

namespace {

ChatRequest answer_request(const Document& text, const QAItem& item) {
    std::string user = "Passage:\n" + text.text + "\n\nQuestion: " + item.question + "\n";
    for (int o = 0; o < kOptionsPerQuestion; ++o) {
        user += static_cast<char>('A' + o);
        user += ". " + item.options[o] + "\n";
    }
    user += "\nAnswer with a single letter.";
    ChatRequest req;
    req.messages.push_back(
        {"system",
         "You answer multiple-choice questions about a passage. Reply with a single "
         "letter: A, B, C, or D. [" + std::string(kQaPromptVersion) + "]"});
    req.messages.push_back({"user", std::move(user)});
    return req;
}

QAResult grade(const QAItem& item, const std::string& evaluated_id, const std::string& reply) {
    QAResult result;
    result.item_id = item.id;
    result.evaluated_document_id = evaluated_id;
    result.raw_reply = reply;
    result.model_answer_index = parse_choice(reply);
    result.correct = result.model_answer_index.has_value() &&
                     *result.model_answer_index == item.answer_index;
    return result;
}

}  // namespace

QAResult answer_question(const Document& text, const QAItem& item, Gateway& gateway) {
    const ChatResponse response = gateway.chat(answer_request(text, item));
    return grade(item, text.id, response.content);
}

SemanticReport aggregate_results(const std::string& evaluated_document_id,
                                 const std::vector<QAItem>& items,
                                 const std::vector<QAResult>& results) {
    if (items.size() != results.size())
        throw ValidationError("items/results size mismatch for document '" +
                              evaluated_document_id + "'");
    SemanticReport report;
    report.document_id = evaluated_document_id;
    int ki_correct = 0, ls_correct = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const bool ki = items[i].category == QACategory::key_information;
        (ki ? report.key_information_asked : report.logical_structure_asked) += 1;
        if (results[i].correct) (ki ? ki_correct : ls_correct) += 1;
        if (!results[i].model_answer_index) ++report.unparsed_replies;
    }
    report.key_information_accuracy =
        report.key_information_asked == 0
            ? 0.0
            : static_cast<double>(ki_correct) / report.key_information_asked;
    report.logical_structure_accuracy =
        report.logical_structure_asked == 0
            ? 0.0
            : static_cast<double>(ls_correct) / report.logical_structure_asked;
    report.average_accuracy =
        (report.key_information_accuracy + report.logical_structure_accuracy) / 2.0;
    return report;
}

SemanticReport semantic_report(const Document& source, const Document& evaluated,
                               const std::vector<QAItem>& items, Gateway& gateway) {
    if (items.empty()) throw ValidationError("no questionnaire items supplied");
    for (const auto& item : items) {
        if (item.source_document_id != source.id)
            throw ValidationError("item '" + item.id + "' was not generated from source '" +
                                  source.id + "'");
    }
    const bool is_baseline = evaluated.id == source.id;
    const bool is_derived = evaluated.parent_id && *evaluated.parent_id == source.id;
    if (!is_baseline && !is_derived)
        throw ValidationError("document '" + evaluated.id + "' does not derive from source '" +
                              source.id + "'");

    std::vector<ChatRequest> requests;
    requests.reserve(items.size());
    for (const auto& item : items) requests.push_back(answer_request(evaluated, item));
    const auto outcomes = gateway.chat_batch(requests);

    std::vector<QAItem> asked_items;
    std::vector<QAResult> results;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!outcomes[i].ok()) continue;  // missing item, excluded from asked counts
        asked_items.push_back(items[i]);
        results.push_back(grade(items[i], evaluated.id, outcomes[i].response->content));
    }
    if (results.empty())
        throw GatewayError("all QA calls failed for document '" + evaluated.id + "'");
    return aggregate_results(evaluated.id, asked_items, results);
}

// ---------------------------------------------------------------------------
// File round-trips
// ---------------------------------------------------------------------------

void write_questionnaire(const std::vector<QAItem>& items, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write questionnaire: " + path.string());
    for (const auto& item : items) {
        json rec{{"schema", kItemSchema},
                 {"id", item.id},
                 {"source_document_id", item.source_document_id},
                 {"category", to_string(item.category)},
                 {"question", item.question},
                 {"options", item.options},
                 {"answer_index", item.answer_index}};
        out << rec.dump() << "\n";
    }
}

std::vector<QAItem> load_questionnaire(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open questionnaire: " + path.string());
    std::vector<QAItem> items;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json rec = json::parse(line);
            QAItem item;
            item.id = rec.at("id").get<std::string>();
            item.source_document_id = rec.at("source_document_id").get<std::string>();
            item.category = qa_category_from_string(rec.at("category").get<std::string>());
            item.question = rec.at("question").get<std::string>();
            const auto& opts = rec.at("options");
            if (opts.size() != kOptionsPerQuestion)
                throw ValidationError("expected 4 options");
            for (int o = 0; o < kOptionsPerQuestion; ++o)
                item.options[o] = opts.at(o).get<std::string>();
            item.answer_index = rec.at("answer_index").get<int>();
            if (item.answer_index < 0 || item.answer_index >= kOptionsPerQuestion)
                throw ValidationError("answer_index out of range");
            items.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed QA item: " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    return items;
}

void write_qa_results(const std::vector<QAResult>& results, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write QA results: " + path.string());
    for (const auto& r : results) {
        json rec{{"schema", kResultSchema},
                 {"item_id", r.item_id},
                 {"evaluated_document_id", r.evaluated_document_id},
                 {"model_answer_index",
                  r.model_answer_index ? json(*r.model_answer_index) : json(nullptr)},
                 {"correct", r.correct},
                 {"raw_reply", r.raw_reply}};
        out << rec.dump() << "\n";
    }
}

std::vector<QAResult> load_qa_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open QA results: " + path.string());
    std::vector<QAResult> results;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json rec = json::parse(line);
            QAResult r;
            r.item_id = rec.at("item_id").get<std::string>();
            r.evaluated_document_id = rec.at("evaluated_document_id").get<std::string>();
            if (!rec.at("model_answer_index").is_null())
                r.model_answer_index = rec.at("model_answer_index").get<int>();
            r.correct = rec.at("correct").get<bool>();
            r.raw_reply = rec.value("raw_reply", "");
            results.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed QA result: " + e.what());
        }
    }
    return results;
}

}  // namespace psst
