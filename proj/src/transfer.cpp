#include "psst/transfer.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "psst/errors.hpp"

namespace psst {

namespace {
constexpr const char* kSlot = "{source_text}";
}

std::string to_string(PromptKind k) {
    switch (k) {
        case PromptKind::concise: return "concise";
        case PromptKind::enhanced: return "enhanced";
        case PromptKind::paraphrase: return "paraphrase";
    }
    return "concise";
}

PromptKind prompt_kind_from_string(const std::string& s) {
    if (s == "concise") return PromptKind::concise;
    if (s == "enhanced") return PromptKind::enhanced;
    if (s == "paraphrase") return PromptKind::paraphrase;
    throw ValidationError("unknown prompt kind: " + s);
}

std::string PromptSpec::fill(const std::string& source_text,
                             const std::map<std::string, std::string>& extra_vars) const {
    const auto pos = template_text.find(kSlot);
    if (pos == std::string::npos)
        throw ValidationError("prompt " + to_string(kind) + "#" + std::to_string(index) +
                              " has no {source_text} slot");
    std::string filled = template_text;
    filled.replace(pos, std::string(kSlot).size(), source_text);
    for (const auto& [name, value] : extra_vars) {
        const std::string slot = "{" + name + "}";
        std::size_t at = 0;
        while ((at = filled.find(slot, at)) != std::string::npos) {
            filled.replace(at, slot.size(), value);
            at += value.size();
        }
    }
    return filled;
}

namespace {

int slot_count(const std::string& tpl) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = tpl.find(kSlot, pos)) != std::string::npos) {
        ++count;
        pos += std::string(kSlot).size();
    }
    return count;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

PromptSpec load_prompt_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open prompt file: " + path.string());
    PromptSpec spec;
    bool saw_kind = false, saw_index = false, saw_version = false, saw_separator = false;
    std::string line;
    std::string body;
    while (std::getline(in, line)) {
        if (!saw_separator) {
            const std::string t = trim(line);
            if (t == "---") {
                saw_separator = true;
                continue;
            }
            const auto colon = t.find(':');
            if (colon == std::string::npos)
                throw ValidationError(path.string() + ": bad front-matter line '" + t + "'");
            const std::string key = trim(t.substr(0, colon));
            const std::string value = trim(t.substr(colon + 1));
            if (key == "kind") {
                spec.kind = prompt_kind_from_string(value);
                saw_kind = true;
            } else if (key == "index") {
                spec.index = std::stoi(value);
                saw_index = true;
            } else if (key == "version") {
                spec.version = value;
                saw_version = true;
            } else {
                throw ValidationError(path.string() + ": unknown front-matter key '" + key + "'");
            }
        } else {
            body += line;
            body += '\n';
        }
    }
    if (!saw_separator || !saw_kind || !saw_index || !saw_version)
        throw ValidationError(path.string() +
                              ": prompt file needs kind/index/version front-matter and ---");
    spec.template_text = trim(body);
    if (slot_count(spec.template_text) != 1)
        throw ValidationError(path.string() + ": template must contain exactly one " + kSlot +
                              " slot");
    return spec;
}

std::vector<PromptSpec> load_prompt_suite(const std::filesystem::path& dir, PromptKind kind) {
    std::vector<PromptSpec> suite;
    for (int index = 1;; ++index) {
        const auto path = dir / (to_string(kind) + "_" + std::to_string(index) + ".txt");
        if (!std::filesystem::exists(path)) break;
        PromptSpec spec = load_prompt_file(path);
        if (spec.kind != kind || spec.index != index)
            throw ValidationError(path.string() + ": front-matter (" + to_string(spec.kind) +
                                  ", " + std::to_string(spec.index) +
                                  ") disagrees with the file name");
        suite.push_back(std::move(spec));
    }
    if (suite.empty())
        throw ValidationError("no " + to_string(kind) + " prompts under " + dir.string());
    validate_suite(suite);
    return suite;
}

void validate_suite(const std::vector<PromptSpec>& suite) {
    std::set<std::pair<PromptKind, int>> seen;
    for (const auto& p : suite) {
        if (slot_count(p.template_text) != 1)
            throw ValidationError("prompt " + to_string(p.kind) + "#" + std::to_string(p.index) +
                                  " must contain exactly one " + kSlot + " slot");
        if (!seen.insert({p.kind, p.index}).second)
            throw ValidationError("duplicate prompt (" + to_string(p.kind) + ", " +
                                  std::to_string(p.index) + ") in suite");
    }
}

namespace {

ChatRequest transfer_request(const Document& doc, const PromptSpec& prompt) {
    ChatRequest req;
    req.messages.push_back({"user", prompt.fill(doc.text)});
    return req;
}

Document make_derived(const Document& doc, const PromptSpec& prompt, Role role,
                      const std::string& model, const std::string& key,
                      const std::string& content) {
    if (trim(content).empty())
        throw ValidationError("empty transfer output for document '" + doc.id + "' (" +
                              to_string(prompt.kind) + "#" + std::to_string(prompt.index) + ")");
    Document out;
    out.id = doc.id + "::" + to_string(prompt.kind) + std::to_string(prompt.index) + "::" + model;
    out.text = content;
    out.origin = Origin::generated;
    out.role = role;
    out.parent_id = doc.id;
    out.provenance["model"] = model;
    out.provenance["prompt_kind"] = to_string(prompt.kind);
    out.provenance["prompt_index"] = std::to_string(prompt.index);
    out.provenance["prompt_version"] = prompt.version;
    out.provenance["cache_key"] = key;
    return finalize_document(std::move(out));
}

}  // namespace

const PromptSpec& default_paraphrase_prompt() {
    static const PromptSpec prompt = [] {
        PromptSpec p;
        p.kind = PromptKind::paraphrase;
        p.index = 1;
        p.version = "paraphrase-1";
        p.template_text =
            "Paraphrase the following text. Keep the meaning, the level of detail, "
            "and the overall length; change only the wording.\n\n{source_text}";
        return p;
    }();
    return prompt;
}

Document run_psst(const Document& doc, const PromptSpec& prompt, Gateway& gateway) {
    if (doc.role != Role::source)
        throw ValidationError("transfer requires a source document; '" + doc.id +
                              "' has role " + to_string(doc.role));
    if (prompt.kind != PromptKind::concise && prompt.kind != PromptKind::enhanced)
        throw ValidationError("run_psst requires a concise or enhanced prompt");
    const ChatRequest request = transfer_request(doc, prompt);
    const ChatResponse response = gateway.chat(request);
    return make_derived(doc, prompt, Role::transferred, gateway.config().model,
                        Gateway::cache_key(request, gateway.config()), response.content);
}

Document run_paraphrase(const Document& doc, Gateway& gateway,
                        const std::optional<PromptSpec>& prompt) {
    if (doc.role != Role::source)
        throw ValidationError("paraphrase requires a source document; '" + doc.id +
                              "' has role " + to_string(doc.role));
    const PromptSpec& spec = prompt ? *prompt : default_paraphrase_prompt();
    if (spec.kind != PromptKind::paraphrase)
        throw ValidationError("run_paraphrase requires a paraphrase prompt");
    const ChatRequest request = transfer_request(doc, spec);
    const ChatResponse response = gateway.chat(request);
    return make_derived(doc, spec, Role::paraphrase, gateway.config().model,
                        Gateway::cache_key(request, gateway.config()), response.content);
}

SuiteResult run_suite(const std::vector<Document>& corpus,
                      const std::vector<PromptSpec>& suite, Gateway& gateway) {
    validate_suite(suite);
    for (const auto& doc : corpus) {
        if (doc.role != Role::source)
            throw ValidationError("suite corpus must contain only sources; '" + doc.id +
                                  "' has role " + to_string(doc.role));
    }

    std::vector<ChatRequest> requests;
    requests.reserve(corpus.size() * suite.size());
    for (const auto& doc : corpus)
        for (const auto& prompt : suite) requests.push_back(transfer_request(doc, prompt));
    const auto outcomes = gateway.chat_batch(requests);

    SuiteResult result;
    std::size_t pos = 0;
    for (const auto& doc : corpus) {
        for (const auto& prompt : suite) {
            const auto& outcome = outcomes[pos];
            const Role role = prompt.kind == PromptKind::paraphrase ? Role::paraphrase
                                                                    : Role::transferred;
            if (outcome.ok()) {
                try {
                    result.documents.push_back(make_derived(
                        doc, prompt, role, gateway.config().model,
                        Gateway::cache_key(requests[pos], gateway.config()),
                        outcome.response->content));
                } catch (const std::exception& e) {
                    result.failures.push_back(
                        {pos, doc.id, prompt.kind, prompt.index, e.what()});
                }
            } else {
                result.failures.push_back(
                    {pos, doc.id, prompt.kind, prompt.index, outcome.error});
            }
            ++pos;
        }
    }
    return result;
}

}  // namespace psst
