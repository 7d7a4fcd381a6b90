#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psst/corpus.hpp"
#include "psst/gateway.hpp"

namespace psst {

enum class PromptKind { concise, enhanced, paraphrase };

std::string to_string(PromptKind k);
PromptKind prompt_kind_from_string(const std::string& s);

/// One transfer instruction. The template contains exactly one {source_text}
/// slot; (kind, index) identifies the prompt within a suite. Templates may
/// carry additional {name} variables for extra transfer conditions (speaker
/// persona, audience); none are used by the shipped suites.
struct PromptSpec {
    PromptKind kind = PromptKind::concise;
    int index = 1;
    std::string template_text;
    std::string version;

    std::string fill(const std::string& source_text,
                     const std::map<std::string, std::string>& extra_vars = {}) const;
};

/// Parses one prompt resource file: front-matter lines `kind:`, `index:`,
/// `version:` up to a `---` line, then the template body.
PromptSpec load_prompt_file(const std::filesystem::path& path);

/// All prompts of one kind from a directory ({kind}_{index}.txt), ordered by
/// index. Throws if the suite is empty or (kind, index) collides.
std::vector<PromptSpec> load_prompt_suite(const std::filesystem::path& dir, PromptKind kind);

void validate_suite(const std::vector<PromptSpec>& suite);

/// Applies one stylization prompt to a source document. The returned
/// document has role transferred, origin generated, parent_id set, and
/// provenance recording model, prompt identity, and cache key.
Document run_psst(const Document& doc, const PromptSpec& prompt, Gateway& gateway);

/// Paraphrase baseline; same contract with role paraphrase.
Document run_paraphrase(const Document& doc, Gateway& gateway,
                        const std::optional<PromptSpec>& prompt = std::nullopt);

struct TransferFailure {
    std::size_t position;  // index into the (doc-major, prompt-minor) product
    std::string source_id;
    PromptKind kind = PromptKind::concise;
    int prompt_index = 1;
    std::string error;
};

struct SuiteResult {
    std::vector<Document> documents;  // successes, product order preserved
    std::vector<TransferFailure> failures;
};

/// Cartesian product corpus x suite through chat_batch; output order is
/// (document order, prompt order); per-item failures never abort the run.
SuiteResult run_suite(const std::vector<Document>& corpus,
                      const std::vector<PromptSpec>& suite, Gateway& gateway);

/// The built-in paraphrase prompt (the stylization suites ship as resource
/// files; the paraphrase instruction is authored here).
const PromptSpec& default_paraphrase_prompt();

}  // namespace psst
