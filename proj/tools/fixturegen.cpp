// Regenerates tests/fixtures: the fixture corpus, the replay caches, and the
// golden lexical style report. Run from the repo root:
//   ./build/tools/fixturegen tests/fixtures
// Replies come from a deterministic stub endpoint recorded through the real
// request-construction paths, so replay runs exercise the full pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psst/cli.hpp"
#include "psst/config.hpp"
#include "psst/corpus.hpp"
#include "psst/digest.hpp"
#include "psst/distill.hpp"
#include "psst/gateway.hpp"
#include "psst/report.hpp"
#include "psst/scorer.hpp"
#include "psst/semantics.hpp"
#include "psst/style_metrics.hpp"
#include "psst/transfer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace psst;

namespace {

unsigned long hash_of(const std::string& s) {
    return std::stoul(sha256_hex(s).substr(0, 8), nullptr, 16);
}

std::vector<std::string> split_sentences_naive(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        current += c;
        if (c == '.' || c == '!' || c == '?') {
            while (!current.empty() && current.front() == ' ') current.erase(current.begin());
            if (!current.empty()) out.push_back(current);
            current.clear();
        }
    }
    while (!current.empty() && current.front() == ' ') current.erase(current.begin());
    if (!current.empty()) out.push_back(current);
    return out;
}

class StubTransport : public Transport {
public:
    HttpResponse post_json(const EndpointConfig&, const std::string& body,
                           const std::string&) override {
        const json req = json::parse(body);
        std::string sys, user;
        for (const auto& m : req.at("messages")) {
            const std::string role = m.at("role").get<std::string>();
            if (role == "system" && sys.empty()) sys = m.at("content").get<std::string>();
            if (role == "user" && user.empty()) user = m.at("content").get<std::string>();
        }
        const std::string reply = make_reply(sys, user);
        json resp{{"choices",
                   json::array({{{"message", {{"role", "assistant"}, {"content", reply}}},
                                 {"finish_reason", "stop"}}})},
                  {"usage",
                   {{"prompt_tokens", static_cast<long>(user.size() / 4)},
                    {"completion_tokens", static_cast<long>(reply.size() / 4)},
                    {"total_tokens", static_cast<long>((user.size() + reply.size()) / 4)}}}};
        return {200, resp.dump()};
    }

private:
    static std::string make_reply(const std::string& sys, const std::string& user) {
        if (sys.find("[scorer-prompt-1]") != std::string::npos) return scorer_reply(user);
        if (sys.find("[distill-prompt-1]") != std::string::npos) return distill_reply(user);
        if (sys.find("[qa-prompt-1]") != std::string::npos) {
            if (user.rfind("Passage:", 0) == 0) return answer_reply(user);
            return questionnaire_reply(user);
        }
        return transfer_reply(user);
    }

    static std::string scorer_reply(const std::string& user) {
        const unsigned long h = hash_of("score:" + user);
        const double value = 1.0 + static_cast<double>(h % 41) / 10.0;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.1f", value);
        return buf;
    }

    static std::string transfer_reply(const std::string& user) {
        const auto sep = user.find("\n\n");
        const std::string source = sep == std::string::npos ? user : user.substr(sep + 2);
        const unsigned long h = hash_of("transfer:" + user);
        static const char* openers[] = {
            "Folks, let me walk you through this.",
            "Have you ever stopped to wonder about this?",
            "Picture this with me for a moment.",
            "I want to share something that honestly amazed me.",
            "So, here is the story, plain and simple.",
        };
        std::string out = openers[h % 5];
        const auto sentences = split_sentences_naive(source);
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            out += ' ';
            if (hash_of(sentences[i] + std::to_string(h)) % 3 == 0) out += "You know, ";
            out += sentences[i];
        }
        out += " Isn't that something? Thank you!";
        return out;
    }

    static std::string questionnaire_reply(const std::string& user) {
        const auto pos = user.find("Passage:\n");
        const std::string passage = pos == std::string::npos ? user : user.substr(pos + 9);
        // Distinct content words of the passage, longest-first flavor.
        std::vector<std::string> words;
        std::string tok;
        for (char c : passage + " ") {
            if (std::isalpha(static_cast<unsigned char>(c))) {
                tok += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            } else {
                if (tok.size() >= 5 &&
                    std::find(words.begin(), words.end(), tok) == words.end())
                    words.push_back(tok);
                tok.clear();
            }
        }
        json items = json::array();
        for (int q = 1; q <= 10; ++q) {
            const std::string w =
                words.empty() ? "topic" : words[(q * 7) % words.size()];
            const int answer = static_cast<int>(hash_of(passage + std::to_string(q)) % 4);
            json options = json::array();
            for (int o = 0; o < 4; ++o) {
                if (o == answer)
                    options.push_back(w);
                else
                    options.push_back("decoy-" + std::to_string(q) + static_cast<char>('a' + o));
            }
            items.push_back({{"question", "Question " + std::to_string(q) +
                                              ": which of these words appears in the passage?"},
                             {"options", options},
                             {"answer_index", answer}});
        }
        return json{{"items", items}}.dump();
    }

    static std::string answer_reply(const std::string& user) {
        const unsigned long h = hash_of("answer:" + user);
        const char letter = static_cast<char>('A' + h % 4);
        switch (h % 20) {
            case 13:
            case 14:
                return std::string("The answer is (") + letter + ").";
            case 15:
                return std::string(1, static_cast<char>(std::tolower(letter))) + ".";
            case 16:
                return std::string("Answer: ") + letter + ".";
            case 17:
                return "I am not sure.";
            default:
                return std::string(1, letter);
        }
    }

    static std::string distill_reply(const std::string& user) {
        const auto pos = user.find("Sentence: ");
        const std::string seed = pos == std::string::npos ? user : user.substr(pos + 10);

        if (seed.find("BAD_WRONG_COUNT") != std::string::npos) {
            json samples = json::array();
            for (int level = 1; level <= 4; ++level)
                samples.push_back({{"sentence", seed}, {"score", level}});
            return json{{"samples", samples}}.dump();
        }
        if (seed.find("BAD_DUP_SCORE") != std::string::npos) {
            json samples = json::array();
            const int scores[] = {1, 2, 2, 4, 5};
            for (int i = 0; i < 5; ++i)
                samples.push_back({{"sentence", seed}, {"score", scores[i]}});
            return json{{"samples", samples}}.dump();
        }
        if (seed.find("BAD_LENGTH") != std::string::npos) {
            json samples = json::array();
            for (int level = 1; level <= 5; ++level) {
                std::string sentence = seed;
                if (level == 5)
                    for (int r = 0; r < 4; ++r) sentence += " " + seed;
                samples.push_back({{"sentence", sentence}, {"score", level}});
            }
            return json{{"samples", samples}}.dump();
        }
        if (seed.find("BAD_EMPTY") != std::string::npos) {
            json samples = json::array();
            for (int level = 1; level <= 5; ++level)
                samples.push_back(
                    {{"sentence", level == 3 ? std::string() : seed}, {"score", level}});
            return json{{"samples", samples}}.dump();
        }

        static const char* tails[] = {
            "",
            " Notice this.",
            " You see this, right?",
            " Imagine that, you know?",
            " Don't you wonder why? Think!",
        };
        std::string base = seed;
        while (!base.empty() && (base.back() == '\n' || base.back() == ' ')) base.pop_back();
        json samples = json::array();
        for (int level = 1; level <= 5; ++level)
            samples.push_back({{"sentence", base + tails[level - 1]}, {"score", level}});
        return json{{"samples", samples}}.dump();
    }
};

// ---------------------------------------------------------------------------
// Fixture corpus
// ---------------------------------------------------------------------------

struct FixtureDoc {
    const char* id;
    const char* origin;
    const char* text;
};

const FixtureDoc kSources[] = {
    {"fx-001", "news",
     "The city council approved a new transit plan on Tuesday. The plan adds four bus "
     "routes and extends service hours until midnight. Officials said construction of "
     "dedicated lanes will begin in April. The project is funded by a regional grant of "
     "12 million dollars. Local businesses raised concerns about parking during "
     "construction. A public comment period remains open until the end of the month."},
    {"fx-002", "abstract",
     "This study examines how soil bacteria respond to prolonged drought. Samples were "
     "collected from forty grassland sites over three years. The analysis shows a "
     "consistent shift toward spore-forming species under water stress. Enzyme activity "
     "declined by roughly a third in the driest plots. These results suggest microbial "
     "communities adapt faster than previously assumed. The findings inform models of "
     "carbon cycling in arid ecosystems."},
    {"fx-003", "wiki",
     "The lighthouse at Point Harrow was completed in 1884. Its lamp originally burned "
     "whale oil and was converted to electricity in 1923. The tower stands 47 meters "
     "above the high-tide line. A resident keeper maintained the station until "
     "automation in 1978. The surrounding reserve protects nesting seabirds. The site "
     "was added to the national heritage register in 1995."},
    {"fx-004", "news",
     "Engineers completed testing of the new desalination plant last week. The facility "
     "can produce 50 million liters of fresh water per day. Power comes from an "
     "adjacent solar array built in 2021. Operators expect the plant to supply a fifth "
     "of the region's demand. Environmental groups monitored the brine discharge "
     "during trials. Regulators will review the results before full operation begins."},
    {"fx-005", "abstract",
     "We present a method for compressing neural translation models without retraining. "
     "The approach prunes attention heads ranked by a sensitivity score. Experiments "
     "cover three language pairs and two model sizes. Compressed models retain 98 "
     "percent of baseline quality at half the parameter count. Inference latency drops "
     "by 40 percent on commodity hardware. We release code and evaluation scripts for "
     "reproducibility."},
    {"fx-006", "wiki",
     "The Meridian Observatory houses one of the oldest working refractor telescopes. "
     "Astronomers used the instrument to catalog double stars throughout the 1900s. "
     "The dome was rebuilt after a storm damaged the original structure in 1962. "
     "Visitors can attend public viewing nights twice a month. The archive preserves "
     "glass plates dating back to 1891. Restoration of the clockwork drive finished in "
     "2014."},
};

void write_sources(const fs::path& path) {
    std::ofstream out(path);
    for (const auto& doc : kSources) {
        json rec{{"id", doc.id}, {"text", doc.text}, {"origin", doc.origin},
                 {"role", "source"}};
        out << rec.dump() << "\n";
    }
}

void write_distill_seeds(const fs::path& path) {
    static const char* subjects[] = {"committee", "ministry", "board", "agency", "council"};
    static const char* verbs[] = {"approved", "reviewed", "published", "postponed"};
    static const char* objects[] = {"the annual budget", "the audit report",
                                    "the revised schedule", "the safety guidelines"};
    static const char* times[] = {"in March", "last quarter"};
    std::ofstream out(path);
    int n = 0;
    for (const char* s : subjects)
        for (const char* v : verbs)
            for (const char* o : objects) {
                if (n >= 40) break;
                const char* t = times[n % 2];
                json rec{{"id", "seed-" + std::to_string(n + 1)},
                         {"text", std::string("The ") + s + " " + v + " " + o + " " + t + "."},
                         {"origin", "news"},
                         {"role", "source"}};
                out << rec.dump() << "\n";
                ++n;
            }
}

void write_bad_seeds(const fs::path& path) {
    static const char* markers[] = {"BAD_WRONG_COUNT", "BAD_DUP_SCORE", "BAD_LENGTH",
                                    "BAD_EMPTY"};
    std::ofstream out(path);
    for (int i = 0; i < 4; ++i) {
        json rec{{"id", "seedbad-" + std::to_string(i + 1)},
                 {"text", std::string("The office issued a statement ") + markers[i] +
                              " about the schedule."},
                 {"origin", "news"},
                 {"role", "source"}};
        out << rec.dump() << "\n";
    }
}

RunConfig fixture_config(const fs::path& fixture_dir, const fs::path& prompts_dir) {
    RunConfig config;
    apply_setting(config, "scorer_backend", "remote");
    apply_setting(config, "transfer.model", "stub-llm");
    apply_setting(config, "scorer.model", "stub-scorer");
    apply_setting(config, "qa_generator.model", "stub-qa-gen");
    apply_setting(config, "qa_model.model", "stub-qa");
    apply_setting(config, "prompts_dir", prompts_dir.string());
    apply_setting(config, "cache_file", (fixture_dir / "cache.jsonl").string());
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path fixture_dir = argc > 1 ? argv[1] : "tests/fixtures";
    const fs::path prompts_dir = argc > 2 ? argv[2] : "resources/prompts";
    fs::create_directories(fixture_dir);

    write_sources(fixture_dir / "corpus_sources.jsonl");
    write_distill_seeds(fixture_dir / "distill_seeds.jsonl");
    write_bad_seeds(fixture_dir / "distill_bad_seeds.jsonl");

    const RunConfig config = fixture_config(fixture_dir, prompts_dir);

    // Record every request the replay pipeline will make.
    fs::remove(fixture_dir / "cache.jsonl");
    const auto sources = ingest(fixture_dir / "corpus_sources.jsonl", Origin::news, Role::source);

    // 1. Transfer: sources x concise suite.
    Gateway transfer_gw(config.transfer, CacheMode::record, fixture_dir / "cache.jsonl",
                        std::make_unique<StubTransport>());
    const auto suite = load_prompt_suite(prompts_dir, PromptKind::concise);
    const SuiteResult transferred = run_suite(sources, suite, transfer_gw);
    if (!transferred.failures.empty()) {
        std::cerr << "fixture transfer failed\n";
        return 1;
    }

    std::vector<Document> all_docs = sources;
    all_docs.insert(all_docs.end(), transferred.documents.begin(),
                    transferred.documents.end());

    // 2. Style scoring of every document through the remote backend.
    Gateway scorer_gw(config.scorer, CacheMode::record, fixture_dir / "cache.jsonl",
                      std::make_unique<StubTransport>());
    RemoteScorerBackend scorer_backend(scorer_gw);
    for (const auto& doc : all_docs)
        style_report(doc, scorer_backend, all_dimensions(), kDefaultK);

    // 3. Questionnaires for every source.
    Gateway qa_gen_gw(config.qa_generator, CacheMode::record, fixture_dir / "cache.jsonl",
                      std::make_unique<StubTransport>());
    std::vector<QAItem> items;
    for (const auto& doc : sources) {
        for (QACategory category :
             {QACategory::key_information, QACategory::logical_structure}) {
            auto generated = generate_questionnaire(doc, category, qa_gen_gw);
            items.insert(items.end(), generated.begin(), generated.end());
        }
    }

    // 4. Answers for every document against its source's questionnaire.
    Gateway qa_gw(config.qa_model, CacheMode::record, fixture_dir / "cache.jsonl",
                  std::make_unique<StubTransport>());
    for (const auto& doc : all_docs) {
        const std::string source_id = doc.parent_id ? *doc.parent_id : doc.id;
        for (const auto& item : items) {
            if (item.source_document_id != source_id) continue;
            answer_question(doc, item, qa_gw);
        }
    }

    // 5. Distillation caches: valid 40-seed run plus the malformed batch.
    fs::remove(fixture_dir / "distill_cache.jsonl");
    {
        Gateway gw(config.transfer, CacheMode::record, fixture_dir / "distill_cache.jsonl",
                   std::make_unique<StubTransport>());
        const auto seeds =
            ingest(fixture_dir / "distill_seeds.jsonl", Origin::news, Role::source);
        for (const auto& seed : seeds)
            gen_listwise(seed.id, seed.text, StyleDimension::interactivity, gw);
    }
    fs::remove(fixture_dir / "distill_bad_cache.jsonl");
    {
        Gateway gw(config.transfer, CacheMode::record,
                   fixture_dir / "distill_bad_cache.jsonl",
                   std::make_unique<StubTransport>());
        const auto seeds =
            ingest(fixture_dir / "distill_bad_seeds.jsonl", Origin::news, Role::source);
        DistillOptions options;
        options.validation_retries = 0;
        for (const auto& seed : seeds) {
            try {
                gen_listwise(seed.id, seed.text, StyleDimension::interactivity, gw, options);
                std::cerr << "expected rejection for " << seed.id << "\n";
                return 1;
            } catch (const DistillRejection&) {
                // expected; the reply is now cached
            }
        }
    }

    // 6. Golden lexical style reports: the styleless first source (floor
    //    values) and a hand-written speech-like passage (graded values).
    {
        LexicalBackend lexical;
        auto golden_row = [&](const Document& doc) {
            StyleReportRow row;
            row.label = render_label(doc);
            row.backend = lexical.descriptor().name;
            row.backend_version = lexical.descriptor().version;
            row.report = style_report(doc, lexical, all_dimensions(), kDefaultK);
            return row;
        };
        Document speech;
        speech.id = "fx-speech";
        speech.text =
            "Have you ever watched a storm roll in over the ocean? Picture this: the "
            "sky turns to stone, and the waves rise like a wall. I was terrified, and "
            "honestly, it was beautiful! Folks, um, you know what surprised me most? "
            "The fishermen didn't run. They waited, calm as the harbor stone. Imagine "
            "that kind of patience. It's a lesson I carry with me, and I hope you "
            "will too. Thank you!";
        speech.origin = Origin::ted;
        speech.role = Role::target_style;
        speech = finalize_document(std::move(speech));
        write_style_reports({golden_row(sources.front()), golden_row(speech)},
                            fixture_dir / "golden_style_report.jsonl");
        write_corpus({speech}, fixture_dir / "golden_speech_doc.jsonl");
    }

    // 7. Golden radar.csv, frozen from one replay pass over the real CLI.
    {
        const fs::path dir = fs::temp_directory_path() / "psst_fixturegen_pipeline";
        fs::remove_all(dir);
        fs::create_directories(dir);
        std::vector<std::string> common = {
            "--set", "cache_mode=replay",
            "--set", "cache_file=" + (fixture_dir / "cache.jsonl").string(),
            "--set", "prompts_dir=" + prompts_dir.string(),
            "--set", "scorer_backend=remote",
            "--set", "transfer.model=stub-llm",
            "--set", "scorer.model=stub-scorer",
            "--set", "qa_generator.model=stub-qa-gen",
            "--set", "qa_model.model=stub-qa",
        };
        auto cli = [&](std::vector<std::string> args) {
            auto full = common;
            full.insert(full.end(), args.begin(), args.end());
            std::ostringstream out, err;
            if (run_cli(full, out, err) != 0) {
                std::cerr << "fixture pipeline step failed: " << err.str() << "\n";
                std::exit(1);
            }
        };
        const std::string sources = (fixture_dir / "corpus_sources.jsonl").string();
        cli({"transfer", "run", "--in", sources, "--kind", "concise", "--out",
             (dir / "transferred.jsonl").string()});
        {
            std::ofstream combined(dir / "combined.jsonl", std::ios::binary);
            std::ifstream a(fixture_dir / "corpus_sources.jsonl", std::ios::binary);
            std::ifstream b(dir / "transferred.jsonl", std::ios::binary);
            combined << a.rdbuf() << b.rdbuf();
        }
        cli({"score", "style", "--in", (dir / "combined.jsonl").string(), "--out",
             (dir / "style.jsonl").string()});
        cli({"qa", "generate", "--in", sources, "--out", (dir / "questions.jsonl").string()});
        cli({"qa", "eval", "--in", (dir / "combined.jsonl").string(), "--questions",
             (dir / "questions.jsonl").string(), "--out", (dir / "semantic.jsonl").string()});
        cli({"report", "render", "--style", (dir / "style.jsonl").string(), "--semantic",
             (dir / "semantic.jsonl").string(), "--out-dir", (dir / "bundle").string()});
        fs::copy_file(dir / "bundle" / "radar.csv", fixture_dir / "golden_radar.csv",
                      fs::copy_options::overwrite_existing);
        fs::remove_all(dir);
    }

    std::cout << "fixtures written to " << fixture_dir << "\n";
    return 0;
}
