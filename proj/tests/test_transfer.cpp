#include <doctest.h>

#include <functional>

#include <json.hpp>

#include "psst/errors.hpp"
#include "psst/transfer.hpp"
#include "test_util.hpp"

using namespace psst;
using json = nlohmann::json;

namespace {

class EchoTransport : public Transport {
public:
    using Fn = std::function<std::string(const std::string& user)>;
    explicit EchoTransport(Fn fn) : fn_(std::move(fn)) {}
    HttpResponse post_json(const EndpointConfig&, const std::string& body,
                           const std::string&) override {
        const json req = json::parse(body);
        const std::string user = req.at("messages").at(0).at("content").get<std::string>();
        return {200, json{{"choices",
                           json::array({{{"message",
                                          {{"role", "assistant"}, {"content", fn_(user)}}},
                                         {"finish_reason", "stop"}}})}}
                         .dump()};
    }

private:
    Fn fn_;
};

Gateway echo_gateway(const std::filesystem::path& cache, EchoTransport::Fn fn) {
    EndpointConfig config;
    config.model = "transfer-model";
    return Gateway(config, CacheMode::record, cache,
                   std::make_unique<EchoTransport>(std::move(fn)));
}

Document make_source(const std::string& id) {
    Document doc;
    doc.id = id;
    doc.text = "The committee approved the budget. Work begins in April.";
    doc.role = Role::source;
    return finalize_document(doc);
}

PromptSpec make_prompt(PromptKind kind, int index) {
    PromptSpec p;
    p.kind = kind;
    p.index = index;
    p.version = "test-1";
    p.template_text = "Restyle (" + std::to_string(index) + "):\n\n{source_text}";
    return p;
}

}  // namespace

TEST_CASE("prompt files parse front-matter and enforce one slot") {
    testutil::TempDir tmp("prompt");
    testutil::write_file(tmp.file("ok.txt"),
                         "kind: concise\nindex: 2\nversion: v9\n---\nSpeak: {source_text}\n");
    const PromptSpec spec = load_prompt_file(tmp.file("ok.txt"));
    CHECK(spec.kind == PromptKind::concise);
    CHECK(spec.index == 2);
    CHECK(spec.version == "v9");
    CHECK(spec.fill("XYZ") == "Speak: XYZ");

    testutil::write_file(tmp.file("noslot.txt"), "kind: concise\nindex: 1\nversion: v\n---\nhi\n");
    CHECK_THROWS_WITH_AS(load_prompt_file(tmp.file("noslot.txt")),
                         doctest::Contains("exactly one"), ValidationError);
    testutil::write_file(tmp.file("twoslots.txt"),
                         "kind: concise\nindex: 1\nversion: v\n---\n{source_text} {source_text}\n");
    CHECK_THROWS_AS(load_prompt_file(tmp.file("twoslots.txt")), ValidationError);
    testutil::write_file(tmp.file("nofm.txt"), "just a template {source_text}\n");
    CHECK_THROWS_AS(load_prompt_file(tmp.file("nofm.txt")), ValidationError);

    SUBCASE("extra template variables fill on demand and pass through otherwise") {
        PromptSpec extra;
        extra.kind = PromptKind::concise;
        extra.index = 1;
        extra.version = "v";
        extra.template_text = "As {persona}, retell for {audience}: {source_text}";
        CHECK(extra.fill("T", {{"persona", "a coach"}, {"audience", "students"}}) ==
              "As a coach, retell for students: T");
        CHECK(extra.fill("T") == "As {persona}, retell for {audience}: T");
    }
}

TEST_CASE("shipped prompt suites load with five prompts per kind") {
    for (PromptKind kind : {PromptKind::concise, PromptKind::enhanced}) {
        const auto suite = load_prompt_suite(testutil::resource_dir() / "prompts", kind);
        REQUIRE(suite.size() == 5);
        for (int i = 0; i < 5; ++i) {
            CHECK(suite[static_cast<std::size_t>(i)].kind == kind);
            CHECK(suite[static_cast<std::size_t>(i)].index == i + 1);
            CHECK(suite[static_cast<std::size_t>(i)].version == "psst-prompts-1");
        }
    }
}

TEST_CASE("validate_suite rejects duplicate (kind, index) before any call") {
    std::vector<PromptSpec> suite = {make_prompt(PromptKind::concise, 1),
                                     make_prompt(PromptKind::concise, 1)};
    CHECK_THROWS_WITH_AS(validate_suite(suite), doctest::Contains("duplicate"),
                         ValidationError);
}

TEST_CASE("run_psst produces a traceable transferred document") {
    testutil::TempDir tmp("psst");
    Gateway gw = echo_gateway(tmp.file("cache.jsonl"),
                              [](const std::string&) { return "A lively retelling."; });
    const Document source = make_source("s1");
    const PromptSpec prompt = make_prompt(PromptKind::concise, 3);

    const Document out = run_psst(source, prompt, gw);
    CHECK(out.role == Role::transferred);
    CHECK(out.origin == Origin::generated);
    CHECK(out.parent_id == "s1");
    CHECK(out.text == "A lively retelling.");
    CHECK(out.provenance.at("model") == "transfer-model");
    CHECK(out.provenance.at("prompt_kind") == "concise");
    CHECK(out.provenance.at("prompt_index") == "3");
    CHECK(out.provenance.at("prompt_version") == "test-1");
    CHECK(out.provenance.at("cache_key").size() == 64);
    CHECK(out.token_count == 3);

    SUBCASE("replay reproduces the identical text") {
        Gateway replay(gw.config(), CacheMode::replay, tmp.file("cache.jsonl"));
        const Document again = run_psst(source, prompt, replay);
        CHECK(again.text == out.text);
        CHECK(again.id == out.id);
        CHECK(again.provenance == out.provenance);
    }

    SUBCASE("non-source input is a precondition error") {
        CHECK_THROWS_AS(run_psst(out, prompt, gw), ValidationError);
    }

    SUBCASE("paraphrase prompts are rejected by run_psst") {
        CHECK_THROWS_AS(run_psst(source, make_prompt(PromptKind::paraphrase, 1), gw),
                        ValidationError);
    }
}

TEST_CASE("empty transfer output is an error") {
    testutil::TempDir tmp("psst2");
    Gateway gw =
        echo_gateway(tmp.file("cache.jsonl"), [](const std::string&) { return "   "; });
    CHECK_THROWS_WITH_AS(run_psst(make_source("s1"), make_prompt(PromptKind::concise, 1), gw),
                         doctest::Contains("empty transfer output"), ValidationError);
}

TEST_CASE("run_paraphrase mirrors run_psst with role paraphrase") {
    testutil::TempDir tmp("para");
    Gateway gw = echo_gateway(tmp.file("cache.jsonl"),
                              [](const std::string&) { return "Reworded text."; });
    const Document source = make_source("s1");
    const Document out = run_paraphrase(source, gw);
    CHECK(out.role == Role::paraphrase);
    CHECK(out.parent_id == "s1");
    CHECK(out.provenance.at("prompt_kind") == "paraphrase");

    SUBCASE("paraphrase of a paraphrase is rejected") {
        CHECK_THROWS_AS(run_paraphrase(out, gw), ValidationError);
    }

    SUBCASE("replay miss is a cache-miss error") {
        Gateway replay(gw.config(), CacheMode::replay, tmp.file("other.jsonl"));
        CHECK_THROWS_AS(run_paraphrase(source, replay), CacheMissError);
    }
}

TEST_CASE("run_suite covers the cartesian product in documented order") {
    testutil::TempDir tmp("suite");
    Gateway gw = echo_gateway(tmp.file("cache.jsonl"), [](const std::string& user) {
        return "styled::" + user.substr(0, user.find(':'));
    });
    std::vector<Document> corpus = {make_source("d1"), make_source("d2"), make_source("d3")};
    std::vector<PromptSpec> suite;
    for (int i = 1; i <= 5; ++i) suite.push_back(make_prompt(PromptKind::concise, i));

    const SuiteResult result = run_suite(corpus, suite, gw);
    REQUIRE(result.documents.size() == 15);
    CHECK(result.failures.empty());
    // (doc order, prompt order)
    for (int d = 0; d < 3; ++d)
        for (int p = 0; p < 5; ++p) {
            const auto& doc = result.documents[static_cast<std::size_t>(d * 5 + p)];
            CHECK(doc.parent_id == "d" + std::to_string(d + 1));
            CHECK(doc.provenance.at("prompt_index") == std::to_string(p + 1));
        }

    SUBCASE("empty corpus gives empty output") {
        const SuiteResult empty = run_suite({}, suite, gw);
        CHECK(empty.documents.empty());
        CHECK(empty.failures.empty());
    }

    SUBCASE("duplicate prompts fail before any call") {
        auto bad = suite;
        bad.push_back(make_prompt(PromptKind::concise, 5));
        CHECK_THROWS_AS(run_suite(corpus, bad, gw), ValidationError);
    }

    SUBCASE("replay misses are positional failures, order preserved") {
        Gateway replay(gw.config(), CacheMode::replay, tmp.file("cache.jsonl"));
        auto extended = corpus;
        Document fresh = make_source("d4");
        fresh.text += " Entirely new content.";
        fresh = finalize_document(fresh);
        extended.push_back(fresh);  // never recorded
        const SuiteResult partial = run_suite(extended, suite, replay);
        CHECK(partial.documents.size() == 15);
        REQUIRE(partial.failures.size() == 5);
        for (const auto& f : partial.failures) {
            CHECK(f.source_id == "d4");
            CHECK(f.error.find("cache miss") != std::string::npos);
            CHECK(f.position >= 15);
        }
        CHECK(partial.documents.size() + partial.failures.size() ==
              extended.size() * suite.size());
    }
}
