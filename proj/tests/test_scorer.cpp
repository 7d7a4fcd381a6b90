#include <doctest.h>

#include <random>

#include <json.hpp>

#include "psst/errors.hpp"
#include "psst/gateway.hpp"
#include "psst/scorer.hpp"
#include "test_util.hpp"

using namespace psst;
using json = nlohmann::json;

TEST_CASE("parse_remote_score takes the first numeric token in range") {
    CHECK(parse_remote_score("4") == doctest::Approx(4.0));
    CHECK(parse_remote_score("Score: 3.5 out of 5") == doctest::Approx(3.5));
    CHECK(parse_remote_score("  2.25\n") == doctest::Approx(2.25));
    CHECK_THROWS_AS(parse_remote_score("excellent"), ReplyParseError);
    CHECK_THROWS_AS(parse_remote_score(""), ReplyParseError);
    CHECK_THROWS_AS(parse_remote_score("7"), ReplyParseError);      // out of range
    CHECK_THROWS_AS(parse_remote_score("0.5"), ReplyParseError);    // out of range
    CHECK_THROWS_AS(parse_remote_score("-3 stars"), ReplyParseError);
}

TEST_CASE("lexical backend matches the published rule table on the anchors") {
    LexicalBackend backend;
    CHECK(backend.score(StyleDimension::interactivity, "The report was filed.") ==
          doctest::Approx(1.0));
    const double asked =
        backend.score(StyleDimension::interactivity, "Have you ever wondered why you do this?");
    CHECK(asked > 1.0);

    CHECK(backend.feature_count(StyleDimension::interactivity, "The report was filed.") == 0);
    CHECK(backend.feature_count(StyleDimension::interactivity,
                                "Have you ever wondered why you do this?") == 3);
    CHECK(backend.feature_count(StyleDimension::emotionality, "What a wonderful day!") == 2);
    CHECK(backend.feature_count(StyleDimension::vividness,
                                "It spread like a fire on dry grass.") == 2);
    CHECK(backend.feature_count(StyleDimension::orality,
                                "Well, um, it doesn't matter, you know.") == 4);
}

TEST_CASE("lexical backend is deterministic and in range") {
    LexicalBackend backend;
    const std::string text = "Imagine the ocean! Have you seen it? It's like a mirror.";
    const double first = backend.score(StyleDimension::vividness, text);
    for (int i = 0; i < 100; ++i)
        CHECK(backend.score(StyleDimension::vividness, text) == first);
    for (StyleDimension d : all_dimensions()) {
        const double v = score(backend, d, text);
        CHECK(v >= 1.0);
        CHECK(v <= 5.0);
    }
    CHECK_THROWS_AS(score(backend, StyleDimension::orality, "   "), ValidationError);
}

namespace {

std::string random_base_text(std::mt19937& rng) {
    static const char* neutral[] = {"report", "berlin", "system", "table",  "quantity",
                                    "matrix", "ledger", "window", "sample", "method"};
    std::uniform_int_distribution<int> len(3, 20);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(neutral) - 1);
    std::string text;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
        if (i) text += ' ';
        text += neutral[pick(rng)];
    }
    text += '.';
    return text;
}

std::vector<std::string> feature_tokens(const LexicalBackend& backend, StyleDimension d) {
    std::vector<std::string> tokens;
    const FeatureRule& rule = backend.rule(d);
    for (char c : rule.chars) tokens.push_back(std::string(1, c));
    for (const auto& w : rule.words) tokens.push_back(w);
    for (const auto& o : rule.openers) tokens.push_back(o);
    for (const auto& p : rule.phrases) tokens.push_back(p);
    if (rule.contractions) tokens.push_back("don't");
    return tokens;
}

}  // namespace

TEST_CASE("lexical monotonicity: feature appends never decrease, neutral appends never change") {
    LexicalBackend backend;
    std::mt19937 rng(424242);
    for (StyleDimension d : all_dimensions()) {
        const auto features = feature_tokens(backend, d);
        std::uniform_int_distribution<std::size_t> pick(0, features.size() - 1);
        for (int trial = 0; trial < 50; ++trial) {
            const std::string base = random_base_text(rng);
            const double base_score = backend.score(d, base);
            const double with_feature = backend.score(d, base + " " + features[pick(rng)]);
            CHECK(with_feature >= base_score);
            const double with_neutral = backend.score(d, base + " quantity");
            CHECK(with_neutral == base_score);
        }
    }
}

TEST_CASE("shipped lexical resource matches the built-in table") {
    const LexicalBackend from_file =
        LexicalBackend::from_file(testutil::resource_dir() / "lexical_scoring.json");
    const LexicalBackend builtin;
    CHECK(from_file.descriptor().version == builtin.descriptor().version);
    CHECK(from_file.knots() == builtin.knots());
    for (StyleDimension d : all_dimensions()) {
        CHECK(from_file.rule(d).chars == builtin.rule(d).chars);
        CHECK(from_file.rule(d).words == builtin.rule(d).words);
        CHECK(from_file.rule(d).phrases == builtin.rule(d).phrases);
        CHECK(from_file.rule(d).openers == builtin.rule(d).openers);
        CHECK(from_file.rule(d).contractions == builtin.rule(d).contractions);
    }
}

TEST_CASE("score_windows aligns outputs with inputs") {
    LexicalBackend backend;
    std::vector<Window> windows = {
        {1, 0, "Plain text here."},
        {1, 1, "Do you see this? Do you?"},
        {1, 2, "Plain text here."},
    };
    const auto outcomes = score_windows(backend, StyleDimension::interactivity, windows);
    REQUIRE(outcomes.size() == 3);
    for (const auto& o : outcomes) REQUIRE(o.ok());
    CHECK(*outcomes[0].value == *outcomes[2].value);  // duplicate windows, duplicate scores
    CHECK(*outcomes[1].value > *outcomes[0].value);
    CHECK_THROWS_AS(score_windows(backend, StyleDimension::orality, {}), ValidationError);
}

namespace {

// Scripted scorer endpoint: first ask gets `first`, any structured re-ask
// (recognizable by the appended nudge messages) gets `second`.
class ScriptedTransport : public Transport {
public:
    ScriptedTransport(std::string first, std::string second)
        : first_(std::move(first)), second_(std::move(second)) {}
    HttpResponse post_json(const EndpointConfig&, const std::string& body,
                           const std::string&) override {
        const json req = json::parse(body);
        const bool reask = req.at("messages").size() > 2;
        const std::string& content = reask ? second_ : first_;
        return {200, json{{"choices",
                           json::array({{{"message",
                                          {{"role", "assistant"}, {"content", content}}},
                                         {"finish_reason", "stop"}}})}}
                         .dump()};
    }

private:
    std::string first_, second_;
};

std::unique_ptr<Transport> scripted_scorer(std::string first, std::string second) {
    return std::make_unique<ScriptedTransport>(std::move(first), std::move(second));
}

}  // namespace

TEST_CASE("remote backend parses, re-asks once, and rejects bad replies") {
    testutil::TempDir tmp("scorer");
    EndpointConfig config;
    config.model = "scorer-model";

    SUBCASE("clean numeric reply") {
        Gateway gw(config, CacheMode::record, tmp.file("a.jsonl"),
                   scripted_scorer("3.5", "unused"));
        RemoteScorerBackend backend(gw);
        CHECK(backend.score(StyleDimension::orality, "Some text.") == doctest::Approx(3.5));
        CHECK(backend.descriptor().deterministic == false);
    }

    SUBCASE("unparseable first reply recovers through the re-ask") {
        Gateway gw(config, CacheMode::record, tmp.file("b.jsonl"),
                   scripted_scorer("it is quite oral", "4"));
        RemoteScorerBackend backend(gw, 1);
        CHECK(backend.score(StyleDimension::orality, "Some text.") == doctest::Approx(4.0));
    }

    SUBCASE("persistently unparseable reply fails carrying the raw reply") {
        Gateway gw(config, CacheMode::record, tmp.file("c.jsonl"),
                   scripted_scorer("no idea", "still no idea"));
        RemoteScorerBackend backend(gw, 1);
        try {
            backend.score(StyleDimension::orality, "Some text.");
            FAIL("expected ReplyParseError");
        } catch (const ReplyParseError& e) {
            CHECK(e.raw_reply() == "still no idea");
        }
    }

    SUBCASE("out-of-range replies are errors, not clamped") {
        Gateway gw(config, CacheMode::record, tmp.file("d.jsonl"),
                   scripted_scorer("9", "9"));
        RemoteScorerBackend backend(gw, 1);
        CHECK_THROWS_AS(backend.score(StyleDimension::orality, "Some text."),
                        ReplyParseError);
    }

    SUBCASE("replay serves recorded scores deterministically") {
        {
            Gateway record(config, CacheMode::record, tmp.file("e.jsonl"),
                           scripted_scorer("2.5", "unused"));
            RemoteScorerBackend backend(record);
            backend.score(StyleDimension::vividness, "Fixture text.");
        }
        Gateway replay(config, CacheMode::replay, tmp.file("e.jsonl"));
        RemoteScorerBackend backend(replay);
        CHECK(backend.score(StyleDimension::vividness, "Fixture text.") ==
              doctest::Approx(2.5));
        CHECK_THROWS_AS(backend.score(StyleDimension::vividness, "Uncached text."),
                        CacheMissError);
    }
}

TEST_CASE("remote score_batch reports positional errors") {
    testutil::TempDir tmp("scorerb");
    EndpointConfig config;
    config.model = "scorer-model";
    {
        Gateway record(config, CacheMode::record, tmp.file("cache.jsonl"),
                       scripted_scorer("3", "3"));
        RemoteScorerBackend backend(record);
        backend.score(StyleDimension::orality, "Window one.");
        backend.score(StyleDimension::orality, "Window three.");
    }
    Gateway replay(config, CacheMode::replay, tmp.file("cache.jsonl"));
    RemoteScorerBackend backend(replay);
    const auto outcomes = backend.score_batch(
        StyleDimension::orality, {"Window one.", "never cached", "Window three."});
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].ok());
    CHECK(!outcomes[1].ok());
    CHECK(outcomes[1].error.find("cache miss") != std::string::npos);
    CHECK(outcomes[2].ok());
}
