#include <doctest.h>

#include <functional>
#include <set>

#include <json.hpp>

#include "psst/corpus.hpp"
#include "psst/distill.hpp"
#include "psst/errors.hpp"
#include "test_util.hpp"

using namespace psst;
using json = nlohmann::json;

namespace {

std::string quintuple_json(const std::vector<std::pair<std::string, int>>& entries) {
    json samples = json::array();
    for (const auto& [sentence, score] : entries)
        samples.push_back({{"sentence", sentence}, {"score", score}});
    return json{{"samples", samples}}.dump();
}

std::string valid_quintuple(const std::string& seed) {
    return quintuple_json({{seed, 1},
                           {seed + " Notice.", 2},
                           {seed + " You see?", 3},
                           {seed + " Imagine that!", 4},
                           {seed + " Don't you wonder why?", 5}});
}

class ReplyTransport : public Transport {
public:
    using Fn = std::function<std::string(const json& request)>;
    explicit ReplyTransport(Fn fn) : fn_(std::move(fn)) {}
    HttpResponse post_json(const EndpointConfig&, const std::string& body,
                           const std::string&) override {
        return {200, json{{"choices",
                           json::array({{{"message",
                                          {{"role", "assistant"},
                                           {"content", fn_(json::parse(body))}}},
                                         {"finish_reason", "stop"}}})}}
                         .dump()};
    }

private:
    Fn fn_;
};

Gateway mock_gateway(const std::filesystem::path& cache, ReplyTransport::Fn fn) {
    EndpointConfig config;
    config.model = "gen-model";
    return Gateway(config, CacheMode::record, cache,
                   std::make_unique<ReplyTransport>(std::move(fn)));
}

std::string seed_text() { return "The committee approved the annual budget in March."; }

std::string user_seed(const json& request) {
    const std::string user = request.at("messages").at(1).at("content").get<std::string>();
    return user.substr(user.find("Sentence: ") + 10);
}

bool has_violation(const DistillRejection& e, ViolationKind kind) {
    for (const auto& v : e.violations())
        if (v.kind == kind) return true;
    return false;
}

}  // namespace

TEST_CASE("validate_sample") {
    GenSample sample;
    sample.dimension = StyleDimension::orality;
    sample.seed_id = "s";
    sample.seed_sentence = seed_text();
    sample.level = 3;
    sample.sentence = "Well, they approved the budget, you know.";
    sample.score = 3;
    CHECK(validate_sample(sample).empty());

    SUBCASE("score 0 is a range violation") {
        sample.score = 0;
        const auto violations = validate_sample(sample);
        REQUIRE(!violations.empty());
        CHECK(violations[0].kind == ViolationKind::score_out_of_range);
    }

    SUBCASE("empty sentence is a violation") {
        sample.sentence = "  ";
        const auto violations = validate_sample(sample);
        bool found = false;
        for (const auto& v : violations)
            if (v.kind == ViolationKind::empty_sentence) found = true;
        CHECK(found);
    }

    SUBCASE("score != level is a violation") {
        sample.score = 4;
        CHECK(!validate_sample(sample).empty());
    }
}

TEST_CASE("gen_listwise accepts a well-formed quintuple") {
    testutil::TempDir tmp("gen");
    Gateway gw = mock_gateway(tmp.file("c.jsonl"),
                              [](const json& req) { return valid_quintuple(user_seed(req)); });
    const auto samples =
        gen_listwise("s1", seed_text(), StyleDimension::interactivity, gw);
    REQUIRE(samples.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(samples[static_cast<std::size_t>(i)].score == i + 1);
        CHECK(samples[static_cast<std::size_t>(i)].level == i + 1);
        CHECK(samples[static_cast<std::size_t>(i)].seed_id == "s1");
        CHECK(!samples[static_cast<std::size_t>(i)].sentence.empty());
    }
}

TEST_CASE("gen_listwise rejections carry the right violation label") {
    testutil::TempDir tmp("genbad");
    DistillOptions no_retry;
    no_retry.validation_retries = 0;

    SUBCASE("wrong count") {
        Gateway gw = mock_gateway(tmp.file("a.jsonl"), [](const json& req) {
            const std::string seed = user_seed(req);
            return quintuple_json({{seed, 1}, {seed, 2}, {seed, 3}, {seed, 4}});
        });
        try {
            gen_listwise("s", seed_text(), StyleDimension::interactivity, gw, no_retry);
            FAIL("expected rejection");
        } catch (const DistillRejection& e) {
            CHECK(has_violation(e, ViolationKind::wrong_count));
            CHECK(!e.raw_reply().empty());
        }
    }

    SUBCASE("duplicate score 2") {
        Gateway gw = mock_gateway(tmp.file("b.jsonl"), [](const json& req) {
            const std::string seed = user_seed(req);
            return quintuple_json(
                {{seed, 1}, {seed + " a", 2}, {seed + " b", 2}, {seed + " c", 4}, {seed + " d", 5}});
        });
        try {
            gen_listwise("s", seed_text(), StyleDimension::interactivity, gw, no_retry);
            FAIL("expected rejection");
        } catch (const DistillRejection& e) {
            CHECK(has_violation(e, ViolationKind::duplicate_score));
            CHECK(std::string(e.what()).find("duplicate score 2") != std::string::npos);
        }
    }

    SUBCASE("non-monotone order") {
        Gateway gw = mock_gateway(tmp.file("c.jsonl"), [](const json& req) {
            const std::string seed = user_seed(req);
            return quintuple_json(
                {{seed, 2}, {seed + " a", 1}, {seed + " b", 3}, {seed + " c", 4}, {seed + " d", 5}});
        });
        try {
            gen_listwise("s", seed_text(), StyleDimension::interactivity, gw, no_retry);
            FAIL("expected rejection");
        } catch (const DistillRejection& e) {
            CHECK(has_violation(e, ViolationKind::non_monotone));
        }
    }

    SUBCASE("length violation applies to interactivity but not orality") {
        auto long_tail = [](const json& req) {
            const std::string seed = user_seed(req);
            std::string huge = seed;
            for (int i = 0; i < 4; ++i) huge += " " + seed;
            return quintuple_json({{seed, 1},
                                   {seed + " a", 2},
                                   {seed + " b", 3},
                                   {seed + " c", 4},
                                   {huge, 5}});
        };
        {
            Gateway gw = mock_gateway(tmp.file("d.jsonl"), long_tail);
            try {
                gen_listwise("s", seed_text(), StyleDimension::interactivity, gw, no_retry);
                FAIL("expected rejection");
            } catch (const DistillRejection& e) {
                CHECK(has_violation(e, ViolationKind::length_violation));
            }
        }
        {
            Gateway gw = mock_gateway(tmp.file("e.jsonl"), long_tail);
            CHECK(gen_listwise("s", seed_text(), StyleDimension::orality, gw, no_retry).size() ==
                  5);
        }
    }

    SUBCASE("empty sentence") {
        Gateway gw = mock_gateway(tmp.file("f.jsonl"), [](const json& req) {
            const std::string seed = user_seed(req);
            return quintuple_json(
                {{seed, 1}, {seed + " a", 2}, {"", 3}, {seed + " c", 4}, {seed + " d", 5}});
        });
        try {
            gen_listwise("s", seed_text(), StyleDimension::interactivity, gw, no_retry);
            FAIL("expected rejection");
        } catch (const DistillRejection& e) {
            CHECK(has_violation(e, ViolationKind::empty_sentence));
        }
    }

    SUBCASE("re-ask recovers from one bad reply") {
        Gateway gw = mock_gateway(tmp.file("g.jsonl"), [](const json& req) {
            if (req.at("messages").size() > 2) return valid_quintuple(user_seed(req));
            return std::string("not json");
        });
        DistillOptions one_retry;
        one_retry.validation_retries = 1;
        CHECK(gen_listwise("s", seed_text(), StyleDimension::interactivity, gw, one_retry)
                  .size() == 5);
    }

    SUBCASE("empty seed is a precondition error") {
        Gateway gw = mock_gateway(tmp.file("h.jsonl"),
                                  [](const json&) { return std::string("x"); });
        CHECK_THROWS_AS(gen_listwise("s", "   ", StyleDimension::orality, gw), ValidationError);
    }
}

TEST_CASE("build_training_set splits at quintuple granularity") {
    testutil::TempDir tmp("bts");
    Gateway gw = mock_gateway(tmp.file("cache.jsonl"),
                              [](const json& req) { return valid_quintuple(user_seed(req)); });

    std::vector<Document> seeds;
    for (int i = 0; i < 40; ++i) {
        Document d;
        d.id = "seed-" + std::to_string(i + 1);
        d.text = "The board reviewed report number " + std::to_string(i + 1) + " today.";
        d.role = Role::source;
        seeds.push_back(finalize_document(d));
    }

    const auto stats =
        build_training_set(seeds, StyleDimension::interactivity, gw, 0.9, 77,
                           tmp.file("train.jsonl"), tmp.file("val.jsonl"));
    CHECK(stats.seeds == 40);
    CHECK(stats.quintuples_ok == 40);
    CHECK(stats.rejected == 0);
    CHECK(stats.train_samples == 180);
    CHECK(stats.val_samples == 20);
    CHECK(stats.rng_seed == 77);

    // Quintuple disjointness: no seed id appears in both files, every emitted
    // quintuple carries exactly the score multiset {1,2,3,4,5}.
    auto read_seeds = [](const std::filesystem::path& path) {
        std::map<std::string, std::multiset<int>> by_seed;
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json rec = json::parse(line);
            by_seed[rec.at("seed_id").get<std::string>()].insert(rec.at("score").get<int>());
        }
        return by_seed;
    };
    const auto train_seeds = read_seeds(tmp.file("train.jsonl"));
    const auto val_seeds = read_seeds(tmp.file("val.jsonl"));
    CHECK(train_seeds.size() == 36);
    CHECK(val_seeds.size() == 4);
    const std::multiset<int> full = {1, 2, 3, 4, 5};
    for (const auto& [seed, scores] : train_seeds) {
        CHECK(scores == full);
        CHECK(val_seeds.find(seed) == val_seeds.end());
    }
    for (const auto& [seed, scores] : val_seeds) CHECK(scores == full);

    SUBCASE("same cache and seed reproduce byte-identical files") {
        Gateway replay(gw.config(), CacheMode::replay, tmp.file("cache.jsonl"));
        const auto stats2 =
            build_training_set(seeds, StyleDimension::interactivity, replay, 0.9, 77,
                               tmp.file("train2.jsonl"), tmp.file("val2.jsonl"));
        CHECK(stats2.train_samples == 180);
        CHECK(testutil::read_file(tmp.file("train.jsonl")) ==
              testutil::read_file(tmp.file("train2.jsonl")));
        CHECK(testutil::read_file(tmp.file("val.jsonl")) ==
              testutil::read_file(tmp.file("val2.jsonl")));
    }

    SUBCASE("different rng seed shuffles the split") {
        Gateway replay(gw.config(), CacheMode::replay, tmp.file("cache.jsonl"));
        build_training_set(seeds, StyleDimension::interactivity, replay, 0.9, 78,
                           tmp.file("train3.jsonl"), tmp.file("val3.jsonl"));
        CHECK(testutil::read_file(tmp.file("train.jsonl")) !=
              testutil::read_file(tmp.file("train3.jsonl")));
    }
}

TEST_CASE("build_training_set with zero seeds emits empty files and zero stats") {
    testutil::TempDir tmp("bts0");
    Gateway gw = mock_gateway(tmp.file("cache.jsonl"),
                              [](const json&) { return std::string("unused"); });
    const auto stats = build_training_set({}, StyleDimension::orality, gw, 0.9, 1,
                                          tmp.file("train.jsonl"), tmp.file("val.jsonl"));
    CHECK(stats.seeds == 0);
    CHECK(stats.train_samples == 0);
    CHECK(stats.val_samples == 0);
    CHECK(stats.rejected == 0);
    CHECK(testutil::read_file(tmp.file("train.jsonl")).empty());
    CHECK(testutil::read_file(tmp.file("val.jsonl")).empty());
}

TEST_CASE("build_training_set records rejections and keeps going") {
    testutil::TempDir tmp("btsr");
    Gateway gw = mock_gateway(tmp.file("cache.jsonl"), [](const json& req) {
        const std::string seed = user_seed(req);
        if (seed.find("poison") != std::string::npos)
            return quintuple_json({{seed, 1}, {seed, 2}});
        return valid_quintuple(seed);
    });
    std::vector<Document> seeds;
    for (int i = 0; i < 5; ++i) {
        Document d;
        d.id = "s" + std::to_string(i);
        d.text = i == 2 ? "This seed is poison for the generator."
                        : "A regular official sentence number " + std::to_string(i) + ".";
        d.role = Role::source;
        seeds.push_back(finalize_document(d));
    }
    DistillOptions no_retry;
    no_retry.validation_retries = 0;
    const auto stats = build_training_set(seeds, StyleDimension::orality, gw, 0.8, 3,
                                          tmp.file("t.jsonl"), tmp.file("v.jsonl"), no_retry);
    CHECK(stats.quintuples_ok == 4);
    CHECK(stats.rejected == 1);
    REQUIRE(!stats.rejection_labels.empty());
    CHECK(stats.rejection_labels[0].find("s2:") == 0);
    CHECK(stats.rejection_labels[0].find("wrong_count") != std::string::npos);
}
