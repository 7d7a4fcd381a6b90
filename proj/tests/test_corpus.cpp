#include <doctest.h>

#include <json.hpp>

#include "psst/corpus.hpp"
#include "psst/errors.hpp"
#include "test_util.hpp"

using namespace psst;
using json = nlohmann::json;

TEST_CASE("count_tokens counts maximal non-whitespace runs") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("hello world") == 2);
    CHECK(count_tokens("  hello   world  ") == 2);
    CHECK(count_tokens("one\ttwo\nthree") == 3);
    CHECK(count_tokens("a") == 1);
}

TEST_CASE("count_tokens matches the frozen fixture count") {
    // 1487, frozen from an independent whitespace-split pass (wc -w).
    const std::string text = testutil::read_file(testutil::fixture_dir() / "wordcount_fixture.txt");
    REQUIRE(!text.empty());
    CHECK(count_tokens(text) == 1487);
}

TEST_CASE("assign_band maps the declared intervals") {
    CHECK(assign_band(450) == Band::B400);
    CHECK(assign_band(300) == Band::B400);
    CHECK(assign_band(500) == Band::B400);
    CHECK(assign_band(600) == Band::B800);
    CHECK(assign_band(999) == Band::B800);
    CHECK(assign_band(1000) == Band::B1200);  // half-open tie-break
    CHECK(assign_band(1400) == Band::B1200);
    CHECK(assign_band(550) == Band::none);
    CHECK(assign_band(0) == Band::none);
    CHECK(assign_band(299) == Band::none);
    CHECK(assign_band(501) == Band::none);
    CHECK(assign_band(1401) == Band::none);
}

TEST_CASE("bands partition [300,500] and [600,1400] with no overlap") {
    for (int t = 0; t <= 2000; ++t) {
        int members = 0;
        for (const auto& band : length_bands())
            if (band.contains(t)) ++members;
        CHECK(members <= 1);
        const bool in_declared = (t >= 300 && t <= 500) || (t >= 600 && t <= 1400);
        CHECK(members == (in_declared ? 1 : 0));
    }
}

namespace {

std::string words(int n, const std::string& stem) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i > 0) out += ' ';
        out += stem + std::to_string(i);
    }
    return out;
}

}  // namespace

TEST_CASE("ingest populates computed fields and validates records") {
    testutil::TempDir tmp("corpus");

    SUBCASE("99 ted records in the 800 band") {
        std::string lines;
        for (int i = 0; i < 99; ++i) {
            json rec{{"id", "ted-" + std::to_string(i)},
                     {"text", words(700, "w")},
                     {"origin", "ted"},
                     {"role", "target_style"}};
            lines += rec.dump() + "\n";
        }
        testutil::write_file(tmp.file("ted.jsonl"), lines);
        const auto docs = ingest(tmp.file("ted.jsonl"), Origin::ted, Role::target_style);
        REQUIRE(docs.size() == 99);
        for (const auto& doc : docs) {
            CHECK(doc.length_band == Band::B800);
            CHECK(doc.token_count == 700);
            CHECK(doc.origin == Origin::ted);
        }
    }

    SUBCASE("empty file gives empty list") {
        testutil::write_file(tmp.file("empty.jsonl"), "");
        CHECK(ingest(tmp.file("empty.jsonl"), Origin::news, Role::source).empty());
    }

    SUBCASE("record with empty text is rejected with its line") {
        testutil::write_file(tmp.file("bad.jsonl"),
                             json{{"id", "a"}, {"text", "fine text"}}.dump() + "\n" +
                                 json{{"id", "b"}, {"text", "   "}}.dump() + "\n");
        CHECK_THROWS_WITH_AS(ingest(tmp.file("bad.jsonl"), Origin::news, Role::source),
                             doctest::Contains(":2:"), ValidationError);
    }

    SUBCASE("malformed json is rejected with its line") {
        testutil::write_file(tmp.file("garbage.jsonl"), "{not json\n");
        CHECK_THROWS_WITH_AS(ingest(tmp.file("garbage.jsonl"), Origin::news, Role::source),
                             doctest::Contains(":1:"), ValidationError);
    }

    SUBCASE("duplicate ids are rejected") {
        const std::string line = json{{"id", "dup"}, {"text", "some text"}}.dump() + "\n";
        testutil::write_file(tmp.file("dup.jsonl"), line + line);
        CHECK_THROWS_WITH_AS(ingest(tmp.file("dup.jsonl"), Origin::news, Role::source),
                             doctest::Contains("duplicate"), ValidationError);
    }

    SUBCASE("record fields win over ingest defaults") {
        testutil::write_file(
            tmp.file("mixed.jsonl"),
            json{{"id", "a"}, {"text", "t"}, {"origin", "wiki"}}.dump() + "\n" +
                json{{"id", "b"}, {"text", "t"}}.dump() + "\n");
        const auto docs = ingest(tmp.file("mixed.jsonl"), Origin::news, Role::source);
        CHECK(docs[0].origin == Origin::wiki);
        CHECK(docs[1].origin == Origin::news);
    }

    SUBCASE("missing file is an IoError") {
        CHECK_THROWS_AS(ingest(tmp.file("nope.jsonl"), Origin::news, Role::source), IoError);
    }
}

TEST_CASE("document invariants") {
    Document doc;
    doc.id = "d1";
    doc.text = "hello world";
    doc.role = Role::transferred;
    CHECK_THROWS_AS(finalize_document(doc), ValidationError);  // needs parent_id
    doc.parent_id = "src";
    const Document ok = finalize_document(doc);
    CHECK(ok.token_count == 2);
    CHECK(ok.length_band == Band::none);

    Document src;
    src.id = "d2";
    src.text = "hello";
    src.role = Role::source;
    src.parent_id = "x";  // sources must not have parents
    CHECK_THROWS_AS(finalize_document(src), ValidationError);
}

TEST_CASE("filter_corpus is order-preserving and idempotent") {
    testutil::TempDir tmp("filter");
    std::string lines;
    // 120 documents across bands, mirroring the per-band corpus size.
    std::vector<int> counts;
    for (int i = 0; i < 120; ++i) {
        const int tokens = (i % 3 == 0) ? 400 : (i % 3 == 1) ? 800 : 1200;
        counts.push_back(tokens);
        lines += json{{"id", "doc-" + std::to_string(i)}, {"text", words(tokens, "t")}}.dump() +
                 "\n";
    }
    testutil::write_file(tmp.file("mixed.jsonl"), lines);
    const auto docs = ingest(tmp.file("mixed.jsonl"), Origin::news, Role::source);

    const auto filtered = filter_corpus(docs, Band::B800);

    // Brute-force oracle: keep exactly the B800 subset in order.
    std::vector<std::string> expected;
    for (std::size_t i = 0; i < docs.size(); ++i)
        if (counts[i] == 800) expected.push_back(docs[i].id);
    REQUIRE(filtered.size() == expected.size());
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        CHECK(filtered[i].id == expected[i]);
        CHECK(filtered[i].length_band == Band::B800);
    }

    const auto twice = filter_corpus(filtered, Band::B800);
    REQUIRE(twice.size() == filtered.size());
    for (std::size_t i = 0; i < twice.size(); ++i) CHECK(twice[i].id == filtered[i].id);

    CHECK(filter_corpus(docs, Band::none).size() == 0);
}

TEST_CASE("ingested documents satisfy the band consistency invariant") {
    const auto docs =
        ingest(testutil::fixture_dir() / "corpus_sources.jsonl", Origin::news, Role::source);
    REQUIRE(docs.size() == 6);
    for (const auto& doc : docs) {
        CHECK(doc.token_count == count_tokens(doc.text));
        CHECK(doc.length_band == assign_band(doc.token_count));
        CHECK(doc.role == Role::source);
    }
}

TEST_CASE("write_corpus round-trips documents") {
    testutil::TempDir tmp("roundtrip");
    Document doc;
    doc.id = "rt-1";
    doc.text = "alpha beta gamma";
    doc.origin = Origin::wiki;
    doc.role = Role::paraphrase;
    doc.parent_id = "rt-0";
    doc.provenance["model"] = "m";
    write_corpus({finalize_document(doc)}, tmp.file("out.jsonl"));
    const auto loaded = ingest(tmp.file("out.jsonl"), Origin::news, Role::source);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].id == "rt-1");
    CHECK(loaded[0].origin == Origin::wiki);
    CHECK(loaded[0].role == Role::paraphrase);
    CHECK(loaded[0].parent_id == "rt-0");
    CHECK(loaded[0].provenance.at("model") == "m");
    CHECK(loaded[0].token_count == 3);
}
