#include "psst/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "psst/errors.hpp"

namespace psst {

using json = nlohmann::json;

std::string to_string(StyleDimension d) {
    switch (d) {
        case StyleDimension::interactivity: return "interactivity";
        case StyleDimension::emotionality: return "emotionality";
        case StyleDimension::vividness: return "vividness";
        case StyleDimension::orality: return "orality";
    }
    return "interactivity";
}

StyleDimension dimension_from_string(const std::string& s) {
    if (s == "interactivity") return StyleDimension::interactivity;
    if (s == "emotionality") return StyleDimension::emotionality;
    if (s == "vividness") return StyleDimension::vividness;
    if (s == "orality") return StyleDimension::orality;
    throw ValidationError("unknown style dimension: " + s);
}

const std::vector<StyleDimension>& all_dimensions() {
    static const std::vector<StyleDimension> dims = {
        StyleDimension::interactivity, StyleDimension::emotionality,
        StyleDimension::vividness, StyleDimension::orality};
    return dims;
}

std::vector<ScoreOutcome> ScorerBackend::score_batch(StyleDimension dimension,
                                                     const std::vector<std::string>& texts) {
    std::vector<ScoreOutcome> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        try {
            out.push_back({score(dimension, text), ""});
        } catch (const std::exception& e) {
            out.push_back({std::nullopt, e.what()});
        }
    }
    return out;
}

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

void check_range(double value, const std::string& who) {
    if (!(value >= 1.0 && value <= 5.0))
        throw ValidationError(who + " produced out-of-range score " + std::to_string(value));
}

}  // namespace

double score(ScorerBackend& backend, StyleDimension dimension, const std::string& text) {
    if (is_blank(text)) throw ValidationError("cannot score empty text");
    const double value = backend.score(dimension, text);
    check_range(value, backend.descriptor().name);
    return value;
}

std::vector<ScoreOutcome> score_windows(ScorerBackend& backend, StyleDimension dimension,
                                        const std::vector<Window>& windows) {
    if (windows.empty()) throw ValidationError("no windows to score");
    std::vector<std::string> texts;
    texts.reserve(windows.size());
    for (const auto& w : windows) texts.push_back(w.text);
    auto outcomes = backend.score_batch(dimension, texts);
    for (auto& o : outcomes) {
        if (o.ok() && !(*o.value >= 1.0 && *o.value <= 5.0))
            o = {std::nullopt, "out-of-range score " + std::to_string(*o.value)};
    }
    return outcomes;
}

double parse_remote_score(const std::string& reply) {
    const char* s = reply.c_str();
    const std::size_t n = reply.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = s[i];
        const bool starts_number =
            std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1]))) ||
            (c == '-' && i + 1 < n &&
             (std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
              (s[i + 1] == '.' && i + 2 < n &&
               std::isdigit(static_cast<unsigned char>(s[i + 2])))));
        if (!starts_number) continue;
        char* end = nullptr;
        const double value = std::strtod(s + i, &end);
        if (end == s + i) continue;
        if (!(value >= 1.0 && value <= 5.0))
            throw ReplyParseError("score out of range [1,5]: " + std::to_string(value), reply);
        return value;
    }
    throw ReplyParseError("no numeric token in scorer reply", reply);
}

// ---------------------------------------------------------------------------
// LexicalBackend
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kLexVersion = "lex-1";

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Leading/trailing punctuation stripped, interior apostrophes kept.
std::string clean_token(const std::string& raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && !std::isalnum(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && !std::isalnum(static_cast<unsigned char>(raw[e - 1]))) --e;
    return lower(raw.substr(b, e - b));
}

bool is_contraction(const std::string& raw) {
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        if (raw[i] == '\'' && std::isalpha(static_cast<unsigned char>(raw[i - 1])) &&
            std::isalpha(static_cast<unsigned char>(raw[i + 1])))
            return true;
    }
    return false;
}

bool ends_sentence(const std::string& raw) {
    for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
        if (*it == '"' || *it == '\'' || *it == ')' || *it == ']') continue;
        return *it == '.' || *it == '!' || *it == '?';
    }
    return false;
}

int count_phrase(const std::string& haystack_lower, const std::string& needle) {
    if (needle.empty()) return 0;
    const bool left_bound = std::isalnum(static_cast<unsigned char>(needle.front()));
    const bool right_bound = std::isalnum(static_cast<unsigned char>(needle.back()));
    int count = 0;
    std::size_t pos = 0;
    while ((pos = haystack_lower.find(needle, pos)) != std::string::npos) {
        const bool left_ok =
            !left_bound || pos == 0 ||
            !std::isalnum(static_cast<unsigned char>(haystack_lower[pos - 1]));
        const std::size_t after = pos + needle.size();
        const bool right_ok =
            !right_bound || after == haystack_lower.size() ||
            !std::isalnum(static_cast<unsigned char>(haystack_lower[after]));
        if (left_ok && right_ok) {
            ++count;
            pos = after;
        } else {
            ++pos;
        }
    }
    return count;
}

double piecewise_linear(const std::vector<std::pair<double, double>>& knots, double x) {
    if (x <= knots.front().first) return knots.front().second;
    if (x >= knots.back().first) return knots.back().second;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (x <= knots[i].first) {
            const auto& [x0, y0] = knots[i - 1];
            const auto& [x1, y1] = knots[i];
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    return knots.back().second;
}

std::vector<FeatureRule> default_rules() {
    std::vector<FeatureRule> rules(4);

    auto& inter = rules[static_cast<int>(StyleDimension::interactivity)];
    inter.chars = "?";
    inter.words = {"you", "your", "yours", "yourself", "yourselves"};
    inter.openers = {"imagine", "consider", "think",   "remember", "look",
                     "listen",  "picture",  "suppose", "ask",      "wonder"};

    auto& emo = rules[static_cast<int>(StyleDimension::emotionality)];
    emo.chars = "!";
    emo.words = {"love",     "hate",      "amazing",   "terrible",  "wonderful",
                 "awful",    "incredible", "horrible", "beautiful", "fantastic",
                 "thrilled", "heartbreaking", "devastating", "joy", "fear",
                 "angry",    "furious",   "delighted", "tragic",    "miracle",
                 "disaster", "hope",      "dream",     "proud",     "shocking",
                 "stunning", "outrage",   "grateful",  "inspiring", "exciting"};

    auto& viv = rules[static_cast<int>(StyleDimension::vividness)];
    viv.phrases = {"like a", "as if", "as though", "picture this", "imagine"};
    viv.words = {"mountain", "ocean",  "fire",    "storm",   "river",   "stone",
                 "sunlight", "thunder", "lightning", "forest", "wave",  "flame",
                 "shadow",   "diamond", "bridge",  "engine",  "seed",   "root",
                 "tapestry", "symphony", "rollercoaster", "kaleidoscope",
                 "beacon",   "compass", "anchor"};

    auto& oral = rules[static_cast<int>(StyleDimension::orality)];
    oral.phrases = {"you know", "kind of", "sort of", "i mean", "well,"};
    oral.words = {"um", "uh", "y'know", "folks", "okay", "yeah", "gonna", "wanna"};
    oral.contractions = true;

    return rules;
}

std::vector<std::pair<double, double>> default_knots() {
    return {{0, 1.0}, {1, 1.8}, {2, 2.4}, {4, 3.2}, {7, 4.0}, {12, 4.6}, {20, 5.0}};
}

}  // namespace

LexicalBackend::LexicalBackend()
    : version_(kLexVersion), rules_(default_rules()), knots_(default_knots()) {}

LexicalBackend LexicalBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexical scoring table: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": malformed lexical table: " + e.what());
    }
    LexicalBackend backend;
    backend.version_ = j.at("version").get<std::string>();
    backend.knots_.clear();
    for (const auto& knot : j.at("knots"))
        backend.knots_.emplace_back(knot.at(0).get<double>(), knot.at(1).get<double>());
    if (backend.knots_.size() < 2)
        throw ValidationError(path.string() + ": table needs at least two knots");
    for (std::size_t i = 1; i < backend.knots_.size(); ++i) {
        if (backend.knots_[i].first <= backend.knots_[i - 1].first ||
            backend.knots_[i].second < backend.knots_[i - 1].second)
            throw ValidationError(path.string() + ": knots must be strictly increasing in x "
                                  "and non-decreasing in y");
    }
    for (const auto& dim : all_dimensions()) {
        const auto& spec = j.at("features").at(to_string(dim));
        FeatureRule rule;
        rule.chars = spec.value("chars", "");
        for (const auto& w : spec.value("words", json::array()))
            rule.words.insert(lower(w.get<std::string>()));
        for (const auto& p : spec.value("phrases", json::array()))
            rule.phrases.push_back(lower(p.get<std::string>()));
        for (const auto& o : spec.value("openers", json::array()))
            rule.openers.insert(lower(o.get<std::string>()));
        rule.contractions = spec.value("contractions", false);
        backend.rules_[static_cast<int>(dim)] = std::move(rule);
    }
    return backend;
}

BackendDescriptor LexicalBackend::descriptor() const {
    return {"lexical", true, all_dimensions(), version_};
}

const FeatureRule& LexicalBackend::rule(StyleDimension dimension) const {
    return rules_[static_cast<int>(dimension)];
}

int LexicalBackend::feature_count(StyleDimension dimension, const std::string& text) const {
    const FeatureRule& rule = rules_[static_cast<int>(dimension)];
    int count = 0;

    for (char c : text) {
        if (rule.chars.find(c) != std::string::npos) ++count;
    }

    const std::string lowered = lower(text);
    for (const auto& phrase : rule.phrases) count += count_phrase(lowered, phrase);

    bool at_sentence_start = true;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        const std::string raw = text.substr(i, j - i);
        const std::string tok = clean_token(raw);
        if (!tok.empty()) {
            if (rule.words.count(tok)) ++count;
            if (at_sentence_start && rule.openers.count(tok)) ++count;
            at_sentence_start = ends_sentence(raw);
        }
        if (rule.contractions && is_contraction(raw)) ++count;
        i = j;
    }
    return count;
}

double LexicalBackend::score(StyleDimension dimension, const std::string& text) {
    if (is_blank(text)) throw ValidationError("cannot score empty text");
    return piecewise_linear(knots_, static_cast<double>(feature_count(dimension, text)));
}

// ---------------------------------------------------------------------------
// RemoteScorerBackend
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kScorerPromptVersion = "scorer-prompt-1";

const char* dimension_gloss(StyleDimension d) {
    switch (d) {
        case StyleDimension::interactivity:
            return "how much the text engages the audience directly, for example by "
                   "posing questions, inviting reflection, or sketching hypothetical "
                   "scenarios";
        case StyleDimension::emotionality:
            return "how much the text conveys the speaker's feelings, attitudes, and "
                   "inner reactions to what is described";
        case StyleDimension::vividness:
            return "how lively and easy to picture the text is, for example through "
                   "analogies, metaphors, and concrete imagery";
        case StyleDimension::orality:
            return "how close the text is to natural spoken delivery: filler words, "
                   "simple sentence patterns, casual word choices";
    }
    return "";
}

}  // namespace

const char* RemoteScorerBackend::prompt_version() { return kScorerPromptVersion; }

RemoteScorerBackend::RemoteScorerBackend(Gateway& gateway, int validation_retries)
    : gateway_(gateway), validation_retries_(validation_retries) {
    if (validation_retries_ < 0) throw ValidationError("validation_retries must be >= 0");
}

BackendDescriptor RemoteScorerBackend::descriptor() const {
    return {"remote:" + gateway_.config().model, false, all_dimensions(),
            kScorerPromptVersion};
}

ChatRequest RemoteScorerBackend::build_request(StyleDimension dimension,
                                               const std::string& text) const {
    ChatRequest req;
    req.messages.push_back(
        {"system",
         "You rate how strongly a passage exhibits one public-speaking style "
         "quality. Reply with a single number from 1 to 5 and nothing else. "
         "[" + std::string(kScorerPromptVersion) + "]"});
    req.messages.push_back(
        {"user", "Rate the " + to_string(dimension) + " of the text below, meaning " +
                     dimension_gloss(dimension) +
                     ". 1 = none, 5 = extremely strong. Reply with a single number "
                     "from 1 to 5.\n\nText:\n" +
                     text});
    return req;
}

double RemoteScorerBackend::parse_with_retries(StyleDimension dimension,
                                               const std::string& text,
                                               const ChatRequest& request,
                                               const ChatResponse& first) {
    ChatRequest current = request;
    ChatResponse reply = first;
    for (int attempt = 0;; ++attempt) {
        try {
            return parse_remote_score(reply.content);
        } catch (const ReplyParseError& e) {
            if (attempt >= validation_retries_)
                throw ReplyParseError(
                    "scorer reply for " + to_string(dimension) +
                        " unusable after " + std::to_string(attempt + 1) +
                        " attempt(s): " + e.what(),
                    e.raw_reply());
            current.messages.push_back({"assistant", reply.content});
            current.messages.push_back(
                {"user", "Reply with a single number between 1 and 5."});
            reply = gateway_.chat(current);
        }
    }
    (void)text;
}

double RemoteScorerBackend::score(StyleDimension dimension, const std::string& text) {
    if (is_blank(text)) throw ValidationError("cannot score empty text");
    const ChatRequest request = build_request(dimension, text);
    const ChatResponse response = gateway_.chat(request);
    return parse_with_retries(dimension, text, request, response);
}

std::vector<ScoreOutcome> RemoteScorerBackend::score_batch(
    StyleDimension dimension, const std::vector<std::string>& texts) {
    std::vector<ChatRequest> requests;
    requests.reserve(texts.size());
    for (const auto& text : texts) requests.push_back(build_request(dimension, text));
    const auto replies = gateway_.chat_batch(requests);

    std::vector<ScoreOutcome> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (!replies[i].ok()) {
            out[i] = {std::nullopt, replies[i].error};
            continue;
        }
        try {
            out[i] = {parse_with_retries(dimension, texts[i], requests[i], *replies[i].response),
                      ""};
        } catch (const std::exception& e) {
            out[i] = {std::nullopt, e.what()};
        }
    }
    return out;
}

}  // namespace psst
