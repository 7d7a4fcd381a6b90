#include "psst/segmenter.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "psst/errors.hpp"

namespace psst {

namespace {

// Stored lowercase without the trailing period: "dr", "e.g", "etc", ...
const char* const kDefaultAbbreviations[] = {
    "mr",   "mrs",  "ms",   "dr",   "prof", "rev",  "gen",  "sen",  "rep",  "hon",
    "capt", "col",  "sgt",  "lt",   "st",   "sr",   "jr",   "e.g",  "i.e",  "etc",
    "cf",   "vs",   "al",   "viz",  "ca",   "approx", "no", "vol",  "fig",  "figs",
    "ch",   "sec",  "pp",   "p",    "dept", "univ", "inc",  "ltd",  "co",   "corp",
    "a.m",  "p.m",  "u.s",  "u.k",  "d.c",  "ph.d", "m.d",  "b.a",  "m.a",  "b.sc",
    "m.sc", "jan",  "feb",  "mar",  "apr",  "jun",  "jul",  "aug",  "sep",  "sept",
    "oct",  "nov",  "dec",
};

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool is_opener(unsigned char c) {
    return std::isupper(c) || std::isdigit(c) || c == '"' || c == '\'' || c == '(' || c == '[';
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// The whitespace-delimited token that ends just before position `pos`
// (exclusive), stripped of leading punctuation like '(' or '"'.
std::string token_before(const std::string& text, std::size_t pos) {
    std::size_t end = pos;
    std::size_t begin = end;
    while (begin > 0 && !std::isspace(static_cast<unsigned char>(text[begin - 1]))) --begin;
    while (begin < end && !std::isalnum(static_cast<unsigned char>(text[begin]))) ++begin;
    return text.substr(begin, end - begin);
}

}  // namespace

Segmenter::Segmenter() {
    for (const char* abbr : kDefaultAbbreviations) abbreviations_.insert(abbr);
}

Segmenter Segmenter::with_abbreviations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open abbreviation list: " + path.string());
    Segmenter seg;
    seg.abbreviations_.clear();
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.back() == '.') line.pop_back();
        seg.abbreviations_.insert(lower(line));
    }
    return seg;
}

std::vector<SentenceSpan> Segmenter::split_sentences(const std::string& text) const {
    const std::size_t size = text.size();
    std::size_t first_content = 0;
    while (first_content < size && std::isspace(static_cast<unsigned char>(text[first_content])))
        ++first_content;
    if (first_content == size) throw ValidationError("empty document");

    std::vector<SentenceSpan> spans;
    std::size_t sentence_start = first_content;

    auto emit = [&](std::size_t end) {
        while (end > sentence_start && std::isspace(static_cast<unsigned char>(text[end - 1])))
            --end;
        if (end > sentence_start) spans.push_back({spans.size(), sentence_start, end});
    };

    std::size_t i = first_content;
    while (i < size) {
        const char c = text[i];
        if (!is_terminal(c)) {
            ++i;
            continue;
        }
        if (c == '.') {
            // Decimal numbers: 3.14
            if (i + 1 < size && i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                ++i;
                continue;
            }
            const std::string tok = token_before(text, i);
            // Single initials: "J. Smith"
            if (tok.size() == 1 && std::isupper(static_cast<unsigned char>(tok[0]))) {
                ++i;
                continue;
            }
            if (!tok.empty() && abbreviations_.count(lower(tok))) {
                ++i;
                continue;
            }
        }
        // Consume any run of terminals ("?!", "...") and trailing closers.
        std::size_t end = i + 1;
        while (end < size && is_terminal(text[end])) ++end;
        while (end < size && is_closer(text[end])) ++end;
        if (end == size) {
            emit(end);
            sentence_start = end;
            i = end;
            break;
        }
        if (!std::isspace(static_cast<unsigned char>(text[end]))) {
            i = end;
            continue;
        }
        std::size_t next = end;
        while (next < size && std::isspace(static_cast<unsigned char>(text[next]))) ++next;
        if (next == size) {
            emit(end);
            sentence_start = next;
            i = next;
            break;
        }
        if (!is_opener(static_cast<unsigned char>(text[next]))) {
            i = end;
            continue;
        }
        emit(end);
        sentence_start = next;
        i = next;
    }
    if (sentence_start < size) emit(size);
    return spans;
}

std::vector<Window> ngram_windows(const std::vector<SentenceSpan>& sentences, int n,
                                  const std::string& text) {
    if (n < 1 || n > 4) throw ValidationError("window size must be in 1..4, got " + std::to_string(n));
    const std::size_t m = sentences.size();
    if (m == 0) throw ValidationError("cannot build windows over zero sentences");

    auto join = [&](std::size_t first, std::size_t count) {
        std::string joined;
        for (std::size_t k = 0; k < count; ++k) {
            if (k > 0) joined += ' ';
            const auto& s = sentences[first + k];
            joined.append(text, s.start, s.end - s.start);
        }
        return joined;
    };

    std::vector<Window> windows;
    const std::size_t width = static_cast<std::size_t>(n);
    if (m < width) {
        windows.push_back({n, 0, join(0, m)});
        return windows;
    }
    windows.reserve(m - width + 1);
    for (std::size_t first = 0; first + width <= m; ++first)
        windows.push_back({n, first, join(first, width)});
    return windows;
}

}  // namespace psst
