#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

namespace psst {

/// Byte range of one sentence within a document. Spans carry no leading or
/// trailing whitespace; everything between spans is whitespace.
struct SentenceSpan {
    std::size_t index;
    std::size_t start;
    std::size_t end;  // exclusive
};

/// n consecutive sentences joined with single spaces, scored as one unit.
struct Window {
    int n;
    std::size_t first_sentence;
    std::string text;
};

/// Rule-based sentence boundary detector for English prose. A boundary is a
/// terminal {. ! ?}, optionally followed by closing quotes/brackets, then
/// whitespace and an uppercase/digit/opening-quote opener. Periods after
/// known abbreviations, after single initials, and inside decimal numbers
/// never end a sentence.
class Segmenter {
public:
    /// Built-in abbreviation list (titles, Latin abbreviations, common
    /// truncations). Same content ships in resources/abbreviations.txt.
    Segmenter();

    /// Abbreviations loaded from a file, one token per line, case-insensitive,
    /// trailing period optional.
    static Segmenter with_abbreviations(const std::filesystem::path& path);

    std::vector<SentenceSpan> split_sentences(const std::string& text) const;

    const std::unordered_set<std::string>& abbreviations() const { return abbreviations_; }

    std::string span_text(const std::string& text, const SentenceSpan& span) const {
        return text.substr(span.start, span.end - span.start);
    }

private:
    std::unordered_set<std::string> abbreviations_;
};

/// Sliding windows of n sentences, stride 1. For 0 < M < n the single
/// fallback window covers the whole document so every n always yields at
/// least one window.
std::vector<Window> ngram_windows(const std::vector<SentenceSpan>& sentences, int n,
                                  const std::string& text);

}  // namespace psst
