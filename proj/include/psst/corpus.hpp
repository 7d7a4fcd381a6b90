#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace psst {

enum class Origin { news, abstract, wiki, ted, political, lecture, generated };
enum class Role { source, target_style, transferred, paraphrase };

std::string to_string(Origin o);
std::string to_string(Role r);
Origin origin_from_string(const std::string& s);
Role role_from_string(const std::string& s);

enum class Band { B400, B800, B1200, none };

std::string to_string(Band b);
Band band_from_string(const std::string& s);

/// Token-count interval for one band. B800 is half-open at the top so the
/// bands stay pairwise disjoint where 800+200 meets 1200-200.
struct LengthBand {
    Band name;
    int lower;            // inclusive
    int upper;            // inclusive, except B800 where it is exclusive
    bool upper_inclusive;

    bool contains(int token_count) const {
        if (token_count < lower) return false;
        return upper_inclusive ? token_count <= upper : token_count < upper;
    }
};

/// The three bands: [300,500], [600,1000), [1000,1400].
const std::vector<LengthBand>& length_bands();

struct Document {
    std::string id;
    std::string text;
    Origin origin = Origin::news;
    Role role = Role::source;
    int token_count = 0;
    Band length_band = Band::none;
    std::optional<std::string> parent_id;
    std::map<std::string, std::string> provenance;
};

using TokenCounter = std::function<int(const std::string&)>;

/// Default counter: maximal runs of non-whitespace characters.
int count_tokens(const std::string& text);

Band assign_band(int token_count);

/// Populates token_count and length_band and checks the Document invariants.
/// Throws ValidationError naming the document on violation.
Document finalize_document(Document doc, const TokenCounter& counter = count_tokens);

/// Reads a JSON-Lines corpus file. Records may omit origin/role, in which
/// case the supplied defaults apply. token_count and length_band are always
/// recomputed, never read. Malformed records and duplicate ids are rejected
/// with the offending line number.
std::vector<Document> ingest(const std::filesystem::path& path, Origin default_origin,
                             Role default_role, const TokenCounter& counter = count_tokens);

/// Order-preserving band filter.
std::vector<Document> filter_corpus(const std::vector<Document>& docs, Band band);

/// Writes documents as JSON-Lines. Computed fields are not persisted.
void write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path);

}  // namespace psst
