#include "psst/corpus.hpp"

#include <cctype>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "psst/errors.hpp"

namespace psst {

using json = nlohmann::json;

std::string to_string(Origin o) {
    switch (o) {
        case Origin::news: return "news";
        case Origin::abstract: return "abstract";
        case Origin::wiki: return "wiki";
        case Origin::ted: return "ted";
        case Origin::political: return "political";
        case Origin::lecture: return "lecture";
        case Origin::generated: return "generated";
    }
    return "news";
}

std::string to_string(Role r) {
    switch (r) {
        case Role::source: return "source";
        case Role::target_style: return "target_style";
        case Role::transferred: return "transferred";
        case Role::paraphrase: return "paraphrase";
    }
    return "source";
}

Origin origin_from_string(const std::string& s) {
    if (s == "news") return Origin::news;
    if (s == "abstract") return Origin::abstract;
    if (s == "wiki") return Origin::wiki;
    if (s == "ted") return Origin::ted;
    if (s == "political") return Origin::political;
    if (s == "lecture") return Origin::lecture;
    if (s == "generated") return Origin::generated;
    throw ValidationError("unknown origin: " + s);
}

Role role_from_string(const std::string& s) {
    if (s == "source") return Role::source;
    if (s == "target_style") return Role::target_style;
    if (s == "transferred") return Role::transferred;
    if (s == "paraphrase") return Role::paraphrase;
    throw ValidationError("unknown role: " + s);
}

std::string to_string(Band b) {
    switch (b) {
        case Band::B400: return "B400";
        case Band::B800: return "B800";
        case Band::B1200: return "B1200";
        case Band::none: return "none";
    }
    return "none";
}

Band band_from_string(const std::string& s) {
    if (s == "B400") return Band::B400;
    if (s == "B800") return Band::B800;
    if (s == "B1200") return Band::B1200;
    if (s == "none") return Band::none;
    throw ValidationError("unknown band: " + s);
}

const std::vector<LengthBand>& length_bands() {
    static const std::vector<LengthBand> bands = {
        {Band::B400, 300, 500, true},
        {Band::B800, 600, 1000, false},
        {Band::B1200, 1000, 1400, true},
    };
    return bands;
}

int count_tokens(const std::string& text) {
    int count = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

Band assign_band(int token_count) {
    for (const auto& band : length_bands()) {
        if (band.contains(token_count)) return band.name;
    }
    return Band::none;
}

namespace {

bool is_blank(const std::string& s) {
    for (unsigned char c : s) {
        if (!std::isspace(c)) return false;
    }
    return true;
}

}  // namespace

Document finalize_document(Document doc, const TokenCounter& counter) {
    if (doc.id.empty()) throw ValidationError("document with empty id");
    if (is_blank(doc.text)) throw ValidationError("document '" + doc.id + "': empty text");
    const bool derived = doc.role == Role::transferred || doc.role == Role::paraphrase;
    if (derived && !doc.parent_id.has_value())
        throw ValidationError("document '" + doc.id + "': role " + to_string(doc.role) +
                              " requires parent_id");
    if (!derived && doc.parent_id.has_value())
        throw ValidationError("document '" + doc.id + "': role " + to_string(doc.role) +
                              " forbids parent_id");
    doc.token_count = counter(doc.text);
    doc.length_band = assign_band(doc.token_count);
    return doc;
}

std::vector<Document> ingest(const std::filesystem::path& path, Origin default_origin,
                             Role default_role, const TokenCounter& counter) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path.string());

    std::vector<Document> docs;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed record: " + e.what());
        }
        try {
            if (!rec.is_object() || !rec.contains("id") || !rec.contains("text"))
                throw ValidationError("record must be an object with id and text");
            Document doc;
            doc.id = rec.at("id").get<std::string>();
            doc.text = rec.at("text").get<std::string>();
            doc.origin = rec.contains("origin")
                             ? origin_from_string(rec.at("origin").get<std::string>())
                             : default_origin;
            doc.role = rec.contains("role") ? role_from_string(rec.at("role").get<std::string>())
                                            : default_role;
            if (rec.contains("parent_id") && !rec.at("parent_id").is_null())
                doc.parent_id = rec.at("parent_id").get<std::string>();
            if (rec.contains("provenance")) {
                for (const auto& [k, v] : rec.at("provenance").items())
                    doc.provenance[k] = v.get<std::string>();
            }
            if (!seen_ids.insert(doc.id).second)
                throw ValidationError("duplicate document id '" + doc.id + "'");
            docs.push_back(finalize_document(std::move(doc), counter));
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed record: " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

std::vector<Document> filter_corpus(const std::vector<Document>& docs, Band band) {
    std::vector<Document> out;
    for (const auto& doc : docs) {
        if (doc.length_band == band) out.push_back(doc);
    }
    return out;
}

void write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write corpus file: " + path.string());
    for (const auto& doc : docs) {
        json rec;
        rec["id"] = doc.id;
        rec["text"] = doc.text;
        rec["origin"] = to_string(doc.origin);
        rec["role"] = to_string(doc.role);
        if (doc.parent_id) rec["parent_id"] = *doc.parent_id;
        if (!doc.provenance.empty()) rec["provenance"] = doc.provenance;
        out << rec.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace psst
