#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lsr/distill/ensemble.hpp"
#include "lsr/distill/mining.hpp"
#include "lsr/error.hpp"
#include "lsr/idf.hpp"
#include "lsr/sparse_vector.hpp"
#include "lsr/vocabulary.hpp"

namespace lsr::io {

using json = nlohmann::ordered_json;

namespace detail {

inline json parse_line(std::string const &line, std::string const &name, std::size_t lineno)
{
    try {
        return json::parse(line);
    } catch (json::parse_error const &e) {
        throw FormatError(name + ":" + std::to_string(lineno) + ": invalid JSON (" + e.what() + ")");
    }
}

template <typename F>
void for_each_line(std::istream &in, std::string const &name, F &&f)
{
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto obj = parse_line(line, name, lineno);
        try {
            f(obj, lineno);
        } catch (json::exception const &e) {
            throw FormatError(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline std::string where(std::string const &name, std::size_t lineno)
{
    return name + ":" + std::to_string(lineno) + ": ";
}

}  // namespace detail

// Sparse vectors: {"id": "<doc_id>", "vector": {"<token>": <weight>, ...}} ----

struct SparseRecord {
    std::string id;
    std::vector<SparseEntry<double>> entries;  ///< as read, unvalidated

    [[nodiscard]] SparseVector vector() const { return SparseVector::from_entries(entries); }
};

/// Reads sparse-vector JSON lines. New tokens are added to `vocab` when `grow`
/// is set and dropped otherwise.
inline std::vector<SparseRecord> read_sparse_jsonl(std::istream &in, Vocabulary &vocab, bool grow = true,
                                                   std::string const &name = "vectors")
{
    std::vector<SparseRecord> out;
    detail::for_each_line(in, name, [&](json const &obj, std::size_t lineno) {
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("vector") || !obj["vector"].is_object()) {
            throw FormatError(detail::where(name, lineno) + "expected {\"id\", \"vector\": {...}}");
        }
        SparseRecord rec;
        rec.id = obj["id"].get<std::string>();
        for (auto const &[term, weight] : obj["vector"].items()) {
            if (!weight.is_number()) {
                throw FormatError(detail::where(name, lineno) + "weight of '" + term + "' is not a number");
            }
            auto id = grow ? std::optional<TokenId>(vocab.intern(term)) : vocab.find(term);
            if (id) {
                rec.entries.push_back({*id, weight.get<double>()});
            }
        }
        out.push_back(std::move(rec));
    });
    return out;
}

template <typename W>
void write_sparse_line(std::ostream &out, std::string const &id, BasicSparseVector<W> const &vec,
                       Vocabulary const &vocab)
{
    json obj;
    obj["id"] = id;
    json v = json::object();
    for (auto const &e : vec) {
        v[vocab.term(e.token)] = static_cast<double>(e.weight);
    }
    obj["vector"] = std::move(v);
    out << obj.dump() << '\n';
}

// IDF tables: {"source": "<label>", "default": 1.0, "values": {"<token>": <idf>}} -

/// Values are written in token-id order.
inline json idf_to_json(IdfTable const &table, Vocabulary const &vocab)
{
    json obj;
    obj["source"] = table.source();
    obj["default"] = table.default_value();
    json values = json::object();
    for (std::size_t t = 0; t < vocab.size(); ++t) {
        TokenId id{static_cast<std::uint32_t>(t)};
        if (table.contains(id)) {
            values[vocab.term(id)] = table.lookup(id);
        }
    }
    obj["values"] = std::move(values);
    return obj;
}

/// Tokens unknown to `vocab` cannot match anything and are skipped.
inline IdfTable idf_from_json(json const &obj, Vocabulary const &vocab, std::string const &name = "idf")
{
    if (!obj.is_object() || !obj.contains("values") || !obj["values"].is_object()) {
        throw FormatError(name + ": expected {\"source\", \"default\", \"values\": {...}}");
    }
    try {
        IdfTable table(obj.value("source", std::string("unnamed")), obj.value("default", IdfTable::kDefaultIdf));
        for (auto const &[term, value] : obj["values"].items()) {
            if (auto id = vocab.find(term)) {
                table.set(*id, value.get<double>());
            }
        }
        return table;
    } catch (json::exception const &e) {
        throw FormatError(name + ": " + e.what());
    } catch (InvalidArgument const &e) {
        throw FormatError(name + ": " + e.what());
    }
}

inline IdfTable read_idf(std::istream &in, Vocabulary const &vocab, std::string const &name = "idf")
{
    json obj;
    try {
        obj = json::parse(in);
    } catch (json::parse_error const &e) {
        throw FormatError(name + ": invalid JSON (" + e.what() + ")");
    }
    return idf_from_json(obj, vocab, name);
}

// Queries and training pairs: {"query_id", "query_tokens": [...], "positive_id"} -

struct QueryRecord {
    std::string query_id;
    std::vector<std::string> tokens;
    std::optional<std::string> positive_id;
};

/// Accepts "query_tokens" (list) or "text" (tokenized on whitespace).
inline std::vector<QueryRecord> read_queries(std::istream &in, std::string const &name = "queries")
{
    std::vector<QueryRecord> out;
    detail::for_each_line(in, name, [&](json const &obj, std::size_t lineno) {
        if (!obj.is_object() || !obj.contains("query_id")) {
            throw FormatError(detail::where(name, lineno) + "missing query_id");
        }
        QueryRecord q;
        q.query_id = obj["query_id"].get<std::string>();
        if (obj.contains("query_tokens")) {
            q.tokens = obj["query_tokens"].get<std::vector<std::string>>();
        } else if (obj.contains("text")) {
            q.tokens = tokenize(obj["text"].get<std::string>());
        } else {
            throw FormatError(detail::where(name, lineno) + "query needs query_tokens or text");
        }
        if (obj.contains("positive_id")) {
            q.positive_id = obj["positive_id"].get<std::string>();
        }
        out.push_back(std::move(q));
    });
    return out;
}

inline void write_query_line(std::ostream &out, QueryRecord const &q)
{
    json obj;
    obj["query_id"] = q.query_id;
    obj["query_tokens"] = q.tokens;
    if (q.positive_id) {
        obj["positive_id"] = *q.positive_id;
    }
    out << obj.dump() << '\n';
}

// Teacher replay: {"query_id", "doc_ids": [...], "teachers": [{"id", "weight", "scores"}]} -

struct TeacherRecord {
    std::string query_id;
    std::vector<std::string> doc_ids;
    distill::TeacherScores teacher;
};

inline std::vector<TeacherRecord> read_teachers(std::istream &in, std::string const &name = "teachers")
{
    std::vector<TeacherRecord> out;
    detail::for_each_line(in, name, [&](json const &obj, std::size_t lineno) {
        TeacherRecord rec;
        rec.query_id = obj.at("query_id").get<std::string>();
        rec.doc_ids = obj.at("doc_ids").get<std::vector<std::string>>();
        for (auto const &t : obj.at("teachers")) {
            distill::Teacher teacher;
            teacher.id = t.value("id", std::string("teacher"));
            teacher.weight = t.value("weight", 1.0);
            teacher.scores = t.at("scores").get<std::vector<double>>();
            rec.teacher.teachers.push_back(std::move(teacher));
        }
        try {
            rec.teacher.validate();
        } catch (InvalidArgument const &e) {
            throw FormatError(detail::where(name, lineno) + e.what());
        }
        if (rec.teacher.candidates() != rec.doc_ids.size()) {
            throw FormatError(detail::where(name, lineno) + "teacher scores not aligned with doc_ids");
        }
        out.push_back(std::move(rec));
    });
    return out;
}

inline void write_teacher_line(std::ostream &out, TeacherRecord const &rec)
{
    json obj;
    obj["query_id"] = rec.query_id;
    obj["doc_ids"] = rec.doc_ids;
    json teachers = json::array();
    for (auto const &t : rec.teacher.teachers) {
        teachers.push_back({{"id", t.id}, {"weight", t.weight}, {"scores", t.scores}});
    }
    obj["teachers"] = std::move(teachers);
    out << obj.dump() << '\n';
}

// Mined candidates --------------------------------------------------------------

inline void write_mined_line(std::ostream &out, distill::MinedCandidates const &m)
{
    json obj;
    obj["query_id"] = m.query_id;
    obj["query_tokens"] = m.query_tokens;
    obj["positive_id"] = m.positive_id;
    obj["positive_rank"] = m.positive_rank ? json(*m.positive_rank) : json(nullptr);
    json ids = json::array();
    json scores = json::array();
    for (auto const &c : m.candidates) {
        ids.push_back(c.doc_id);
        scores.push_back(c.score);
    }
    obj["doc_ids"] = std::move(ids);
    obj["scores"] = std::move(scores);
    out << obj.dump() << '\n';
}

inline std::vector<distill::MinedCandidates> read_mined(std::istream &in, std::string const &name = "mined")
{
    std::vector<distill::MinedCandidates> out;
    detail::for_each_line(in, name, [&](json const &obj, std::size_t lineno) {
        distill::MinedCandidates m;
        m.query_id = obj.at("query_id").get<std::string>();
        m.query_tokens = obj.value("query_tokens", std::vector<std::string>{});
        m.positive_id = obj.at("positive_id").get<std::string>();
        if (!obj.at("positive_rank").is_null()) {
            m.positive_rank = obj["positive_rank"].get<std::size_t>();
        }
        auto ids = obj.at("doc_ids").get<std::vector<std::string>>();
        auto scores = obj.at("scores").get<std::vector<double>>();
        if (ids.size() != scores.size()) {
            throw FormatError(detail::where(name, lineno) + "doc_ids and scores differ in length");
        }
        for (std::size_t i = 0; i < ids.size(); ++i) {
            m.candidates.push_back({ids[i], scores[i]});
        }
        out.push_back(std::move(m));
    });
    return out;
}

}  // namespace lsr::io
