#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lsr/error.hpp"
#include "lsr/sparse_vector.hpp"

namespace lsr::eval {

/// query_id -> doc_id -> relevance grade.
using Qrels = std::map<std::string, std::map<std::string, int>>;

/// query_id -> ranked documents (rank 1 first).
using RunFile = std::map<std::string, std::vector<ScoredDoc>>;

namespace detail {

inline std::vector<std::string> judged_queries(Qrels const &qrels)
{
    std::vector<std::string> out;
    for (auto const &[qid, docs] : qrels) {
        if (std::any_of(docs.begin(), docs.end(), [](auto const &d) { return d.second > 0; })) {
            out.push_back(qid);
        }
    }
    return out;
}

/// Averages `per_query` over judged queries; queries missing from the run score 0.
template <typename PerQuery>
double average(RunFile const &run, Qrels const &qrels, std::size_t k, PerQuery per_query)
{
    if (k == 0) {
        throw InvalidArgument("metric cutoff k must be >= 1");
    }
    auto judged = judged_queries(qrels);
    bool overlap = std::any_of(judged.begin(), judged.end(), [&run](auto const &q) { return run.contains(q); });
    if (judged.empty() || !overlap) {
        throw InvalidArgument("no overlap between run and qrels");
    }
    double sum = 0.0;
    static std::vector<ScoredDoc> const kEmpty;
    for (auto const &qid : judged) {
        auto it = run.find(qid);
        auto const &ranked = it == run.end() ? kEmpty : it->second;
        sum += per_query(ranked, qrels.at(qid), k);
    }
    return sum / static_cast<double>(judged.size());
}

inline int grade_of(std::map<std::string, int> const &judgments, std::string const &doc)
{
    auto it = judgments.find(doc);
    return it == judgments.end() ? 0 : it->second;
}

}  // namespace detail

inline double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }

/// Per-query NDCG@k with gain 2^rel - 1 and log2(rank + 1) discount.
inline double ndcg_query(std::span<ScoredDoc const> ranked, std::map<std::string, int> const &judgments,
                         std::size_t k)
{
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
        dcg += gain(detail::grade_of(judgments, ranked[r].doc_id)) / std::log2(static_cast<double>(r) + 2.0);
    }
    std::vector<int> ideal;
    for (auto const &[doc, grade] : judgments) {
        if (grade > 0) {
            ideal.push_back(grade);
        }
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) {
        idcg += gain(ideal[r]) / std::log2(static_cast<double>(r) + 2.0);
    }
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

inline double mrr_query(std::span<ScoredDoc const> ranked, std::map<std::string, int> const &judgments,
                        std::size_t k)
{
    for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
        if (detail::grade_of(judgments, ranked[r].doc_id) > 0) {
            return 1.0 / static_cast<double>(r + 1);
        }
    }
    return 0.0;
}

inline double recall_query(std::span<ScoredDoc const> ranked, std::map<std::string, int> const &judgments,
                           std::size_t k)
{
    std::size_t relevant = 0;
    for (auto const &[doc, grade] : judgments) {
        relevant += grade > 0 ? 1 : 0;
    }
    if (relevant == 0) {
        return 0.0;
    }
    std::size_t found = 0;
    for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
        found += detail::grade_of(judgments, ranked[r].doc_id) > 0 ? 1 : 0;
    }
    return static_cast<double>(found) / static_cast<double>(relevant);
}

inline double ndcg_at_k(RunFile const &run, Qrels const &qrels, std::size_t k)
{
    return detail::average(run, qrels, k, [](auto const &r, auto const &j, std::size_t kk) {
        return ndcg_query(r, j, kk);
    });
}

inline double mrr_at_k(RunFile const &run, Qrels const &qrels, std::size_t k)
{
    return detail::average(run, qrels, k, [](auto const &r, auto const &j, std::size_t kk) {
        return mrr_query(r, j, kk);
    });
}

inline double recall_at_k(RunFile const &run, Qrels const &qrels, std::size_t k)
{
    return detail::average(run, qrels, k, [](auto const &r, auto const &j, std::size_t kk) {
        return recall_query(r, j, kk);
    });
}

/// ndcg@k, mrr@k and recall@k keyed by name.
inline std::map<std::string, double> evaluate(RunFile const &run, Qrels const &qrels, std::size_t k)
{
    auto suffix = "@" + std::to_string(k);
    return {{"ndcg" + suffix, ndcg_at_k(run, qrels, k)},
            {"mrr" + suffix, mrr_at_k(run, qrels, k)},
            {"recall" + suffix, recall_at_k(run, qrels, k)}};
}

/// Mean number of non-zero entries per vector.
template <typename Vectors>
double expansion_rate(Vectors const &vectors)
{
    std::size_t n = 0;
    std::size_t nnz = 0;
    for (auto const &v : vectors) {
        ++n;
        nnz += v.nnz();
    }
    if (n == 0) {
        throw InvalidArgument("expansion_rate: empty stream");
    }
    return static_cast<double>(nnz) / static_cast<double>(n);
}

// TREC formats ---------------------------------------------------------------

/// `<query_id> 0 <doc_id> <grade>` per line.
inline Qrels read_qrels(std::istream &in, std::string const &name = "qrels")
{
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ls(line);
        std::string qid;
        std::string iter;
        std::string doc;
        long grade = 0;
        std::string extra;
        if (!(ls >> qid >> iter >> doc >> grade) || (ls >> extra) || grade < 0) {
            throw FormatError(name + ":" + std::to_string(lineno) + ": malformed qrels line");
        }
        if (!qrels[qid].emplace(doc, static_cast<int>(grade)).second) {
            throw FormatError(name + ":" + std::to_string(lineno) + ": duplicate judgment for (" + qid
                              + ", " + doc + ")");
        }
    }
    return qrels;
}

inline void write_qrels(Qrels const &qrels, std::ostream &out)
{
    for (auto const &[qid, docs] : qrels) {
        for (auto const &[doc, grade] : docs) {
            out << qid << " 0 " << doc << ' ' << grade << '\n';
        }
    }
}

inline void write_run_lines(std::string const &query_id, std::span<ScoredDoc const> ranked,
                            std::string const &tag, std::ostream &out)
{
    char buf[64];
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%.9g", ranked[r].score);
        out << query_id << " Q0 " << ranked[r].doc_id << ' ' << (r + 1) << ' ' << buf << ' ' << tag << '\n';
    }
}

/// `<query_id> Q0 <doc_id> <rank> <score> <run_tag>` per line. Ranks of each
/// query must be contiguous from 1 and scores non-increasing with rank.
inline RunFile read_run(std::istream &in, std::string const &name = "run")
{
    std::map<std::string, std::vector<std::pair<std::size_t, ScoredDoc>>> raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ls(line);
        std::string qid;
        std::string q0;
        std::string doc;
        std::size_t rank = 0;
        double score = 0.0;
        std::string tag;
        if (!(ls >> qid >> q0 >> doc >> rank >> score >> tag)) {
            throw FormatError(name + ":" + std::to_string(lineno) + ": malformed run line");
        }
        raw[qid].push_back({rank, {doc, score}});
    }
    RunFile run;
    for (auto &[qid, rows] : raw) {
        std::sort(rows.begin(), rows.end(), [](auto const &a, auto const &b) { return a.first < b.first; });
        auto &ranked = run[qid];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].first != i + 1) {
                throw FormatError(name + ": ranks of query " + qid + " are not contiguous from 1");
            }
            if (i > 0 && rows[i].second.score > rows[i - 1].second.score) {
                throw FormatError(name + ": scores of query " + qid + " increase with rank");
            }
            ranked.push_back(std::move(rows[i].second));
        }
    }
    return run;
}

}  // namespace lsr::eval
