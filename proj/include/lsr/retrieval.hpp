#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "lsr/error.hpp"
#include "lsr/idf.hpp"
#include "lsr/index.hpp"
#include "lsr/scoring.hpp"
#include "lsr/sparse_vector.hpp"

namespace lsr {

struct TwoPhaseParams {
    /// Phase-1 keeps query tokens with idf >= threshold. Unset: median query-token IDF.
    std::optional<double> idf_threshold;
    std::size_t window = 100;
};

struct SearchParams {
    std::size_t k = 10;
    ScoreMode mode = ScoreMode::IdfWeighted;
    std::optional<TwoPhaseParams> two_phase;

    void validate() const
    {
        if (k == 0) {
            throw InvalidArgument("search: k must be positive");
        }
        if (two_phase && two_phase->window < k) {
            throw InvalidArgument("search: two-phase window must be >= k");
        }
    }
};

/// Per-query diagnostics of a two-phase search.
struct SearchStats {
    std::vector<TokenId> phase1_tokens;
    double threshold = 0.0;
    std::vector<DocOrdinal> candidates;  ///< phase-1 candidate set, in phase-1 rank order
    std::size_t topped_up = 0;           ///< candidates admitted with zero phase-1 score
    std::size_t fallbacks = 0;           ///< 1 when no token passed the threshold
};

namespace detail {

struct Hit {
    double score;
    DocOrdinal doc;
};

/// Heap ordering: `lhs` ranks strictly before `rhs`.
struct HitOrder {
    InvertedIndex const *index;

    bool operator()(Hit const &lhs, Hit const &rhs) const
    {
        if (lhs.score != rhs.score) {
            return lhs.score > rhs.score;
        }
        return index->doc_id(lhs.doc) < index->doc_id(rhs.doc);
    }
};

/// Bounded collector keeping the best `capacity` hits.
class TopK {
  public:
    TopK(InvertedIndex const &index, std::size_t capacity)
        : m_order{&index}, m_capacity(capacity), m_heap(m_order)
    {}

    void push(Hit hit)
    {
        if (m_heap.size() < m_capacity) {
            m_heap.push(hit);
        } else if (m_order(hit, m_heap.top())) {
            m_heap.pop();
            m_heap.push(hit);
        }
    }

    /// Drains into ranked order.
    std::vector<Hit> take()
    {
        std::vector<Hit> out;
        out.reserve(m_heap.size());
        while (!m_heap.empty()) {
            out.push_back(m_heap.top());
            m_heap.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

  private:
    HitOrder m_order;
    std::size_t m_capacity;
    std::priority_queue<Hit, std::vector<Hit>, HitOrder> m_heap;
};

struct Cursor {
    TokenId token;
    double query_weight;
    double idf;
    std::span<Posting const> list;
    std::size_t pos = 0;

    [[nodiscard]] bool done() const { return pos >= list.size(); }
    [[nodiscard]] DocOrdinal doc() const { return list[pos].doc; }
};

inline std::vector<Cursor> open_cursors(InvertedIndex const &index,
                                        std::span<SparseEntry<double> const> terms, ScoreMode mode,
                                        IdfTable const *idf)
{
    std::vector<Cursor> cursors;
    for (auto const &e : terms) {
        auto list = index.postings(e.token);
        if (list.empty()) {
            continue;
        }
        double w = mode == ScoreMode::IdfWeighted ? idf->lookup(e.token) : 1.0;
        cursors.push_back({e.token, e.weight, w, list});
    }
    return cursors;
}

/// Per-term contribution, written to match `match_score` operation for operation.
inline double term_score(double query_weight, float doc_weight, double idf, ScoreMode mode)
{
    double term = query_weight * static_cast<double>(doc_weight);
    if (mode == ScoreMode::IdfWeighted) {
        term *= idf;
    }
    return term;
}

/// Document-at-a-time traversal: every document in the union of the cursors'
/// lists is scored exactly once, summing contributions in token order.
inline std::vector<Hit> daat(InvertedIndex const &index, std::vector<Cursor> cursors,
                             ScoreMode mode, std::size_t capacity)
{
    TopK top(index, capacity);
    constexpr auto kEnd = std::numeric_limits<DocOrdinal>::max();
    while (true) {
        DocOrdinal current = kEnd;
        for (auto const &c : cursors) {
            if (!c.done()) {
                current = std::min(current, c.doc());
            }
        }
        if (current == kEnd) {
            break;
        }
        double score = 0.0;
        for (auto &c : cursors) {
            if (!c.done() && c.doc() == current) {
                score += term_score(c.query_weight, c.list[c.pos].weight, c.idf, mode);
                ++c.pos;
            }
        }
        if (score > 0.0) {
            top.push({score, current});
        }
    }
    return top.take();
}

inline std::vector<ScoredDoc> to_scored(InvertedIndex const &index, std::vector<Hit> const &hits)
{
    std::vector<ScoredDoc> out;
    out.reserve(hits.size());
    for (auto const &h : hits) {
        out.push_back({index.doc_id(h.doc), h.score});
    }
    return out;
}

inline double median(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    auto n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace detail

/// Exact top-k retrieval, ranked by score then doc_id.
inline std::vector<ScoredDoc> search(InvertedIndex const &index, SparseVector const &query,
                                     SearchParams const &params, IdfTable const *idf = nullptr)
{
    params.validate();
    require_idf(params.mode, idf);
    if (query.empty()) {
        return {};
    }
    auto cursors = detail::open_cursors(index, query.entries(), params.mode, idf);
    return detail::to_scored(index, detail::daat(index, std::move(cursors), params.mode, params.k));
}

/// High-IDF prefilter followed by a full rescore of the candidate window.
///
/// Phase 1 traverses only the postings of query tokens with idf >= threshold
/// and keeps the best `window` documents. If fewer than `window` documents
/// match those tokens, the window is filled with documents that match only the
/// remaining tokens (phase-1 score 0, ordered by doc_id). Phase 2 rescores the
/// candidates with every query token. When no token passes the threshold the
/// call degrades to `search` and `stats->fallbacks` is set.
inline std::vector<ScoredDoc> search_two_phase(InvertedIndex const &index, SparseVector const &query,
                                               SearchParams const &params, IdfTable const &idf,
                                               SearchStats *stats = nullptr)
{
    params.validate();
    if (!params.two_phase) {
        throw ConfigError("search_two_phase requires two-phase parameters");
    }
    SearchStats local;
    SearchStats &st = stats ? *stats : local;
    st = SearchStats{};
    if (query.empty()) {
        return {};
    }

    std::vector<double> query_idf;
    for (auto const &e : query) {
        query_idf.push_back(idf.lookup(e.token));
    }
    st.threshold = params.two_phase->idf_threshold.value_or(detail::median(query_idf));

    std::vector<SparseEntry<double>> high;
    std::vector<SparseEntry<double>> low;
    for (std::size_t i = 0; i < query.nnz(); ++i) {
        auto const &e = query.entries()[i];
        (query_idf[i] >= st.threshold ? high : low).push_back(e);
    }
    if (high.empty()) {
        st.fallbacks = 1;
        return search(index, query, params, &idf);
    }
    for (auto const &e : high) {
        st.phase1_tokens.push_back(e.token);
    }

    auto const window = params.two_phase->window;
    auto phase1 = detail::daat(index, detail::open_cursors(index, high, params.mode, &idf),
                               params.mode, window);
    std::vector<DocOrdinal> candidates;
    candidates.reserve(phase1.size());
    for (auto const &h : phase1) {
        candidates.push_back(h.doc);
    }

    if (candidates.size() < window && !low.empty()) {
        std::vector<DocOrdinal> seen = candidates;
        std::sort(seen.begin(), seen.end());
        std::vector<DocOrdinal> extra;
        for (auto const &e : low) {
            for (auto const &p : index.postings(e.token)) {
                if (!std::binary_search(seen.begin(), seen.end(), p.doc)) {
                    extra.push_back(p.doc);
                }
            }
        }
        std::sort(extra.begin(), extra.end());
        extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
        std::sort(extra.begin(), extra.end(), [&index](DocOrdinal a, DocOrdinal b) {
            return index.doc_id(a) < index.doc_id(b);
        });
        auto room = window - candidates.size();
        if (extra.size() > room) {
            extra.resize(room);
        }
        st.topped_up = extra.size();
        candidates.insert(candidates.end(), extra.begin(), extra.end());
    }

    detail::TopK top(index, params.k);
    for (auto doc : candidates) {
        double score = 0.0;
        for (auto const &e : query) {
            if (float w = index.weight(e.token, doc); w > 0.0F) {
                score += detail::term_score(e.weight, w, idf.lookup(e.token), params.mode);
            }
        }
        if (score > 0.0) {
            top.push({score, doc});
        }
    }
    st.candidates = std::move(candidates);
    return detail::to_scored(index, top.take());
}

/// Dispatches on `params.two_phase`.
inline std::vector<ScoredDoc> run_search(InvertedIndex const &index, SparseVector const &query,
                                         SearchParams const &params, IdfTable const *idf,
                                         SearchStats *stats = nullptr)
{
    if (params.two_phase) {
        if (idf == nullptr) {
            throw ConfigError("two-phase search requires an IDF table");
        }
        return search_two_phase(index, query, params, *idf, stats);
    }
    return search(index, query, params, idf);
}

}  // namespace lsr
