#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "lsr/distill/encoder.hpp"
#include "lsr/idf.hpp"
#include "lsr/index.hpp"
#include "lsr/retrieval.hpp"

namespace lsr::distill {

struct MiningQuery {
    std::string query_id;
    std::vector<std::string> query_tokens;
    SparseVector query;
    std::string positive_id;
};

struct MinedCandidates {
    std::string query_id;
    std::vector<std::string> query_tokens;
    std::string positive_id;
    /// 1-based rank of the positive among the retrieved (score > 0) documents, if retrieved.
    std::optional<std::size_t> positive_rank;
    /// Positive first, then the remaining top-M documents in rank order.
    std::vector<ScoredDoc> candidates;
};

/// Top-M documents per query by exact match score. When fewer than M documents
/// score above zero the list is completed with zero-score documents in doc_id
/// order, which is the brute-force ranking with the standard tie-break.
inline std::vector<MinedCandidates> mine_hard_negatives(InvertedIndex const &index,
                                                        std::span<MiningQuery const> queries,
                                                        std::size_t depth, ScoreMode mode,
                                                        IdfTable const *idf)
{
    std::vector<MinedCandidates> out;
    if (depth == 0) {
        throw InvalidArgument("mine_hard_negatives: depth M must be positive");
    }
    std::vector<std::string> sorted_ids = index.doc_ids();
    std::sort(sorted_ids.begin(), sorted_ids.end());

    SearchParams params;
    params.k = depth;
    params.mode = mode;
    for (auto const &q : queries) {
        MinedCandidates mined{q.query_id, q.query_tokens, q.positive_id, std::nullopt, {}};
        auto hits = search(index, q.query, params, idf);
        for (std::size_t r = 0; r < hits.size(); ++r) {
            if (hits[r].doc_id == q.positive_id) {
                mined.positive_rank = r + 1;
            }
        }
        if (hits.size() < depth) {
            std::unordered_set<std::string> present;
            for (auto const &h : hits) {
                present.insert(h.doc_id);
            }
            for (auto const &id : sorted_ids) {
                if (hits.size() >= depth) {
                    break;
                }
                if (!present.contains(id)) {
                    hits.push_back({id, 0.0});
                }
            }
        }
        auto pos = std::find_if(hits.begin(), hits.end(),
                                [&](ScoredDoc const &d) { return d.doc_id == q.positive_id; });
        if (pos != hits.end()) {
            std::rotate(hits.begin(), pos, pos + 1);
        } else {
            hits.insert(hits.begin(), ScoredDoc{q.positive_id, 0.0});
        }
        mined.candidates = std::move(hits);
        out.push_back(std::move(mined));
    }
    return out;
}

/// Mines with an encoder: documents are encoded, indexed, then searched.
inline std::vector<MinedCandidates> mine_with_encoder(EncoderParams const &params, Vocabulary const &vocab,
                                                      std::vector<std::string> const &doc_ids,
                                                      std::vector<SparseVector> const &doc_counts,
                                                      std::span<MiningQuery const> queries,
                                                      std::size_t depth, ScoreMode mode,
                                                      IdfTable const *idf)
{
    IndexBuilder builder(vocab);
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        builder.add(doc_ids[i], encode_document(params, doc_counts[i]));
    }
    auto index = std::move(builder).build();
    return mine_hard_negatives(index, queries, depth, mode, idf);
}

/// Keeps the entries whose positive was retrieved within the top `k`.
inline std::vector<MinedCandidates> consistency_filter(std::span<MinedCandidates const> mined,
                                                       std::size_t k = 10)
{
    std::vector<MinedCandidates> kept;
    for (auto const &m : mined) {
        if (m.positive_rank && *m.positive_rank <= k) {
            kept.push_back(m);
        }
    }
    return kept;
}

}  // namespace lsr::distill
