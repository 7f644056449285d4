#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lsr/error.hpp"
#include "lsr/idf.hpp"
#include "lsr/sparse_vector.hpp"

namespace lsr {

enum class ScoreMode {
    Plain,        ///< sum_t q_t * d_t
    IdfWeighted,  ///< sum_t idf(t) * q_t * d_t
};

inline std::string_view to_string(ScoreMode mode)
{
    return mode == ScoreMode::Plain ? "plain" : "idf";
}

inline ScoreMode parse_score_mode(std::string_view text)
{
    if (text == "plain") {
        return ScoreMode::Plain;
    }
    if (text == "idf" || text == "idf_weighted") {
        return ScoreMode::IdfWeighted;
    }
    throw ConfigError("unknown score mode: " + std::string(text) + " (expected plain|idf)");
}

inline void require_idf(ScoreMode mode, IdfTable const *idf)
{
    if (mode == ScoreMode::IdfWeighted && idf == nullptr) {
        throw ConfigError("IDF-weighted scoring requires an IDF table");
    }
}

/// Additive match score over the tokens shared by `query` and `doc`.
/// Accumulates in double regardless of the storage precision of either side.
template <typename QW, typename DW>
double match_score(BasicSparseVector<QW> const &query, BasicSparseVector<DW> const &doc,
                   ScoreMode mode, IdfTable const *idf = nullptr)
{
    require_idf(mode, idf);
    auto q = query.entries();
    auto d = doc.entries();
    double score = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < q.size() && j < d.size()) {
        if (q[i].token < d[j].token) {
            ++i;
        } else if (d[j].token < q[i].token) {
            ++j;
        } else {
            double term = static_cast<double>(q[i].weight) * static_cast<double>(d[j].weight);
            if (mode == ScoreMode::IdfWeighted) {
                term *= idf->lookup(q[i].token);
            }
            score += term;
            ++i;
            ++j;
        }
    }
    return score;
}

/// Sum over the vocabulary of the squared mean activation across the batch.
template <typename W>
double flops_regularizer(std::span<BasicSparseVector<W> const> batch, std::size_t vocab_size)
{
    if (batch.empty()) {
        throw InvalidArgument("flops_regularizer: empty batch");
    }
    std::vector<double> sums(vocab_size, 0.0);
    for (auto const &doc : batch) {
        for (auto const &e : doc) {
            if (e.token.value >= vocab_size) {
                throw InvalidArgument("flops_regularizer: token outside vocabulary");
            }
            sums[e.token.value] += static_cast<double>(e.weight);
        }
    }
    auto n = static_cast<double>(batch.size());
    double total = 0.0;
    for (double s : sums) {
        double mean = s / n;
        total += mean * mean;
    }
    return total;
}

template <typename W>
double flops_regularizer(std::vector<BasicSparseVector<W>> const &batch, std::size_t vocab_size)
{
    return flops_regularizer(std::span<BasicSparseVector<W> const>(batch), vocab_size);
}

/// Expected number of multiply-accumulates per (query, document) pair:
/// mean over queries of sum_{t in q} df(t) / corpus_size.
/// Tokens beyond `df` count as unindexed.
template <typename W>
double theoretical_flops(std::span<BasicSparseVector<W> const> queries,
                         std::span<std::uint32_t const> df, std::uint64_t corpus_size)
{
    if (corpus_size == 0) {
        throw InvalidArgument("theoretical_flops: corpus_size must be positive");
    }
    if (queries.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (auto const &q : queries) {
        std::uint64_t ops = 0;
        for (auto const &e : q) {
            if (e.token.value < df.size()) {
                ops += df[e.token.value];
            }
        }
        total += static_cast<double>(ops) / static_cast<double>(corpus_size);
    }
    return total / static_cast<double>(queries.size());
}

template <typename W>
double theoretical_flops(std::vector<BasicSparseVector<W>> const &queries,
                         std::vector<std::uint32_t> const &df, std::uint64_t corpus_size)
{
    return theoretical_flops(std::span<BasicSparseVector<W> const>(queries),
                             std::span<std::uint32_t const>(df), corpus_size);
}

}  // namespace lsr
