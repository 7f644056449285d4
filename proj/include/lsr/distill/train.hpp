#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "lsr/distill/encoder.hpp"
#include "lsr/distill/ensemble.hpp"
#include "lsr/distill/loss.hpp"
#include "lsr/distill/mining.hpp"
#include "lsr/distill/teachers.hpp"
#include "lsr/error.hpp"
#include "lsr/idf.hpp"
#include "lsr/index.hpp"
#include "lsr/vocabulary.hpp"

namespace lsr::distill {

struct TrainingPair {
    std::string query_id;
    std::vector<std::string> query_tokens;
    SparseVector query;
    DocOrdinal positive = 0;
};

/// Externally computed teacher scores for one query.
struct ReplayEntry {
    std::vector<DocOrdinal> docs;
    TeacherScores teacher;
};

struct TrainingData {
    Vocabulary vocab;
    std::vector<std::string> doc_ids;
    std::vector<SparseVector> docs;  ///< token counts
    std::vector<TrainingPair> pairs;
    std::unordered_map<std::string, ReplayEntry> replay;  ///< keyed by query_id
};

struct Schedule {
    std::size_t steps = 300;
    std::size_t batch_size = 4;
    std::size_t negatives_per_query = 3;
    double learning_rate = 0.05;
    std::uint64_t seed = 1;
    std::size_t mining_depth = 20;
};

struct LogRow {
    std::size_t step = 0;
    double loss_total = 0.0;
    double loss_rank = 0.0;
    double loss_flops = 0.0;  ///< unscaled FLOPS regularizer
    double mean_nnz = 0.0;
};

struct TrainResult {
    EncoderParams params;
    std::vector<LogRow> log;
};

inline void write_training_log(std::vector<LogRow> const &rows, std::ostream &out)
{
    out << "step,loss_total,loss_rank,loss_flops,mean_nnz\n";
    char buf[256];
    for (auto const &r : rows) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.6g\n", r.step, r.loss_total,
                      r.loss_rank, r.loss_flops, r.mean_nnz);
        out << buf;
    }
}

namespace detail {

/// Draws up to `count` distinct elements of `pool`, in draw order.
template <typename T, typename Rng>
std::vector<T> draw_without_replacement(std::vector<T> pool, std::size_t count, Rng &rng)
{
    count = std::min(count, pool.size());
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace detail

/// Gradient-descent distillation of the toy encoder.
///
/// Hard negatives come from the replayed teacher lists when present, otherwise
/// from the top `mining_depth` documents retrieved by the initial encoder.
/// Teacher scores come from replay or from the oracle teacher pair.
inline TrainResult train(TrainingData const &data, IdfTable const &idf, LossConfig const &cfg,
                         Schedule const &schedule, std::optional<EncoderParams> init = std::nullopt)
{
    cfg.validate();
    if (data.pairs.empty()) {
        throw InvalidArgument("train: no training pairs");
    }
    if (data.docs.size() < 2) {
        throw InvalidArgument("train: corpus needs at least two documents");
    }
    if (schedule.batch_size == 0 || schedule.negatives_per_query == 0) {
        throw InvalidArgument("train: batch_size and negatives_per_query must be positive");
    }
    auto const vocab = data.vocab.size();
    TrainResult result;
    result.params = init ? std::move(*init) : EncoderParams::identity(vocab);
    if (result.params.vocab_size() != vocab) {
        throw InvalidArgument("train: initial parameters do not match the vocabulary");
    }
    if (schedule.steps == 0) {
        return result;
    }

    // Negative pools, fixed before training starts.
    std::vector<std::vector<DocOrdinal>> pools(data.pairs.size());
    std::vector<MiningQuery> to_mine;
    std::vector<std::size_t> mined_for;
    for (std::size_t p = 0; p < data.pairs.size(); ++p) {
        auto const &pair = data.pairs[p];
        if (pair.positive >= data.docs.size()) {
            throw InvalidArgument("train: positive of query " + pair.query_id + " outside corpus");
        }
        if (auto it = data.replay.find(pair.query_id); it != data.replay.end()) {
            auto const &docs = it->second.docs;
            if (std::find(docs.begin(), docs.end(), pair.positive) == docs.end()) {
                throw InvalidArgument("train: replayed teacher list of " + pair.query_id
                                      + " does not contain its positive");
            }
            for (auto d : docs) {
                if (d != pair.positive) {
                    pools[p].push_back(d);
                }
            }
        } else {
            to_mine.push_back({pair.query_id, pair.query_tokens, pair.query, data.doc_ids[pair.positive]});
            mined_for.push_back(p);
        }
    }
    if (!to_mine.empty()) {
        auto mode = cfg.idf_aware ? ScoreMode::IdfWeighted : ScoreMode::Plain;
        auto mined = mine_with_encoder(result.params, data.vocab, data.doc_ids, data.docs, to_mine,
                                       schedule.mining_depth, mode, &idf);
        std::unordered_map<std::string, DocOrdinal> lookup;
        for (std::size_t i = 0; i < data.doc_ids.size(); ++i) {
            lookup.emplace(data.doc_ids[i], static_cast<DocOrdinal>(i));
        }
        for (std::size_t m = 0; m < mined.size(); ++m) {
            auto p = mined_for[m];
            for (auto const &c : mined[m].candidates) {
                auto ord = lookup.at(c.doc_id);
                if (ord != data.pairs[p].positive) {
                    pools[p].push_back(ord);
                }
            }
        }
    }

    OracleTeacherPair oracle(vocab, idf, mix_seed(schedule.seed, 0x7eac));
    std::mt19937_64 rng(mix_seed(schedule.seed));
    std::vector<std::size_t> pair_ids(data.pairs.size());
    std::iota(pair_ids.begin(), pair_ids.end(), std::size_t{0});
    std::vector<DocOrdinal> all_docs(data.docs.size());
    std::iota(all_docs.begin(), all_docs.end(), DocOrdinal{0});

    for (std::size_t step = 0; step < schedule.steps; ++step) {
        auto chosen = detail::draw_without_replacement(pair_ids, schedule.batch_size, rng);
        std::vector<TrainingBatch> batches;
        for (auto p : chosen) {
            auto const &pair = data.pairs[p];
            auto negatives = detail::draw_without_replacement(pools[p], schedule.negatives_per_query, rng);
            bool const replayed = data.replay.contains(pair.query_id);
            // Replayed lists only carry teacher scores for their own documents.
            if (negatives.size() < schedule.negatives_per_query && !replayed) {
                std::vector<DocOrdinal> rest;
                for (auto d : all_docs) {
                    if (d != pair.positive && std::find(negatives.begin(), negatives.end(), d) == negatives.end()) {
                        rest.push_back(d);
                    }
                }
                auto extra = detail::draw_without_replacement(
                    rest, schedule.negatives_per_query - negatives.size(), rng);
                negatives.insert(negatives.end(), extra.begin(), extra.end());
            }
            std::vector<DocOrdinal> cands{pair.positive};
            cands.insert(cands.end(), negatives.begin(), negatives.end());

            TrainingBatch batch;
            batch.query = pair.query;
            batch.positive_index = 0;
            for (auto d : cands) {
                batch.candidates.push_back(data.docs[d]);
            }
            if (auto it = data.replay.find(pair.query_id); it != data.replay.end()) {
                std::vector<std::size_t> positions;
                for (auto d : cands) {
                    auto const &docs = it->second.docs;
                    auto at = std::find(docs.begin(), docs.end(), d);
                    positions.push_back(static_cast<std::size_t>(at - docs.begin()));
                }
                batch.teacher = it->second.teacher.select(positions);
            } else {
                std::vector<SparseVector const *> docs;
                std::vector<std::uint64_t> keys;
                for (auto d : cands) {
                    docs.push_back(&data.docs[d]);
                    keys.push_back(d);
                }
                batch.teacher = oracle.score(pair.query, p, docs, keys, 0);
            }
            batches.push_back(std::move(batch));
        }

        auto lg = step_loss_and_grad(result.params, batches, idf, cfg);
        EncoderParams next = result.params;
        for (std::size_t i = 0; i < next.size(); ++i) {
            next.flat(i) -= schedule.learning_rate * lg.grad.flat(i);
        }
        if (!next.all_finite()) {
            throw NumericError("train: parameters became non-finite at step " + std::to_string(step));
        }
        result.params = std::move(next);
        result.log.push_back({step, lg.total, lg.rank, lg.flops, lg.mean_nnz});
    }
    return result;
}

/// Encodes every document of the corpus.
inline std::vector<SparseVector> encode_corpus(EncoderParams const &params, std::vector<SparseVector> const &docs)
{
    std::vector<SparseVector> out;
    out.reserve(docs.size());
    for (auto const &d : docs) {
        out.push_back(encode_document(params, d));
    }
    return out;
}

}  // namespace lsr::distill
