#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lsr/distill/encoder.hpp"
#include "lsr/distill/ensemble.hpp"
#include "lsr/error.hpp"
#include "lsr/idf.hpp"
#include "lsr/scoring.hpp"
#include "lsr/sparse_vector.hpp"

namespace lsr::distill {

struct LossConfig {
    double lambda_d = 1e-7;  ///< FLOPS coefficient
    double scale_S = 10.0;   ///< rescales the normalized teacher ensemble
    bool idf_aware = true;
    EnsembleMethod ensemble = EnsembleMethod::NormAdd;

    static LossConfig pretrain() { return {1e-7, 10.0, true, EnsembleMethod::NormAdd}; }
    static LossConfig finetune() { return {0.02, 30.0, true, EnsembleMethod::NormAdd}; }

    void validate() const
    {
        if (!(lambda_d >= 0.0) || !std::isfinite(lambda_d)) {
            throw ConfigError("lambda_d must be finite and >= 0");
        }
        if (!(scale_S > 0.0) || !std::isfinite(scale_S)) {
            throw ConfigError("scale_S must be finite and > 0");
        }
    }
};

/// One query with its candidate documents (token counts) and teacher scores.
struct TrainingBatch {
    SparseVector query;
    std::vector<SparseVector> candidates;
    TeacherScores teacher;
    std::size_t positive_index = 0;

    void validate() const
    {
        if (candidates.size() < 2) {
            throw InvalidArgument("training batch needs at least two candidates");
        }
        if (positive_index >= candidates.size()) {
            throw InvalidArgument("training batch positive_index out of range");
        }
        teacher.validate();
        if (teacher.candidates() != candidates.size()) {
            throw InvalidArgument("teacher scores not aligned with candidates");
        }
    }
};

inline double log_sum_exp(std::span<double const> x)
{
    double m = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    for (double v : x) {
        sum += std::exp(v - m);
    }
    return m + std::log(sum);
}

inline std::vector<double> softmax(std::span<double const> x)
{
    double lse = log_sum_exp(x);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - lse);
    }
    return out;
}

/// KL(softmax(teacher) || softmax(student)), stabilized with log-sum-exp.
inline double ranking_loss(std::span<double const> student, std::span<double const> teacher)
{
    if (student.size() != teacher.size()) {
        throw InvalidArgument("ranking_loss: length mismatch (" + std::to_string(student.size())
                              + " vs " + std::to_string(teacher.size()) + ")");
    }
    if (student.size() < 2) {
        throw InvalidArgument("ranking_loss: need at least two scores");
    }
    double lse_t = log_sum_exp(teacher);
    double lse_s = log_sum_exp(student);
    double kl = 0.0;
    for (std::size_t i = 0; i < student.size(); ++i) {
        double log_p = teacher[i] - lse_t;
        double p = std::exp(log_p);
        if (p > 0.0) {
            kl += p * (log_p - (student[i] - lse_s));
        }
    }
    return std::max(kl, 0.0);
}

inline double ranking_loss(std::vector<double> const &student, std::vector<double> const &teacher)
{
    return ranking_loss(std::span<double const>(student), std::span<double const>(teacher));
}

/// Query-side weights of every token: idf(t) * q_t when IDF-aware, q_t otherwise.
inline std::vector<double> query_token_weights(SparseVector const &query, IdfTable const &idf,
                                               bool idf_aware)
{
    std::vector<double> out;
    out.reserve(query.nnz());
    for (auto const &e : query) {
        out.push_back(idf_aware ? e.weight * idf.lookup(e.token) : e.weight);
    }
    return out;
}

/// Score of a dense activation vector against a query, summing in token order
/// exactly as `match_score` does.
inline double dense_match(SparseVector const &query, std::span<double const> activations,
                          IdfTable const &idf, bool idf_aware)
{
    double score = 0.0;
    for (auto const &e : query) {
        if (e.token.value >= activations.size() || activations[e.token.value] == 0.0) {
            continue;
        }
        double term = e.weight * activations[e.token.value];
        if (idf_aware) {
            term *= idf.lookup(e.token);
        }
        score += term;
    }
    return score;
}

inline std::vector<double> student_scores(EncoderParams const &params, TrainingBatch const &batch,
                                          IdfTable const &idf, bool idf_aware)
{
    auto mode = idf_aware ? ScoreMode::IdfWeighted : ScoreMode::Plain;
    std::vector<double> out;
    out.reserve(batch.candidates.size());
    for (auto const &doc : batch.candidates) {
        out.push_back(match_score(batch.query, encode_document(params, doc), mode, &idf));
    }
    return out;
}

/// One query's candidates expressed directly as dense activations.
struct ActivationBatch {
    SparseVector query;
    std::vector<std::vector<double>> activations;  ///< [candidate][token]
    std::vector<double> targets;                   ///< assembled teacher scores
};

/// Loss and gradients with respect to document activations d_{i,t}.
struct ActivationGrads {
    double rank = 0.0;   ///< mean KL over queries
    double flops = 0.0;  ///< FLOPS regularizer over every candidate in the step
    /// [query][candidate][token] partial derivatives of `rank` and of `flops`.
    std::vector<std::vector<std::vector<double>>> rank_grad;
    std::vector<std::vector<std::vector<double>>> flops_grad;
    std::vector<std::vector<double>> student_softmax;
    std::vector<std::vector<double>> teacher_softmax;
};

/// Ranking gradient per document: dL/ds_i = softmax(student)_i - softmax(teacher)_i,
/// then ds_i/dd_{i,t} = idf(t) * q_t (IDF-aware) or q_t. The ranking loss is
/// averaged over queries. FLOPS gradient: dL/dw_{i,j} = (2 / N^2) sum_i' w_{i',j},
/// N counting every candidate of every query.
inline ActivationGrads activation_gradients(std::span<ActivationBatch const> batches,
                                            IdfTable const &idf, bool idf_aware, std::size_t vocab)
{
    ActivationGrads out;
    std::size_t total_docs = 0;
    for (auto const &b : batches) {
        total_docs += b.activations.size();
    }
    if (batches.empty() || total_docs == 0) {
        throw InvalidArgument("activation_gradients: empty step");
    }
    auto const nq = static_cast<double>(batches.size());
    auto const n = static_cast<double>(total_docs);

    std::vector<double> column_sums(vocab, 0.0);
    for (auto const &b : batches) {
        for (auto const &act : b.activations) {
            for (std::size_t j = 0; j < vocab; ++j) {
                column_sums[j] += act[j];
            }
        }
    }
    for (double s : column_sums) {
        out.flops += (s / n) * (s / n);
    }

    for (auto const &b : batches) {
        auto const nc = b.activations.size();
        std::vector<double> scores(nc);
        for (std::size_t i = 0; i < nc; ++i) {
            scores[i] = dense_match(b.query, b.activations[i], idf, idf_aware);
        }
        out.rank += ranking_loss(scores, b.targets) / nq;
        auto q = softmax(scores);
        auto p = softmax(b.targets);
        auto qw = query_token_weights(b.query, idf, idf_aware);

        std::vector<std::vector<double>> rg(nc, std::vector<double>(vocab, 0.0));
        std::vector<std::vector<double>> fg(nc, std::vector<double>(vocab, 0.0));
        for (std::size_t i = 0; i < nc; ++i) {
            double ds = (q[i] - p[i]) / nq;
            std::size_t k = 0;
            for (auto const &e : b.query) {
                if (e.token.value < vocab) {
                    rg[i][e.token.value] = qw[k] * ds;
                }
                ++k;
            }
            for (std::size_t j = 0; j < vocab; ++j) {
                fg[i][j] = 2.0 * column_sums[j] / (n * n);
            }
        }
        out.rank_grad.push_back(std::move(rg));
        out.flops_grad.push_back(std::move(fg));
        out.student_softmax.push_back(std::move(q));
        out.teacher_softmax.push_back(std::move(p));
    }
    return out;
}

struct LossAndGrad {
    double total = 0.0;
    double rank = 0.0;
    double flops = 0.0;       ///< unscaled regularizer value
    double mean_nnz = 0.0;    ///< over every candidate in the step
    EncoderParams grad;
};

/// total = mean_q KL_q + lambda_d * FLOPS(all candidates), with the exact
/// gradient through the encoder. Throws NumericError on non-finite results.
inline LossAndGrad step_loss_and_grad(EncoderParams const &params, std::span<TrainingBatch const> batches,
                                      IdfTable const &idf, LossConfig const &cfg)
{
    cfg.validate();
    auto const vocab = params.vocab_size();
    std::vector<ActivationBatch> act_batches;
    std::vector<std::vector<std::vector<double>>> pre;  // [query][candidate][token]
    act_batches.reserve(batches.size());
    std::size_t nnz = 0;
    std::size_t docs = 0;
    for (auto const &b : batches) {
        b.validate();
        ActivationBatch ab;
        ab.query = b.query;
        ab.targets = combine_teachers(b.teacher, cfg.ensemble, cfg.scale_S);
        std::vector<std::vector<double>> z_b;
        for (auto const &doc : b.candidates) {
            auto z = pre_activations(params, doc);
            std::vector<double> w(vocab);
            for (std::size_t j = 0; j < vocab; ++j) {
                w[j] = activation(z[j]);
                nnz += w[j] > 0.0 ? 1 : 0;
            }
            ++docs;
            ab.activations.push_back(std::move(w));
            z_b.push_back(std::move(z));
        }
        act_batches.push_back(std::move(ab));
        pre.push_back(std::move(z_b));
    }

    auto ag = activation_gradients(act_batches, idf, cfg.idf_aware, vocab);
    LossAndGrad out;
    out.rank = ag.rank;
    out.flops = ag.flops;
    out.total = ag.rank + cfg.lambda_d * ag.flops;
    out.mean_nnz = docs == 0 ? 0.0 : static_cast<double>(nnz) / static_cast<double>(docs);
    out.grad = EncoderParams(vocab);

    std::vector<double> delta(vocab);
    for (std::size_t b = 0; b < batches.size(); ++b) {
        for (std::size_t i = 0; i < batches[b].candidates.size(); ++i) {
            auto const &z = pre[b][i];
            for (std::size_t j = 0; j < vocab; ++j) {
                double g = ag.rank_grad[b][i][j] + cfg.lambda_d * ag.flops_grad[b][i][j];
                delta[j] = g * activation_slope(z[j]);
            }
            for (std::size_t j = 0; j < vocab; ++j) {
                out.grad.bias()[j] += delta[j];
            }
            for (auto const &e : batches[b].candidates[i]) {
                if (e.token.value >= vocab) {
                    continue;
                }
                for (std::size_t j = 0; j < vocab; ++j) {
                    out.grad.expansion(e.token.value, j) += e.weight * delta[j];
                }
            }
        }
    }

    if (!std::isfinite(out.total) || !out.grad.all_finite()) {
        throw NumericError("non-finite loss or gradient");
    }
    return out;
}

/// Single-query form of `step_loss_and_grad`.
inline LossAndGrad total_loss_and_grad(EncoderParams const &params, TrainingBatch const &batch,
                                       IdfTable const &idf, LossConfig const &cfg)
{
    return step_loss_and_grad(params, std::span<TrainingBatch const>(&batch, 1), idf, cfg);
}

/// Loss only; used by finite-difference checks.
inline double step_loss(EncoderParams const &params, std::span<TrainingBatch const> batches,
                        IdfTable const &idf, LossConfig const &cfg)
{
    auto const vocab = params.vocab_size();
    double rank = 0.0;
    std::vector<SparseVector> all_docs;
    for (auto const &b : batches) {
        auto targets = combine_teachers(b.teacher, cfg.ensemble, cfg.scale_S);
        auto scores = student_scores(params, b, idf, cfg.idf_aware);
        rank += ranking_loss(scores, targets);
        for (auto const &doc : b.candidates) {
            all_docs.push_back(encode_document(params, doc));
        }
    }
    rank /= static_cast<double>(batches.size());
    return rank + cfg.lambda_d * flops_regularizer(all_docs, vocab);
}

}  // namespace lsr::distill
