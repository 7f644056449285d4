#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lsr/lsr.hpp"

namespace lsr::testkit {

inline Vocabulary numbered_vocab(std::size_t n, std::string const &prefix = "w")
{
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < n; ++i) {
        terms.push_back(prefix + std::to_string(i));
    }
    return Vocabulary(std::move(terms));
}

/// Random vector with up to `max_nnz` entries; token popularity is skewed so
/// postings lengths vary.
inline SparseVector random_vector(std::mt19937_64 &rng, std::size_t vocab, std::size_t max_nnz,
                                  double max_weight = 3.0)
{
    std::uniform_int_distribution<std::size_t> count(0, max_nnz);
    std::uniform_real_distribution<double> weight(0.05, max_weight);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SparseEntry<double>> entries;
    auto n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        auto t = static_cast<std::uint32_t>(std::pow(u(rng), 2.0) * static_cast<double>(vocab));
        t = std::min<std::uint32_t>(t, static_cast<std::uint32_t>(vocab - 1));
        if (std::none_of(entries.begin(), entries.end(), [t](auto const &e) { return e.token.value == t; })) {
            entries.push_back({TokenId{t}, weight(rng)});
        }
    }
    return SparseVector::from_entries(std::move(entries));
}

inline SparseVector binary_query(std::mt19937_64 &rng, std::size_t vocab, std::size_t max_terms)
{
    std::uniform_int_distribution<std::uint32_t> tok(0, static_cast<std::uint32_t>(vocab - 1));
    std::uniform_int_distribution<std::size_t> count(1, max_terms);
    std::vector<SparseEntry<double>> entries;
    auto n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        TokenId t{tok(rng)};
        if (std::none_of(entries.begin(), entries.end(), [t](auto const &e) { return e.token == t; })) {
            entries.push_back({t, 1.0});
        }
    }
    return SparseVector::from_entries(std::move(entries));
}

struct RandomCorpus {
    Vocabulary vocab;
    std::vector<std::string> ids;
    std::vector<SparseVector> docs;

    [[nodiscard]] InvertedIndex index() const
    {
        IndexBuilder b(vocab);
        for (std::size_t i = 0; i < docs.size(); ++i) {
            b.add(ids[i], docs[i]);
        }
        return std::move(b).build();
    }
};

/// Doc ids are shuffled relative to ingestion order so id order and ordinal order differ.
inline RandomCorpus random_corpus(std::mt19937_64 &rng, std::size_t docs, std::size_t vocab,
                                  std::size_t max_nnz)
{
    RandomCorpus c{numbered_vocab(vocab), {}, {}};
    std::vector<std::size_t> perm(docs);
    for (std::size_t i = 0; i < docs; ++i) {
        perm[i] = i;
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < docs; ++i) {
        c.ids.push_back("doc" + std::to_string(perm[i]));
        c.docs.push_back(random_vector(rng, vocab, max_nnz));
    }
    return c;
}

inline IdfTable random_idf(std::mt19937_64 &rng, std::size_t vocab)
{
    std::uniform_real_distribution<double> v(0.05, 6.0);
    IdfTable t("random");
    for (std::uint32_t i = 0; i < vocab; ++i) {
        if (i % 7 != 3) {  // leave some tokens on the default
            t.set(TokenId{i}, v(rng));
        }
    }
    return t;
}

/// Scores every document directly from its float-rounded weights, then sorts.
inline std::vector<ScoredDoc> brute_force(RandomCorpus const &c, SparseVector const &q, ScoreMode mode,
                                          IdfTable const *idf, std::size_t k)
{
    std::vector<ScoredDoc> all;
    for (std::size_t i = 0; i < c.docs.size(); ++i) {
        double s = match_score(q, c.docs[i].cast<float>(), mode, idf);
        if (s > 0.0) {
            all.push_back({c.ids[i], s});
        }
    }
    std::sort(all.begin(), all.end(), [](ScoredDoc const &a, ScoredDoc const &b) {
        return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
    });
    if (all.size() > k) {
        all.resize(k);
    }
    return all;
}

/// Explicit double loop over (query, document) pairs counting shared tokens.
inline double all_pairs_flops(std::vector<SparseVector> const &queries, std::vector<SparseVector> const &docs)
{
    double total = 0.0;
    for (auto const &q : queries) {
        double pairs = 0.0;
        for (auto const &d : docs) {
            std::size_t shared = 0;
            for (auto const &e : q) {
                if (d.weight(e.token) > 0.0) {
                    ++shared;
                }
            }
            pairs += static_cast<double>(shared);
        }
        total += pairs / static_cast<double>(docs.size());
    }
    return total / static_cast<double>(queries.size());
}

inline double relative_error(double analytic, double numeric, double floor = 1e-6)
{
    double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

/// Token-count document with up to `max_nnz` distinct tokens.
inline SparseVector random_counts(std::mt19937_64 &rng, std::size_t vocab, std::size_t max_nnz)
{
    std::uniform_int_distribution<std::uint32_t> tok(0, static_cast<std::uint32_t>(vocab - 1));
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_int_distribution<std::size_t> n(1, max_nnz);
    std::vector<SparseEntry<double>> entries;
    auto target = n(rng);
    while (entries.size() < target) {
        TokenId t{tok(rng)};
        if (std::none_of(entries.begin(), entries.end(), [t](auto const &e) { return e.token == t; })) {
            entries.push_back({t, static_cast<double>(count(rng))});
        }
    }
    return SparseVector::from_entries(std::move(entries));
}

/// Two teachers whose raw score ranges differ by orders of magnitude.
inline distill::TeacherScores random_teachers(std::mt19937_64 &rng, std::size_t n)
{
    std::normal_distribution<double> z(0.0, 1.0);
    distill::Teacher dense{"dense", {}, 1.0};
    distill::Teacher sparse{"sparse", {}, 1.0};
    for (std::size_t i = 0; i < n; ++i) {
        dense.scores.push_back(40.0 + 15.0 * z(rng));
        sparse.scores.push_back(0.3 * std::abs(z(rng)));
    }
    return {{std::move(dense), std::move(sparse)}};
}

inline distill::TrainingBatch random_batch(std::mt19937_64 &rng, std::size_t vocab, std::size_t candidates)
{
    distill::TrainingBatch b;
    b.query = binary_query(rng, vocab, 4);
    for (std::size_t i = 0; i < candidates; ++i) {
        b.candidates.push_back(random_counts(rng, vocab, 5));
    }
    b.teacher = random_teachers(rng, candidates);
    return b;
}

inline distill::EncoderParams random_params(std::mt19937_64 &rng, std::size_t vocab)
{
    std::uniform_real_distribution<double> m(-0.3, 0.8);
    std::uniform_real_distribution<double> b(-0.5, 0.5);
    distill::EncoderParams p(vocab);
    for (auto &v : p.expansion_data()) {
        v = m(rng);
    }
    for (auto &v : p.bias()) {
        v = b(rng);
    }
    return p;
}

/// Smallest |pre-activation| over the step; finite differences are only valid
/// away from the ReLU kink.
inline double min_abs_pre_activation(distill::EncoderParams const &p,
                                     std::vector<distill::TrainingBatch> const &batches)
{
    double m = 1e300;
    for (auto const &b : batches) {
        for (auto const &d : b.candidates) {
            for (double z : distill::pre_activations(p, d)) {
                m = std::min(m, std::abs(z));
            }
        }
    }
    return m;
}

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
};

/// Central differences of the loss-only path against the analytic gradient on
/// `samples` coordinates. Half the samples come from rows of tokens that occur
/// in the candidates, where the gradient is non-trivial.
inline GradCheck finite_difference_check(distill::EncoderParams const &params,
                                         std::vector<distill::TrainingBatch> const &batches,
                                         IdfTable const &idf, distill::LossConfig const &cfg,
                                         std::mt19937_64 &rng, std::size_t samples = 50, double h = 1e-5)
{
    auto analytic = distill::step_loss_and_grad(params, batches, idf, cfg);
    auto const vocab = params.vocab_size();
    std::vector<std::uint32_t> present;
    for (auto const &b : batches) {
        for (auto const &d : b.candidates) {
            for (auto const &e : d) {
                present.push_back(e.token.value);
            }
        }
    }
    std::uniform_int_distribution<std::size_t> any(0, params.size() - 1);
    std::uniform_int_distribution<std::size_t> row_pick(0, present.size() - 1);
    std::uniform_int_distribution<std::size_t> col(0, vocab - 1);
    GradCheck out;
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t i = s % 2 == 0 ? any(rng) : present[row_pick(rng)] * vocab + col(rng);
        auto plus = params;
        auto minus = params;
        plus.flat(i) += h;
        minus.flat(i) -= h;
        double numeric = (distill::step_loss(plus, batches, idf, cfg) - distill::step_loss(minus, batches, idf, cfg))
                         / (2.0 * h);
        out.max_rel_error = std::max(out.max_rel_error, relative_error(analytic.grad.flat(i), numeric));
        ++out.coordinates;
    }
    return out;
}

/// Direct transcriptions of the metric formulas, averaged over queries with at
/// least one relevant judgment.
namespace naive {

inline std::vector<int> grades_of(std::vector<ScoredDoc> const &ranked, std::map<std::string, int> const &j,
                                  std::size_t k)
{
    std::vector<int> g;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        auto it = j.find(ranked[i].doc_id);
        g.push_back(it == j.end() ? 0 : it->second);
    }
    return g;
}

template <typename F>
double mean(eval::RunFile const &run, eval::Qrels const &qrels, F f)
{
    double sum = 0.0;
    int n = 0;
    for (auto const &[qid, j] : qrels) {
        int rel = 0;
        for (auto const &[doc, g] : j) {
            rel += g > 0;
        }
        if (rel == 0) {
            continue;
        }
        ++n;
        auto it = run.find(qid);
        sum += f(it == run.end() ? std::vector<ScoredDoc>{} : it->second, j, rel);
    }
    return sum / n;
}

inline double ndcg(eval::RunFile const &run, eval::Qrels const &qrels, std::size_t k)
{
    return mean(run, qrels, [k](auto const &ranked, auto const &j, int) {
        auto g = grades_of(ranked, j, k);
        double dcg = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            dcg += (std::pow(2.0, g[i]) - 1.0) / (std::log(i + 2.0) / std::log(2.0));
        }
        std::vector<int> all;
        for (auto const &[doc, grade] : j) {
            all.push_back(grade);
        }
        std::sort(all.rbegin(), all.rend());
        double idcg = 0.0;
        for (std::size_t i = 0; i < all.size() && i < k; ++i) {
            idcg += (std::pow(2.0, all[i]) - 1.0) / (std::log(i + 2.0) / std::log(2.0));
        }
        return dcg / idcg;
    });
}

inline double mrr(eval::RunFile const &run, eval::Qrels const &qrels, std::size_t k)
{
    return mean(run, qrels, [k](auto const &ranked, auto const &j, int) {
        auto g = grades_of(ranked, j, k);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g[i] > 0) {
                return 1.0 / (i + 1.0);
            }
        }
        return 0.0;
    });
}

inline double recall(eval::RunFile const &run, eval::Qrels const &qrels, std::size_t k)
{
    return mean(run, qrels, [k](auto const &ranked, auto const &j, int rel) {
        auto g = grades_of(ranked, j, k);
        double hit = 0.0;
        for (int v : g) {
            hit += v > 0 ? 1.0 : 0.0;
        }
        return hit / rel;
    });
}

/// Random run/qrels pair; some judged queries are missing from the run.
inline std::pair<eval::RunFile, eval::Qrels> random_instance(std::mt19937_64 &rng)
{
    std::uniform_int_distribution<int> nq(1, 8);
    std::uniform_int_distribution<int> ndocs(0, 15);
    std::uniform_int_distribution<int> grade(0, 3);
    std::uniform_int_distribution<int> pool(0, 25);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    eval::RunFile run;
    eval::Qrels qrels;
    auto queries = nq(rng);
    for (int q = 0; q < queries; ++q) {
        auto qid = "q" + std::to_string(q);
        auto nj = ndocs(rng);
        for (int i = 0; i < nj; ++i) {
            qrels[qid]["d" + std::to_string(pool(rng))] = grade(rng);
        }
        if (u(rng) < 0.85 || q == 0) {
            std::vector<ScoredDoc> ranked;
            std::vector<int> seen;
            auto nr = ndocs(rng) + 1;
            double score = 10.0;
            for (int i = 0; i < nr; ++i) {
                int d = pool(rng);
                if (std::find(seen.begin(), seen.end(), d) == seen.end()) {
                    seen.push_back(d);
                    score -= u(rng);
                    ranked.push_back({"d" + std::to_string(d), score});
                }
            }
            run[qid] = ranked;
        }
    }
    qrels["q0"]["d0"] = 1;  // guarantee one judged query present in the run
    return {run, qrels};
}

}  // namespace naive

class TempDir {
  public:
    explicit TempDir(std::string const &tag)
    {
        std::random_device rd;
        m_path = std::filesystem::temp_directory_path()
                 / ("lsr-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(m_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(TempDir const &) = delete;
    TempDir &operator=(TempDir const &) = delete;

    [[nodiscard]] std::string file(std::string const &name) const { return (m_path / name).string(); }
    [[nodiscard]] std::filesystem::path const &path() const { return m_path; }

  private:
    std::filesystem::path m_path;
};

}  // namespace lsr::testkit
