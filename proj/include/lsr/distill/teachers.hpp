#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lsr/distill/ensemble.hpp"
#include "lsr/idf.hpp"
#include "lsr/sparse_vector.hpp"

namespace lsr::distill {

/// SplitMix64 finalizer; turns (seed, key...) into an independent stream seed.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return mix_seed(mix_seed(a) ^ b); }

/// Stand-in for a siamese dense retriever: cosine similarity of random
/// projections of the bag of words, plus a relevance bonus and deterministic
/// noise. Its scores span tens of units.
class DenseOracleTeacher {
  public:
    DenseOracleTeacher(std::size_t vocab, std::uint64_t seed, std::size_t dim = 16, double scale = 50.0,
                       double relevance_bonus = 30.0, double noise = 3.0)
        : m_vocab(vocab), m_dim(dim), m_scale(scale), m_bonus(relevance_bonus), m_noise(noise),
          m_seed(seed), m_projection(vocab * dim)
    {
        std::mt19937_64 rng(mix_seed(seed, 0xd5e5));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double &v : m_projection) {
            v = normal(rng);
        }
    }

    [[nodiscard]] double score(SparseVector const &query, SparseVector const &doc, bool relevant,
                               std::uint64_t query_key, std::uint64_t doc_key) const
    {
        auto qe = embed(query);
        auto de = embed(doc);
        double dot = 0.0;
        double qn = 0.0;
        double dn = 0.0;
        for (std::size_t k = 0; k < m_dim; ++k) {
            dot += qe[k] * de[k];
            qn += qe[k] * qe[k];
            dn += de[k] * de[k];
        }
        double cos = (qn > 0.0 && dn > 0.0) ? dot / std::sqrt(qn * dn) : 0.0;
        std::mt19937_64 rng(mix_seed(mix_seed(m_seed, query_key), doc_key));
        std::normal_distribution<double> normal(0.0, m_noise);
        return m_scale * cos + (relevant ? m_bonus : 0.0) + normal(rng);
    }

  private:
    [[nodiscard]] std::vector<double> embed(SparseVector const &v) const
    {
        std::vector<double> out(m_dim, 0.0);
        for (auto const &e : v) {
            if (e.token.value >= m_vocab) {
                continue;
            }
            for (std::size_t k = 0; k < m_dim; ++k) {
                out[k] += e.weight * m_projection[e.token.value * m_dim + k];
            }
        }
        return out;
    }

    std::size_t m_vocab;
    std::size_t m_dim;
    double m_scale;
    double m_bonus;
    double m_noise;
    std::uint64_t m_seed;
    std::vector<double> m_projection;
};

/// Stand-in for a siamese sparse retriever: sum over query tokens of
/// idf(t) * log(1 + count_d(t)). Scores span a few units.
class SparseOracleTeacher {
  public:
    explicit SparseOracleTeacher(IdfTable idf) : m_idf(std::move(idf)) {}

    [[nodiscard]] double score(SparseVector const &query, SparseVector const &doc) const
    {
        double s = 0.0;
        for (auto const &e : query) {
            double c = doc.weight(e.token);
            if (c > 0.0) {
                s += m_idf.lookup(e.token) * std::log1p(c);
            }
        }
        return s;
    }

  private:
    IdfTable m_idf;
};

/// The pair of heterogeneous oracle teachers, equally weighted.
class OracleTeacherPair {
  public:
    OracleTeacherPair(std::size_t vocab, IdfTable idf, std::uint64_t seed)
        : m_dense(vocab, seed), m_sparse(std::move(idf))
    {}

    /// `doc_keys` identify candidates for the noise stream; `positive` marks the relevant one.
    [[nodiscard]] TeacherScores score(SparseVector const &query, std::uint64_t query_key,
                                      std::vector<SparseVector const *> const &docs,
                                      std::vector<std::uint64_t> const &doc_keys,
                                      std::size_t positive) const
    {
        Teacher dense{"dense-oracle", {}, 1.0};
        Teacher sparse{"sparse-oracle", {}, 1.0};
        for (std::size_t i = 0; i < docs.size(); ++i) {
            dense.scores.push_back(m_dense.score(query, *docs[i], i == positive, query_key, doc_keys[i]));
            sparse.scores.push_back(m_sparse.score(query, *docs[i]));
        }
        return TeacherScores{{std::move(dense), std::move(sparse)}};
    }

  private:
    DenseOracleTeacher m_dense;
    SparseOracleTeacher m_sparse;
};

}  // namespace lsr::distill
