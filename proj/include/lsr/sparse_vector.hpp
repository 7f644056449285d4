#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lsr/error.hpp"

namespace lsr {

/// Index of a token inside a Vocabulary.
struct TokenId {
    std::uint32_t value = 0;

    constexpr auto operator<=>(TokenId const &) const = default;
};

template <typename Weight>
struct SparseEntry {
    TokenId token;
    Weight weight;

    constexpr bool operator==(SparseEntry const &) const = default;
};

/// Sparse vector with strictly increasing token ids and strictly positive weights.
///
/// Zero weights are dropped on construction; negative or non-finite weights
/// and duplicate tokens are rejected.
template <typename Weight>
class BasicSparseVector {
  public:
    using weight_type = Weight;
    using entry_type = SparseEntry<Weight>;

    BasicSparseVector() = default;

    /// Builds from entries in any order.
    static BasicSparseVector from_entries(std::vector<entry_type> entries)
    {
        std::sort(entries.begin(), entries.end(), [](auto const &lhs, auto const &rhs) {
            return lhs.token < rhs.token;
        });
        BasicSparseVector vec;
        vec.m_entries.reserve(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            auto const &e = entries[i];
            if (!std::isfinite(e.weight) || e.weight < Weight{0}) {
                throw InvalidArgument("sparse vector weight must be finite and non-negative (token "
                                      + std::to_string(e.token.value) + ")");
            }
            if (i > 0 && entries[i - 1].token == e.token) {
                throw InvalidArgument("duplicate token in sparse vector: "
                                      + std::to_string(e.token.value));
            }
            if (e.weight > Weight{0}) {
                vec.m_entries.push_back(e);
            }
        }
        return vec;
    }

    /// Builds from a dense array; position i is token i.
    static BasicSparseVector from_dense(std::span<Weight const> dense)
    {
        std::vector<entry_type> entries;
        for (std::size_t i = 0; i < dense.size(); ++i) {
            if (dense[i] != Weight{0}) {
                entries.push_back({TokenId{static_cast<std::uint32_t>(i)}, dense[i]});
            }
        }
        return from_entries(std::move(entries));
    }

    template <typename Other>
    [[nodiscard]] BasicSparseVector<Other> cast() const
    {
        std::vector<SparseEntry<Other>> out;
        out.reserve(m_entries.size());
        for (auto const &e : m_entries) {
            out.push_back({e.token, static_cast<Other>(e.weight)});
        }
        return BasicSparseVector<Other>::from_entries(std::move(out));
    }

    [[nodiscard]] std::span<entry_type const> entries() const { return m_entries; }
    [[nodiscard]] auto begin() const { return m_entries.begin(); }
    [[nodiscard]] auto end() const { return m_entries.end(); }
    [[nodiscard]] std::size_t nnz() const { return m_entries.size(); }
    [[nodiscard]] bool empty() const { return m_entries.empty(); }

    [[nodiscard]] double l1() const
    {
        double sum = 0.0;
        for (auto const &e : m_entries) {
            sum += static_cast<double>(e.weight);
        }
        return sum;
    }

    /// Weight of `token`, or 0 when absent.
    [[nodiscard]] Weight weight(TokenId token) const
    {
        auto it = std::lower_bound(m_entries.begin(), m_entries.end(), token,
                                   [](auto const &e, TokenId t) { return e.token < t; });
        return (it != m_entries.end() && it->token == token) ? it->weight : Weight{0};
    }

    /// Writes weights into a dense array of size `dim`; tokens >= dim are ignored.
    [[nodiscard]] std::vector<Weight> to_dense(std::size_t dim) const
    {
        std::vector<Weight> dense(dim, Weight{0});
        for (auto const &e : m_entries) {
            if (e.token.value < dim) {
                dense[e.token.value] = e.weight;
            }
        }
        return dense;
    }

    bool operator==(BasicSparseVector const &) const = default;

  private:
    std::vector<entry_type> m_entries;
};

using SparseVector = BasicSparseVector<double>;
using CompactSparseVector = BasicSparseVector<float>;

/// A retrieved document and its score.
struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(ScoredDoc const &) const = default;
};

/// Ranking order used for every result list: score descending, then doc_id ascending.
inline bool ranks_before(ScoredDoc const &lhs, ScoredDoc const &rhs)
{
    if (lhs.score != rhs.score) {
        return lhs.score > rhs.score;
    }
    return lhs.doc_id < rhs.doc_id;
}

inline void sort_ranked(std::vector<ScoredDoc> &docs)
{
    std::sort(docs.begin(), docs.end(), ranks_before);
}

}  // namespace lsr

template <>
struct std::hash<lsr::TokenId> {
    std::size_t operator()(lsr::TokenId t) const noexcept { return std::hash<std::uint32_t>{}(t.value); }
};
