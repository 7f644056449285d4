#pragma once

#include <cmath>
#include <cstdint>
#include <ranges>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lsr/error.hpp"
#include "lsr/sparse_vector.hpp"
#include "lsr/vocabulary.hpp"

namespace lsr {

/// Per-token IDF values. Tokens without a stored value resolve to `default_value()`.
class IdfTable {
  public:
    static constexpr double kDefaultIdf = 1.0;

    IdfTable() = default;

    explicit IdfTable(std::string source, double default_value = kDefaultIdf)
        : m_default(default_value), m_source(std::move(source))
    {
        if (!(default_value > 0.0) || !std::isfinite(default_value)) {
            throw InvalidArgument("idf default must be positive and finite");
        }
    }

    void set(TokenId token, double value)
    {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw InvalidArgument("idf values must be positive and finite (token "
                                  + std::to_string(token.value) + ")");
        }
        m_values[token] = value;
    }

    [[nodiscard]] double lookup(TokenId token) const
    {
        auto it = m_values.find(token);
        return it == m_values.end() ? m_default : it->second;
    }

    [[nodiscard]] bool contains(TokenId token) const { return m_values.contains(token); }
    [[nodiscard]] double default_value() const { return m_default; }
    [[nodiscard]] std::string const &source() const { return m_source; }
    [[nodiscard]] std::unordered_map<TokenId, double> const &values() const { return m_values; }

    /// Dense lookup table over ids [0, dim).
    [[nodiscard]] std::vector<double> dense(std::size_t dim) const
    {
        std::vector<double> out(dim, m_default);
        for (auto const &[token, value] : m_values) {
            if (token.value < dim) {
                out[token.value] = value;
            }
        }
        return out;
    }

    /// Multiplies every value, including the default, by `factor` (> 0).
    [[nodiscard]] IdfTable scaled(double factor) const
    {
        IdfTable out(m_source, m_default * factor);
        for (auto const &[token, value] : m_values) {
            out.set(token, value * factor);
        }
        return out;
    }

    /// Table returning `value` for every token.
    static IdfTable constant(double value, std::string source = "constant")
    {
        return IdfTable(std::move(source), value);
    }

  private:
    std::unordered_map<TokenId, double> m_values;
    double m_default = kDefaultIdf;
    std::string m_source = "unnamed";
};

/// Smoothed BM25-style IDF: ln((N - df + 0.5) / (df + 0.5) + 1). Always positive.
inline double smoothed_idf(std::uint64_t corpus_size, std::uint64_t df)
{
    auto n = static_cast<double>(corpus_size);
    auto f = static_cast<double>(df);
    return std::log((n - f + 0.5) / (f + 0.5) + 1.0);
}

/// IDF over a corpus of sparse vectors: a token counts once per document in
/// which it has positive weight.
template <std::ranges::input_range Corpus>
IdfTable compute_idf(Corpus &&corpus, Vocabulary const &vocab, std::string source = "corpus")
{
    std::vector<std::uint64_t> df(vocab.size(), 0);
    std::uint64_t n = 0;
    for (auto const &doc : corpus) {
        ++n;
        for (auto const &e : doc) {
            if (e.token.value >= df.size()) {
                throw InvalidArgument("token id " + std::to_string(e.token.value)
                                      + " outside vocabulary");
            }
            ++df[e.token.value];
        }
    }
    if (n == 0) {
        throw InvalidArgument("empty corpus");
    }
    IdfTable table(std::move(source));
    for (std::size_t t = 0; t < df.size(); ++t) {
        if (df[t] > 0) {
            table.set(TokenId{static_cast<std::uint32_t>(t)}, smoothed_idf(n, df[t]));
        }
    }
    return table;
}

/// Same as above for documents given as token strings; unknown strings are ignored.
inline IdfTable compute_idf_from_tokens(std::vector<std::vector<std::string>> const &docs,
                                        Vocabulary const &vocab, std::string source = "corpus")
{
    std::vector<SparseVector> vectors;
    vectors.reserve(docs.size());
    for (auto const &doc : docs) {
        vectors.push_back(binarize_query(doc, vocab).vector);
    }
    return compute_idf(vectors, vocab, std::move(source));
}

}  // namespace lsr
