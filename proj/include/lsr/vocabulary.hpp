#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lsr/error.hpp"
#include "lsr/sparse_vector.hpp"

namespace lsr {

/// Bijection between token strings and dense ids, in insertion order.
class Vocabulary {
  public:
    Vocabulary() = default;

    explicit Vocabulary(std::vector<std::string> terms)
    {
        for (auto &term : terms) {
            if (m_lookup.contains(term)) {
                throw InvalidArgument("duplicate vocabulary term: " + term);
            }
            intern(term);
        }
    }

    /// Returns the id of `term`, adding it if absent.
    TokenId intern(std::string_view term)
    {
        if (auto it = m_lookup.find(std::string(term)); it != m_lookup.end()) {
            return it->second;
        }
        TokenId id{static_cast<std::uint32_t>(m_terms.size())};
        m_terms.emplace_back(term);
        m_lookup.emplace(m_terms.back(), id);
        return id;
    }

    [[nodiscard]] std::optional<TokenId> find(std::string_view term) const
    {
        if (auto it = m_lookup.find(std::string(term)); it != m_lookup.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::string const &term(TokenId id) const
    {
        if (id.value >= m_terms.size()) {
            throw InvalidArgument("token id out of range: " + std::to_string(id.value));
        }
        return m_terms[id.value];
    }

    [[nodiscard]] std::vector<std::string> const &terms() const { return m_terms; }
    [[nodiscard]] std::size_t size() const { return m_terms.size(); }

    /// FNV-1a over the ordered term list; identifies a vocabulary in binary artifacts.
    [[nodiscard]] std::uint64_t fingerprint() const
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](unsigned char c) {
            h ^= c;
            h *= 0x100000001b3ULL;
        };
        for (auto const &t : m_terms) {
            for (unsigned char c : t) {
                mix(c);
            }
            mix(0xff);
        }
        return h;
    }

    bool operator==(Vocabulary const &other) const { return m_terms == other.m_terms; }

  private:
    std::vector<std::string> m_terms;
    std::unordered_map<std::string, TokenId> m_lookup;
};

/// Splits on whitespace and lowercases. Intended for fixtures and small demos only.
inline std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return out;
}

struct BinarizedQuery {
    SparseVector vector;
    std::size_t oov_count = 0;
};

/// Bag-of-words query: weight 1 per distinct in-vocabulary token.
inline BinarizedQuery binarize_query(std::vector<std::string> const &tokens, Vocabulary const &vocab)
{
    BinarizedQuery result;
    std::vector<SparseEntry<double>> entries;
    for (auto const &tok : tokens) {
        auto id = vocab.find(tok);
        if (!id) {
            ++result.oov_count;
            continue;
        }
        bool seen = false;
        for (auto const &e : entries) {
            if (e.token == *id) {
                seen = true;
                break;
            }
        }
        if (!seen) {
            entries.push_back({*id, 1.0});
        }
    }
    result.vector = SparseVector::from_entries(std::move(entries));
    return result;
}

}  // namespace lsr
