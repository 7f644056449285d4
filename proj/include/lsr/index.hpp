#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lsr/detail/binary_io.hpp"
#include "lsr/error.hpp"
#include "lsr/sparse_vector.hpp"
#include "lsr/vocabulary.hpp"

namespace lsr {

using DocOrdinal = std::uint32_t;

struct Posting {
    DocOrdinal doc;
    float weight;

    bool operator==(Posting const &) const = default;
};

struct IndexStats {
    std::uint64_t corpus_size = 0;
    std::uint64_t distinct_tokens = 0;
    std::uint64_t total_postings = 0;
    double mean_nnz_per_doc = 0.0;
};

/// Token-major inverted index. Postings of each token are sorted by ordinal.
/// Immutable once built.
class InvertedIndex {
  public:
    InvertedIndex() = default;

    [[nodiscard]] Vocabulary const &vocabulary() const { return m_vocab; }
    [[nodiscard]] std::size_t corpus_size() const { return m_doc_ids.size(); }
    [[nodiscard]] std::string const &doc_id(DocOrdinal ord) const { return m_doc_ids.at(ord); }
    [[nodiscard]] std::vector<std::string> const &doc_ids() const { return m_doc_ids; }

    [[nodiscard]] std::optional<DocOrdinal> find_doc(std::string const &id) const
    {
        if (auto it = m_doc_lookup.find(id); it != m_doc_lookup.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::span<Posting const> postings(TokenId token) const
    {
        if (token.value >= m_postings.size()) {
            return {};
        }
        return m_postings[token.value];
    }

    [[nodiscard]] std::uint32_t df(TokenId token) const
    {
        return static_cast<std::uint32_t>(postings(token).size());
    }

    [[nodiscard]] std::vector<std::uint32_t> document_frequencies() const
    {
        std::vector<std::uint32_t> out(m_postings.size());
        for (std::size_t t = 0; t < m_postings.size(); ++t) {
            out[t] = static_cast<std::uint32_t>(m_postings[t].size());
        }
        return out;
    }

    /// Stored weight of `token` in document `ord`, or 0.
    [[nodiscard]] float weight(TokenId token, DocOrdinal ord) const
    {
        auto list = postings(token);
        auto it = std::lower_bound(list.begin(), list.end(), ord,
                                   [](Posting const &p, DocOrdinal d) { return p.doc < d; });
        return (it != list.end() && it->doc == ord) ? it->weight : 0.0F;
    }

    /// Reconstructs the stored vector of one document (O(total postings)).
    [[nodiscard]] CompactSparseVector document(DocOrdinal ord) const
    {
        std::vector<SparseEntry<float>> entries;
        for (std::size_t t = 0; t < m_postings.size(); ++t) {
            if (float w = weight(TokenId{static_cast<std::uint32_t>(t)}, ord); w > 0.0F) {
                entries.push_back({TokenId{static_cast<std::uint32_t>(t)}, w});
            }
        }
        return CompactSparseVector::from_entries(std::move(entries));
    }

    [[nodiscard]] IndexStats stats() const
    {
        IndexStats s;
        s.corpus_size = corpus_size();
        for (auto const &list : m_postings) {
            s.total_postings += list.size();
            s.distinct_tokens += list.empty() ? 0 : 1;
        }
        s.mean_nnz_per_doc = s.corpus_size == 0 ? 0.0
                                                : static_cast<double>(s.total_postings)
                                                      / static_cast<double>(s.corpus_size);
        return s;
    }

    bool operator==(InvertedIndex const &other) const
    {
        return m_vocab == other.m_vocab && m_doc_ids == other.m_doc_ids
               && m_postings == other.m_postings;
    }

  private:
    friend class IndexBuilder;
    friend InvertedIndex deserialize_index(std::string_view bytes);

    void finish()
    {
        m_doc_lookup.clear();
        for (std::size_t i = 0; i < m_doc_ids.size(); ++i) {
            m_doc_lookup.emplace(m_doc_ids[i], static_cast<DocOrdinal>(i));
        }
    }

    Vocabulary m_vocab;
    std::vector<std::string> m_doc_ids;
    std::unordered_map<std::string, DocOrdinal> m_doc_lookup;
    std::vector<std::vector<Posting>> m_postings;
};

/// Single-writer index construction. Ingestion order defines doc ordinals.
class IndexBuilder {
  public:
    explicit IndexBuilder(Vocabulary vocab)
    {
        m_index.m_postings.resize(vocab.size());
        m_index.m_vocab = std::move(vocab);
    }

    /// Adds a document given raw entries. Documents carrying a weight <= 0 (or
    /// non-finite) are rejected: nothing is stored, a diagnostic is recorded and
    /// false is returned. Duplicate ids throw.
    bool add(std::string const &doc_id, std::span<SparseEntry<double> const> entries)
    {
        if (m_index.m_doc_lookup.contains(doc_id)) {
            throw InvalidArgument("duplicate doc_id: " + doc_id);
        }
        std::vector<SparseEntry<double>> sorted(entries.begin(), entries.end());
        std::sort(sorted.begin(), sorted.end(),
                  [](auto const &a, auto const &b) { return a.token < b.token; });
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            auto const &e = sorted[i];
            if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
                m_diagnostics.push_back("rejected document " + doc_id + ": non-positive weight "
                                        + std::to_string(e.weight) + " for token "
                                        + describe(e.token));
                return false;
            }
            if (e.token.value >= m_index.m_vocab.size()) {
                throw InvalidArgument("document " + doc_id + ": token id "
                                      + std::to_string(e.token.value) + " outside vocabulary");
            }
            if (i > 0 && sorted[i - 1].token == e.token) {
                m_diagnostics.push_back("rejected document " + doc_id + ": duplicate token "
                                        + describe(e.token));
                return false;
            }
            if (static_cast<float>(e.weight) <= 0.0F) {
                m_diagnostics.push_back("rejected document " + doc_id + ": weight "
                                        + std::to_string(e.weight) + " underflows storage");
                return false;
            }
        }
        auto ord = static_cast<DocOrdinal>(m_index.m_doc_ids.size());
        m_index.m_doc_ids.push_back(doc_id);
        m_index.m_doc_lookup.emplace(doc_id, ord);
        for (auto const &e : sorted) {
            m_index.m_postings[e.token.value].push_back({ord, static_cast<float>(e.weight)});
        }
        return true;
    }

    template <typename W>
    bool add(std::string const &doc_id, BasicSparseVector<W> const &vec)
    {
        std::vector<SparseEntry<double>> entries;
        entries.reserve(vec.nnz());
        for (auto const &e : vec) {
            entries.push_back({e.token, static_cast<double>(e.weight)});
        }
        return add(doc_id, entries);
    }

    [[nodiscard]] std::vector<std::string> const &diagnostics() const { return m_diagnostics; }

    [[nodiscard]] InvertedIndex build() &&
    {
        m_index.finish();
        return std::move(m_index);
    }

  private:
    std::string describe(TokenId t) const
    {
        return t.value < m_index.m_vocab.size() ? m_index.m_vocab.term(t)
                                                : "#" + std::to_string(t.value);
    }

    InvertedIndex m_index;
    std::vector<std::string> m_diagnostics;
};

/// Builds an index from (doc_id, vector) pairs.
template <typename Docs>
InvertedIndex build_index(Docs const &docs, Vocabulary vocab)
{
    IndexBuilder builder(std::move(vocab));
    for (auto const &[id, vec] : docs) {
        builder.add(id, vec);
    }
    return std::move(builder).build();
}

inline constexpr std::string_view kIndexMagic = "LSRINDX\x01";
inline constexpr std::uint32_t kIndexVersion = 1;

inline std::string serialize_index(InvertedIndex const &index)
{
    detail::ByteWriter w;
    auto const &terms = index.vocabulary().terms();
    w.u32(static_cast<std::uint32_t>(terms.size()));
    for (auto const &t : terms) {
        w.str(t);
    }
    w.u32(static_cast<std::uint32_t>(index.corpus_size()));
    for (auto const &id : index.doc_ids()) {
        w.str(id);
    }
    auto df = index.document_frequencies();
    for (auto f : df) {
        w.u32(f);
    }
    for (std::size_t t = 0; t < df.size(); ++t) {
        for (auto const &p : index.postings(TokenId{static_cast<std::uint32_t>(t)})) {
            w.u32(p.doc);
            w.f32(p.weight);
        }
    }
    return detail::frame(kIndexMagic, kIndexVersion, w.bytes());
}

inline InvertedIndex deserialize_index(std::string_view bytes)
{
    auto payload = detail::unframe(bytes, kIndexMagic, kIndexVersion, "an index");
    detail::ByteReader r(payload);
    InvertedIndex index;
    auto vocab_size = r.u32();
    std::vector<std::string> terms;
    terms.reserve(std::min<std::size_t>(vocab_size, payload.size()));
    for (std::uint32_t i = 0; i < vocab_size; ++i) {
        terms.push_back(r.str());
    }
    try {
        index.m_vocab = Vocabulary(std::move(terms));
    } catch (InvalidArgument const &e) {
        throw FormatError(std::string("corrupt index: ") + e.what());
    }
    auto n_docs = r.u32();
    for (std::uint32_t i = 0; i < n_docs; ++i) {
        index.m_doc_ids.push_back(r.str());
    }
    std::vector<std::uint32_t> df(vocab_size);
    for (auto &f : df) {
        f = r.u32();
    }
    index.m_postings.resize(vocab_size);
    for (std::uint32_t t = 0; t < vocab_size; ++t) {
        auto &list = index.m_postings[t];
        list.reserve(std::min<std::size_t>(df[t], r.remaining() / 8));
        for (std::uint32_t k = 0; k < df[t]; ++k) {
            Posting p{r.u32(), r.f32()};
            if (p.doc >= n_docs || !(p.weight > 0.0F) || (!list.empty() && list.back().doc >= p.doc)) {
                throw FormatError("corrupt index: invalid posting for token " + std::to_string(t));
            }
            list.push_back(p);
        }
    }
    if (r.remaining() != 0) {
        throw FormatError("corrupt index: trailing bytes in payload");
    }
    index.finish();
    if (index.m_doc_lookup.size() != index.m_doc_ids.size()) {
        throw FormatError("corrupt index: duplicate doc ids");
    }
    return index;
}

inline void save_index(InvertedIndex const &index, std::string const &path)
{
    detail::write_file(path, serialize_index(index));
}

inline InvertedIndex load_index(std::string const &path)
{
    return deserialize_index(detail::read_file(path));
}

}  // namespace lsr
