#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "lsr/distill/train.hpp"
#include "lsr/sparse_vector.hpp"
#include "lsr/vocabulary.hpp"

namespace lsr {

/// Shape of the seeded toy corpus used by tests, the demo and the benchmarks.
struct FixtureSpec {
    std::size_t vocab = 50;
    std::size_t docs = 40;
    std::size_t queries = 16;
    std::size_t fillers = 4;  ///< tokens present in every document
    std::size_t topics = 8;
    std::uint64_t seed = 7;
};

struct FixtureQuery {
    std::string id;
    std::vector<std::string> tokens;
    DocOrdinal positive = 0;
};

struct Fixture {
    Vocabulary vocab;
    std::vector<std::string> doc_ids;
    std::vector<SparseVector> docs;  ///< token counts
    std::vector<FixtureQuery> queries;
    std::vector<TokenId> filler_tokens;

    [[nodiscard]] distill::TrainingData training_data() const
    {
        distill::TrainingData data;
        data.vocab = vocab;
        data.doc_ids = doc_ids;
        data.docs = docs;
        for (auto const &q : queries) {
            data.pairs.push_back({q.id, q.tokens, binarize_query(q.tokens, vocab).vector, q.positive});
        }
        return data;
    }
};

/// Topic-structured corpus. Every document holds all filler tokens (counts 1-3),
/// four tokens of its own topic and one stray token from another topic.
/// Each query pairs two fillers with two tokens of its positive document and,
/// when available, one same-topic token the positive lacks.
inline Fixture make_toy_fixture(FixtureSpec const &spec = {})
{
    if (spec.fillers >= spec.vocab || spec.topics == 0 || spec.queries > spec.docs) {
        throw InvalidArgument("make_toy_fixture: inconsistent fixture spec");
    }
    static constexpr char const *kFillerNames[] = {"the", "of", "and", "a", "to", "in", "is", "it"};
    Fixture fx;
    char buf[64];
    for (std::size_t f = 0; f < spec.fillers; ++f) {
        if (f < std::size(kFillerNames)) {
            fx.filler_tokens.push_back(fx.vocab.intern(kFillerNames[f]));
        } else {
            std::snprintf(buf, sizeof(buf), "filler%zu", f);
            fx.filler_tokens.push_back(fx.vocab.intern(buf));
        }
    }
    std::vector<std::vector<TokenId>> topic_tokens(spec.topics);
    for (std::size_t c = 0; c < spec.vocab - spec.fillers; ++c) {
        auto topic = c % spec.topics;
        std::snprintf(buf, sizeof(buf), "t%zuw%zu", topic, c / spec.topics);
        topic_tokens[topic].push_back(fx.vocab.intern(buf));
    }

    std::mt19937_64 rng(spec.seed);
    auto uniform = [&rng](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    for (std::size_t d = 0; d < spec.docs; ++d) {
        std::snprintf(buf, sizeof(buf), "d%03zu", d);
        fx.doc_ids.emplace_back(buf);
        std::vector<SparseEntry<double>> entries;
        for (auto f : fx.filler_tokens) {
            entries.push_back({f, static_cast<double>(uniform(1, 3))});
        }
        auto topic = d % spec.topics;
        auto own = distill::detail::draw_without_replacement(topic_tokens[topic], 4, rng);
        for (auto t : own) {
            entries.push_back({t, static_cast<double>(uniform(1, 2))});
        }
        if (spec.topics > 1) {
            auto other = (topic + 1 + uniform(0, spec.topics - 2)) % spec.topics;
            auto const &pool = topic_tokens[other];
            if (!pool.empty()) {
                entries.push_back({pool[uniform(0, pool.size() - 1)], 1.0});
            }
        }
        fx.docs.push_back(SparseVector::from_entries(std::move(entries)));
    }

    std::vector<DocOrdinal> ords(spec.docs);
    for (std::size_t d = 0; d < spec.docs; ++d) {
        ords[d] = static_cast<DocOrdinal>(d);
    }
    auto positives = distill::detail::draw_without_replacement(ords, spec.queries, rng);
    for (std::size_t q = 0; q < spec.queries; ++q) {
        FixtureQuery fq;
        std::snprintf(buf, sizeof(buf), "q%02zu", q);
        fq.id = buf;
        fq.positive = positives[q];
        auto fillers = distill::detail::draw_without_replacement(fx.filler_tokens, 2, rng);
        for (auto f : fillers) {
            fq.tokens.push_back(fx.vocab.term(f));
        }
        auto const &doc = fx.docs[fq.positive];
        auto topic = fq.positive % spec.topics;
        std::vector<TokenId> present;
        std::vector<TokenId> absent;
        for (auto t : topic_tokens[topic]) {
            (doc.weight(t) > 0.0 ? present : absent).push_back(t);
        }
        for (auto t : distill::detail::draw_without_replacement(present, 2, rng)) {
            fq.tokens.push_back(fx.vocab.term(t));
        }
        if (!absent.empty()) {
            fq.tokens.push_back(fx.vocab.term(absent[uniform(0, absent.size() - 1)]));
        }
        fx.queries.push_back(std::move(fq));
    }
    return fx;
}

}  // namespace lsr
