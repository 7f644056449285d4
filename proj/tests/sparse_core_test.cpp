#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "lsr/io.hpp"
#include "support.hpp"

using namespace lsr;

TEST(SparseVector, SortsAndDropsZeros)
{
    auto v = SparseVector::from_entries({{TokenId{5}, 1.5}, {TokenId{1}, 0.0}, {TokenId{2}, 2.0}});
    ASSERT_EQ(v.nnz(), 2u);
    EXPECT_EQ(v.entries()[0].token, TokenId{2});
    EXPECT_EQ(v.entries()[1].token, TokenId{5});
    EXPECT_DOUBLE_EQ(v.l1(), 3.5);
    EXPECT_EQ(v.weight(TokenId{1}), 0.0);
    EXPECT_EQ(v.weight(TokenId{5}), 1.5);
}

TEST(SparseVector, RejectsBadEntries)
{
    EXPECT_THROW(SparseVector::from_entries({{TokenId{0}, -1.0}}), InvalidArgument);
    EXPECT_THROW(SparseVector::from_entries({{TokenId{0}, NAN}}), InvalidArgument);
    EXPECT_THROW(SparseVector::from_entries({{TokenId{3}, 1.0}, {TokenId{3}, 2.0}}), InvalidArgument);
}

TEST(SparseVector, DenseRoundTrip)
{
    std::vector<double> dense{0.0, 1.0, 0.0, 2.5};
    auto v = SparseVector::from_dense(dense);
    EXPECT_EQ(v.nnz(), 2u);
    EXPECT_EQ(v.to_dense(4), dense);
}

TEST(SparseVector, JsonRoundTripIsBitExact)
{
    std::mt19937_64 rng(11);
    auto vocab = testkit::numbered_vocab(40);
    for (int trial = 0; trial < 50; ++trial) {
        auto v = testkit::random_vector(rng, 40, 12);
        std::stringstream ss;
        io::write_sparse_line(ss, "d", v, vocab);
        Vocabulary grown = vocab;
        auto records = io::read_sparse_jsonl(ss, grown, false);
        ASSERT_EQ(records.size(), 1u);
        EXPECT_EQ(records[0].vector(), v);
    }
}

TEST(Vocabulary, IsBijective)
{
    auto vocab = testkit::numbered_vocab(25);
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
        EXPECT_EQ(vocab.find(vocab.term(TokenId{i})), TokenId{i});
    }
    EXPECT_FALSE(vocab.find("missing"));
    EXPECT_THROW(Vocabulary({"a", "b", "a"}), InvalidArgument);
    EXPECT_NE(vocab.fingerprint(), testkit::numbered_vocab(24).fingerprint());
}

TEST(Vocabulary, Tokenize)
{
    EXPECT_EQ(tokenize("  The CAT\tsat\n"), (std::vector<std::string>{"the", "cat", "sat"}));
    EXPECT_TRUE(tokenize("   ").empty());
}

TEST(BinarizeQuery, Examples)
{
    Vocabulary vocab({"the", "cat"});
    auto q = binarize_query({"the", "the", "cat"}, vocab);
    EXPECT_EQ(q.vector.nnz(), 2u);
    EXPECT_EQ(q.vector.weight(TokenId{0}), 1.0);
    EXPECT_EQ(q.vector.weight(TokenId{1}), 1.0);
    EXPECT_EQ(q.oov_count, 0u);

    EXPECT_TRUE(binarize_query({}, vocab).vector.empty());

    auto oov = binarize_query({"zzz-unknown"}, vocab);
    EXPECT_TRUE(oov.vector.empty());
    EXPECT_EQ(oov.oov_count, 1u);
}

TEST(Idf, HandValues)
{
    Vocabulary vocab({"a", "b"});
    std::vector<SparseVector> one{SparseVector::from_entries({{TokenId{0}, 1.0}})};
    auto t = compute_idf(one, vocab);
    EXPECT_NEAR(t.lookup(TokenId{0}), std::log(4.0 / 3.0), 1e-12);
    EXPECT_NEAR(t.lookup(TokenId{0}), 0.2877, 1e-4);
    EXPECT_EQ(t.lookup(TokenId{1}), 1.0);

    std::vector<SparseVector> two(2, SparseVector::from_entries({{TokenId{0}, 2.0}}));
    EXPECT_NEAR(compute_idf(two, vocab).lookup(TokenId{0}), 0.1823, 1e-4);
}

TEST(Idf, EmptyCorpus)
{
    Vocabulary vocab({"a"});
    std::vector<SparseVector> none;
    try {
        (void)compute_idf(none, vocab);
        FAIL();
    } catch (InvalidArgument const &e) {
        EXPECT_STREQ(e.what(), "empty corpus");
    }
}

TEST(Idf, PermutationInvariantAndMonotone)
{
    std::mt19937_64 rng(5);
    auto c = testkit::random_corpus(rng, 120, 30, 8);
    auto a = compute_idf(c.docs, c.vocab);
    auto shuffled = c.docs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto b = compute_idf(shuffled, c.vocab);
    EXPECT_EQ(a.values(), b.values());

    auto index = c.index();
    for (std::uint32_t s = 0; s < 30; ++s) {
        for (std::uint32_t t = 0; t < 30; ++t) {
            if (index.df(TokenId{s}) > 0 && index.df(TokenId{t}) > index.df(TokenId{s})) {
                EXPECT_LE(a.lookup(TokenId{t}), a.lookup(TokenId{s}));
            }
        }
    }
}

TEST(Idf, StoredValuesPositive)
{
    IdfTable t("x");
    EXPECT_THROW(t.set(TokenId{0}, 0.0), InvalidArgument);
    EXPECT_THROW(t.set(TokenId{0}, -2.0), InvalidArgument);
    EXPECT_THROW(IdfTable("x", 0.0), InvalidArgument);
    // Even a token present in every document of a large corpus keeps a positive IDF.
    EXPECT_GT(smoothed_idf(1000000, 1000000), 0.0);
}

TEST(ScoredDoc, TieBreakByDocId)
{
    std::vector<ScoredDoc> docs{{"b", 1.0}, {"a", 1.0}, {"c", 2.0}};
    sort_ranked(docs);
    EXPECT_EQ(docs[0].doc_id, "c");
    EXPECT_EQ(docs[1].doc_id, "a");
    EXPECT_EQ(docs[2].doc_id, "b");
}
