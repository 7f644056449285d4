// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "lsr/fixture.hpp"
#include "support.hpp"

using namespace lsr;
using namespace lsr::distill;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(char const *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// 1 -----------------------------------------------------------------------------

Outcome gradient_check()
{
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    int configs = 0;
    int rejected = 0;
    for (int rep = 0; rep < 4; ++rep) {
        for (bool aware : {true, false}) {
            for (double lambda : {0.0, 1e-7, 0.02}) {
                std::size_t const vocab = 12;
                auto idf = testkit::random_idf(rng, vocab);
                EncoderParams params;
                std::vector<TrainingBatch> batches;
                do {
                    params = testkit::random_params(rng, vocab);
                    batches = {testkit::random_batch(rng, vocab, 4), testkit::random_batch(rng, vocab, 5)};
                    ++rejected;
                } while (testkit::min_abs_pre_activation(params, batches) < 1e-4);
                --rejected;
                LossConfig cfg{lambda, 10.0, aware, EnsembleMethod::NormAdd};
                auto r = testkit::finite_difference_check(params, batches, idf, cfg, rng, 50);
                worst = std::max(worst, r.max_rel_error);
                ++configs;
            }
        }
    }
    return {worst < 1e-4 && configs >= 20,
            fmt("%d configs x 50 coords, max rel err %.2e (tol 1e-4); %d draws rejected near the ReLU kink", configs,
                worst, rejected)};
}

// 2 -----------------------------------------------------------------------------

Outcome idf_proportionality()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::size_t const vocab = 10;
    double worst_double = 0.0;
    double worst_formula = 0.0;
    bool flops_same = true;
    int trials = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto idf = testkit::random_idf(rng, vocab);
        ActivationBatch b;
        b.query = testkit::binary_query(rng, vocab, 4);
        TokenId t = b.query.entries()[trial % b.query.nnz()].token;
        double shared = u(rng) + 0.1;
        for (int i = 0; i < 5; ++i) {
            std::vector<double> a(vocab);
            for (auto &v : a) {
                v = u(rng);
            }
            // Equal activation of t across candidates: rescaling idf(t) shifts every
            // score by the same amount, leaving both softmaxes unchanged.
            a[t.value] = shared;
            b.activations.push_back(a);
            b.targets.push_back(u(rng) * 10.0);
        }
        IdfTable doubled = idf;
        doubled.set(t, 2.0 * idf.lookup(t));
        std::vector<ActivationBatch> step{b};
        auto g1 = activation_gradients(step, idf, true, vocab);
        auto g2 = activation_gradients(step, doubled, true, vocab);
        for (std::size_t i = 0; i < 5; ++i) {
            double a1 = g1.rank_grad[0][i][t.value];
            double a2 = g2.rank_grad[0][i][t.value];
            worst_double = std::max(worst_double, testkit::relative_error(a2, 2.0 * a1, 1e-300));
            for (auto const *g : {&g1, &g2}) {
                auto const &table = g == &g1 ? idf : doubled;
                double d = g->student_softmax[0][i] - g->teacher_softmax[0][i];
                for (auto const &e : b.query) {
                    double expect = table.lookup(e.token) * e.weight * d;
                    worst_formula = std::max(worst_formula,
                                             testkit::relative_error(g->rank_grad[0][i][e.token.value], expect, 1e-300));
                }
            }
            flops_same = flops_same && g1.flops_grad[0][i] == g2.flops_grad[0][i];
        }
        flops_same = flops_same && g1.flops == g2.flops;
        ++trials;
    }
    return {worst_double < 1e-10 && worst_formula < 1e-10 && flops_same,
            fmt("%d trials: doubled/original-1 max %.2e, d_rank = idf*q*(q_i-p_i) max %.2e (tol 1e-10), "
                "FLOPS gradient %s",
                trials, worst_double, worst_formula, flops_same ? "bitwise unchanged" : "CHANGED")};
}

// 3 -----------------------------------------------------------------------------

Outcome retrieval_exactness()
{
    std::mt19937_64 rng(3003);
    std::uniform_int_distribution<std::size_t> ndocs(1, 1000);
    std::uniform_int_distribution<std::size_t> nvocab(20, 200);
    std::size_t mismatches = 0;
    std::size_t two_phase_mismatches = 0;
    std::size_t queries = 0;
    double worst = 0.0;
    for (int corpus = 0; corpus < 50; ++corpus) {
        auto n = corpus == 0 ? 1000 : ndocs(rng);
        auto v = nvocab(rng);
        auto c = testkit::random_corpus(rng, n, v, 16);
        auto idf = testkit::random_idf(rng, v);
        auto index = c.index();
        for (int qi = 0; qi < 20; ++qi) {
            auto q = testkit::binary_query(rng, v, 6);
            ++queries;
            for (auto mode : {ScoreMode::Plain, ScoreMode::IdfWeighted}) {
                for (std::size_t k : {std::size_t{10}, std::size_t{100}}) {
                    auto got = search(index, q, {k, mode, std::nullopt}, &idf);
                    auto want = testkit::brute_force(c, q, mode, &idf, k);
                    bool same = got.size() == want.size();
                    for (std::size_t i = 0; same && i < got.size(); ++i) {
                        same = got[i].doc_id == want[i].doc_id;
                        worst = std::max(worst, std::abs(got[i].score - want[i].score));
                    }
                    mismatches += same ? 0 : 1;

                    for (std::size_t window : {n, n + 7}) {
                        window = std::max(window, k);
                        auto tp = search_two_phase(index, q, {k, mode, TwoPhaseParams{std::nullopt, window}}, idf);
                        bool identical = tp.size() == got.size();
                        for (std::size_t i = 0; identical && i < tp.size(); ++i) {
                            identical = tp[i].doc_id == got[i].doc_id && tp[i].score == got[i].score;
                        }
                        two_phase_mismatches += identical ? 0 : 1;
                    }
                }
            }
        }
    }
    return {mismatches == 0 && two_phase_mismatches == 0 && worst <= 1e-9,
            fmt("50 corpora (<=1000 docs), %zu queries x 2 modes x k{10,100}: %zu id mismatches, max |score diff| "
                "%.2e (tol 1e-9); two-phase with window >= corpus: %zu mismatches",
                queries, mismatches, worst, two_phase_mismatches)};
}

// 4 -----------------------------------------------------------------------------

Outcome flops_oracle()
{
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<std::size_t> ndocs(1, 500);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto n = trial == 0 ? 500 : ndocs(rng);
        auto c = testkit::random_corpus(rng, n, 80, 14);
        std::vector<SparseVector> queries;
        for (int i = 0; i < 50; ++i) {
            queries.push_back(testkit::binary_query(rng, 90, 6));  // some tokens beyond the index
        }
        auto index = c.index();
        double got = theoretical_flops(queries, index.document_frequencies(), index.corpus_size());
        worst = std::max(worst, std::abs(got - testkit::all_pairs_flops(queries, c.docs)));
    }
    return {worst <= 1e-9, fmt("20 corpora (<=500 docs) x 50 queries: max |diff| vs all-pairs count %.2e (tol 1e-9)", worst)};
}

// 5 -----------------------------------------------------------------------------

Outcome ensemble_normalization()
{
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    std::uniform_int_distribution<std::size_t> nc(2, 12);
    double const S = 10.0;
    bool in_range = true;
    double worst_affine = 0.0;
    int differ = 0;
    int dominated = 0;
    int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        auto n = nc(rng);
        TeacherScores t;
        for (int j = 0; j < 3; ++j) {
            Teacher teacher{"t" + std::to_string(j), {}, 0.5 + j};
            double spread = j == 0 ? 1.0 : (j == 1 ? 10.0 : 100.0);  // ranges differ by >= 10x
            for (std::size_t i = 0; i < n; ++i) {
                teacher.scores.push_back(spread * u(rng));
            }
            t.teachers.push_back(teacher);
        }
        auto base = ensemble_teacher(t, S);
        for (double v : base) {
            in_range = in_range && v >= 0.0 && v <= S;
        }
        auto moved = t;
        auto &victim = moved.teachers[trial % 3];
        double a = scale(rng);
        double b = u(rng) * 100.0;
        for (auto &s : victim.scores) {
            s = a * s + b;
        }
        auto after = ensemble_teacher(moved, S);
        for (std::size_t i = 0; i < n; ++i) {
            worst_affine = std::max(worst_affine, std::abs(after[i] - base[i]));
        }

        auto simple = simple_add_teacher(t);
        bool differs = false;
        for (std::size_t i = 0; i < n; ++i) {
            differs = differs || std::abs(simple[i] - base[i]) > 1e-9;
        }
        differ += differs ? 1 : 0;
        auto argmax = [](std::vector<double> const &v) { return std::max_element(v.begin(), v.end()) - v.begin(); };
        dominated += argmax(simple) == argmax(t.teachers[2].scores) ? 1 : 0;
    }
    return {in_range && worst_affine <= 1e-9 && differ == trials,
            fmt("%d trials: output in [0,S] %s; max change under a*s+b of one teacher %.2e (tol 1e-9); simple add "
                "differs in %d/%d; its top doc is the widest-range teacher's in %d/%d",
                trials, in_range ? "yes" : "NO", worst_affine, differ, trials, dominated, trials)};
}

// 6 and 7 ------------------------------------------------------------------------

struct FixtureRun {
    double mean_nnz;
    double flops;
    double low_idf_share;
};

FixtureRun train_fixture(double lambda, bool aware)
{
    auto fx = make_toy_fixture();
    auto data = fx.training_data();
    auto idf = compute_idf(data.docs, data.vocab);
    Schedule schedule;  // 300 steps, batch 4, 3 negatives, lr 0.05, seed 1
    auto result = train(data, idf, LossConfig{lambda, 10.0, aware, EnsembleMethod::NormAdd}, schedule);
    auto encoded = encode_corpus(result.params, data.docs);

    std::vector<std::uint32_t> by_idf(data.vocab.size());
    std::iota(by_idf.begin(), by_idf.end(), 0u);
    std::stable_sort(by_idf.begin(), by_idf.end(), [&](auto a, auto b) {
        return idf.lookup(TokenId{a}) < idf.lookup(TokenId{b});
    });
    std::set<std::uint32_t> bottom(by_idf.begin(), by_idf.begin() + (by_idf.size() + 3) / 4);
    double low = 0.0;
    double total = 0.0;
    for (auto const &d : encoded) {
        for (auto const &e : d) {
            total += e.weight;
            low += bottom.contains(e.token.value) ? e.weight : 0.0;
        }
    }
    return {eval::expansion_rate(encoded), flops_regularizer(encoded, data.vocab.size()),
            total > 0.0 ? low / total : 0.0};
}

Outcome sparsity_trend()
{
    std::string nnz;
    std::string flops;
    bool ok = true;
    FixtureRun prev{1e300, 1e300, 0.0};
    for (double lambda : {0.0, 1e-4, 1e-2, 1e-1}) {
        auto r = train_fixture(lambda, true);
        ok = ok && r.mean_nnz <= prev.mean_nnz && r.flops <= prev.flops;
        nnz += fmt("%s%.3f", nnz.empty() ? "" : " ", r.mean_nnz);
        flops += fmt("%s%.4f", flops.empty() ? "" : " ", r.flops);
        prev = r;
    }
    return {ok, "lambda_d {0,1e-4,1e-2,1e-1}: mean nnz [" + nnz + "], FLOPS [" + flops + "] (weakly decreasing required)"};
}

Outcome idf_penalty_trend()
{
    double const lambda = 0.1;
    auto aware = train_fixture(lambda, true);
    auto plain = train_fixture(lambda, false);
    return {aware.low_idf_share < plain.low_idf_share,
            fmt("lambda_d=%.2g, 300 steps, seed 1: bottom-quartile-IDF mass share idf-aware %.4f vs plain %.4f", lambda,
                aware.low_idf_share, plain.low_idf_share)};
}

// 8 -----------------------------------------------------------------------------

Outcome consistency_filter_check()
{
    // One token; document weights strictly decrease with index, so rank = index + 1.
    IndexBuilder b(Vocabulary({"a"}));
    for (int i = 0; i < 60; ++i) {
        b.add(fmt("d%02d", i), SparseVector::from_entries({{TokenId{0}, 100.0 - i}}));
    }
    auto index = std::move(b).build();
    std::vector<MiningQuery> queries;
    for (int rank : {1, 5, 10, 11, 50}) {
        queries.push_back({fmt("q-rank%d", rank), {"a"}, SparseVector::from_entries({{TokenId{0}, 1.0}}),
                           fmt("d%02d", rank - 1)});
    }
    auto mined = mine_hard_negatives(index, queries, 100, ScoreMode::Plain, nullptr);
    std::string ranks;
    for (auto const &m : mined) {
        ranks += fmt("%s%zu", ranks.empty() ? "" : ",", m.positive_rank.value_or(0));
    }
    auto kept = consistency_filter(mined, 10);
    std::string ids;
    for (auto const &m : kept) {
        ids += (ids.empty() ? "" : ",") + m.query_id;
    }
    bool ok = ranks == "1,5,10,11,50" && kept.size() == 3 && kept[0].query_id == "q-rank1"
              && kept[1].query_id == "q-rank5" && kept[2].query_id == "q-rank10";
    return {ok, "positive ranks {" + ranks + "}, k=10 keeps {" + ids + "}"};
}

// 9 -----------------------------------------------------------------------------

Outcome metric_oracles()
{
    std::mt19937_64 rng(909);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        auto [run, qrels] = testkit::naive::random_instance(rng);
        for (std::size_t k : {1u, 3u, 10u}) {
            worst = std::max(worst, std::abs(eval::ndcg_at_k(run, qrels, k) - testkit::naive::ndcg(run, qrels, k)));
            worst = std::max(worst, std::abs(eval::mrr_at_k(run, qrels, k) - testkit::naive::mrr(run, qrels, k)));
            worst = std::max(worst, std::abs(eval::recall_at_k(run, qrels, k) - testkit::naive::recall(run, qrels, k)));
        }
    }
    eval::Qrels one{{"q", {{"rel", 1}}}};
    double ndcg = eval::ndcg_at_k({{"q", {{"x", 2.0}, {"rel", 1.0}}}}, one, 10);
    double mrr = eval::mrr_at_k({{"q", {{"a", 3.0}, {"b", 2.0}, {"rel", 1.0}}}}, one, 10);
    eval::Qrels four{{"q", {{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}}}};
    double recall = eval::recall_at_k({{"q", {{"a", 3.0}, {"x", 2.0}, {"c", 1.0}}}}, four, 10);
    bool hand = std::abs(ndcg - 0.6309) < 1e-4 && std::abs(mrr - 1.0 / 3.0) < 1e-4 && std::abs(recall - 0.5) < 1e-4;
    return {worst <= 1e-12 && hand,
            fmt("100 random instances x k{1,3,10}: max |diff| vs naive %.2e (tol 1e-12); hand cases ndcg %.4f "
                "(0.6309), mrr %.4f (0.3333), recall %.4f (0.5)",
                worst, ndcg, mrr, recall)};
}

// 10 ----------------------------------------------------------------------------

int cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "lsr");
    std::vector<char const *> argv;
    for (auto const &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    return cli::run_command(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome round_trip_and_determinism()
{
    testkit::TempDir dir("accept");
    std::mt19937_64 rng(10);
    auto c = testkit::random_corpus(rng, 400, 60, 12);
    auto index = c.index();
    save_index(index, dir.file("a.idx"));
    auto reloaded = load_index(dir.file("a.idx"));
    save_index(reloaded, dir.file("b.idx"));
    bool index_ok = lsr::detail::read_file(dir.file("a.idx")) == lsr::detail::read_file(dir.file("b.idx")) && reloaded == index;

    EncoderFile enc{testkit::random_params(rng, 60), c.vocab.fingerprint(), "seed = 10\n"};
    save_encoder(enc, dir.file("a.enc"));
    save_encoder(load_encoder(dir.file("a.enc"), &c.vocab), dir.file("b.enc"));
    bool enc_ok = lsr::detail::read_file(dir.file("a.enc")) == lsr::detail::read_file(dir.file("b.enc"));

    bool train_ok = cli({"fixture", "--out-dir", dir.path().string()}) == 0;
    for (auto const *name : {"r1", "r2"}) {
        train_ok = train_ok
                   && cli({"train", "--corpus", dir.file("corpus.jsonl"), "--pairs", dir.file("pairs.jsonl"), "--seed",
                           "7", "--lambda-d", "0.02", "--out", dir.file(std::string(name) + ".enc"), "--log",
                           dir.file(std::string(name) + ".csv")})
                          == 0;
    }
    train_ok = train_ok && lsr::detail::read_file(dir.file("r1.enc")) == lsr::detail::read_file(dir.file("r2.enc"))
               && lsr::detail::read_file(dir.file("r1.csv")) == lsr::detail::read_file(dir.file("r2.csv"));
    return {index_ok && enc_ok && train_ok,
            fmt("index round-trip %s, encoder round-trip %s, two `train` runs (seed 7) byte-identical %s",
                index_ok ? "byte-exact" : "DIFFERS", enc_ok ? "byte-exact" : "DIFFERS", train_ok ? "yes" : "NO")};
}

// 11 ----------------------------------------------------------------------------

Outcome bench_sanity()
{
    auto fx = make_toy_fixture();
    auto idf = compute_idf(fx.docs, fx.vocab);
    IndexBuilder b(fx.vocab);
    for (std::size_t i = 0; i < fx.docs.size(); ++i) {
        b.add(fx.doc_ids[i], fx.docs[i]);
    }
    auto index = std::move(b).build();
    std::vector<SparseVector> queries;
    for (auto const &q : fx.queries) {
        queries.push_back(binarize_query(q.tokens, fx.vocab).vector);
    }
    eval::BenchConfig cfg;
    cfg.concurrency_levels = {1, 2};
    cfg.repetitions = 5000;
    auto rows = eval::bench(index, queries, {10, ScoreMode::IdfWeighted, std::nullopt}, &idf, cfg);
    bool ordered = true;
    for (auto const &r : rows) {
        ordered = ordered && r.p99_ms >= r.p50_ms;
    }
    double ratio = rows[1].qps / rows[0].qps;
    return {ordered && ratio >= 0.8,
            fmt("P99>=P50 at every level %s; qps c=1 %.0f, c=2 %.0f, ratio %.2f (>= 0.8)", ordered ? "yes" : "NO",
                rows[0].qps, rows[1].qps, ratio)};
}

}  // namespace

int main()
{
    struct Criterion {
        char const *name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> criteria{
        {"gradient correctness", gradient_check},
        {"idf-gradient proportionality", idf_proportionality},
        {"retrieval exactness", retrieval_exactness},
        {"flops metric oracle", flops_oracle},
        {"ensemble normalization", ensemble_normalization},
        {"sparsity trend", sparsity_trend},
        {"idf-aware penalty trend", idf_penalty_trend},
        {"consistency filter", consistency_filter_check},
        {"metric oracles", metric_oracles},
        {"round-trip and determinism", round_trip_and_determinism},
        {"bench harness sanity", bench_sanity},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (std::exception const &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %-29s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
