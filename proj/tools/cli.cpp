#include "cli.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lsr/config.hpp"
#include "lsr/lsr.hpp"

namespace lsr::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr char const *kFormats = R"(
File formats:
  vectors / corpus (JSON lines)  {"id": "<doc_id>", "vector": {"<token>": <weight>, ...}}
                                 (for train/encode the weights are token counts)
  queries / pairs (JSON lines)   {"query_id": "...", "query_tokens": [...], "positive_id": "..."}
                                 ("text" may replace "query_tokens"; positive_id optional for search)
  idf table (JSON)               {"source": "<label>", "default": 1.0, "values": {"<token>": <idf>}}
  teachers (JSON lines)          {"query_id", "doc_ids": [...], "teachers": [{"id", "weight", "scores": [...]}]}
  qrels (TREC)                   <query_id> 0 <doc_id> <grade>
  run (TREC)                     <query_id> Q0 <doc_id> <rank> <score> <run_tag>
  index / encoder                binary, checksummed; produced by `index` / `train`
  training log (CSV)             step,loss_total,loss_rank,loss_flops,mean_nnz
Exit codes: 0 success, 1 usage error, 2 data or format error.)";

std::ifstream open_input(std::string const &path, std::string const &what)
{
    if (path.empty()) {
        throw ConfigError("missing required input: " + what);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + what + " file: " + path);
    }
    return in;
}

/// Writes to `path`, or to the command's standard output when empty.
class Sink {
  public:
    Sink(std::string const &path, std::ostream &fallback) : m_out(&fallback)
    {
        if (!path.empty()) {
            m_file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*m_file) {
                throw Error("cannot write file: " + path);
            }
            m_out = m_file.get();
        }
    }

    std::ostream &stream() { return *m_out; }

  private:
    std::unique_ptr<std::ofstream> m_file;
    std::ostream *m_out;
};

struct Corpus {
    Vocabulary vocab;
    std::vector<std::string> ids;
    std::vector<SparseVector> docs;
};

Corpus read_corpus(std::string const &path, std::string const &what)
{
    auto in = open_input(path, what);
    Corpus c;
    for (auto &rec : io::read_sparse_jsonl(in, c.vocab, true, path)) {
        try {
            c.docs.push_back(rec.vector());
        } catch (InvalidArgument const &e) {
            throw FormatError(path + ": document " + rec.id + ": " + e.what());
        }
        c.ids.push_back(std::move(rec.id));
    }
    return c;
}

std::vector<io::QueryRecord> read_queries(std::string const &path, std::string const &what)
{
    auto in = open_input(path, what);
    return io::read_queries(in, path);
}

IdfTable read_idf(std::string const &path, Vocabulary const &vocab)
{
    auto in = open_input(path, "idf");
    return io::read_idf(in, vocab, path);
}

json stats_json(IndexStats const &s)
{
    json j;
    j["corpus_size"] = s.corpus_size;
    j["distinct_tokens"] = s.distinct_tokens;
    j["total_postings"] = s.total_postings;
    j["mean_nnz_per_doc"] = s.mean_nnz_per_doc;
    return j;
}

json config_json(Config const &cfg)
{
    json j = json::object();
    std::istringstream lines(cfg.to_text());
    std::string line;
    while (std::getline(lines, line)) {
        auto eq = line.find(" = ");
        if (eq != std::string::npos) {
            j[line.substr(0, eq)] = line.substr(eq + 3);
        }
    }
    return j;
}

/// Search flags shared by `search` and `bench`.
struct SearchFlags {
    std::optional<std::size_t> k;
    std::optional<std::string> mode;
    bool two_phase = false;
    std::optional<double> idf_threshold;
    std::optional<std::size_t> window;

    void add_to(CLI::App *cmd)
    {
        cmd->add_option("--k", k, "number of results per query (default 10)");
        cmd->add_option("--mode", mode, "score mode: idf (default) or plain");
        cmd->add_flag("--two-phase", two_phase, "prefilter with high-IDF query tokens, then rescore");
        cmd->add_option("--idf-threshold", idf_threshold,
                        "two-phase: keep tokens with idf >= threshold (default: median of the query)");
        cmd->add_option("--window", window, "two-phase: candidates kept after phase 1 (default 100)");
    }

    void apply(SearchParams &p) const
    {
        if (k) {
            p.k = *k;
        }
        if (mode) {
            p.mode = parse_score_mode(*mode);
        }
        if (two_phase || idf_threshold || window) {
            TwoPhaseParams tp = p.two_phase.value_or(TwoPhaseParams{});
            if (idf_threshold) {
                tp.idf_threshold = *idf_threshold;
            }
            if (window) {
                tp.window = *window;
            }
            p.two_phase = tp;
        }
        p.validate();
    }
};

Config load_config(std::string const &path)
{
    return path.empty() ? Config{} : Config::from_file(path);
}

std::string pick(std::string const &flag, std::string const &from_config)
{
    return flag.empty() ? from_config : flag;
}

}  // namespace

int run_command(int argc, char const *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Inference-free learned sparse retrieval: indexing, search, distillation and evaluation"};
    app.require_subcommand(1);
    app.footer(kFormats);
    std::function<void()> action;

    // idf -----------------------------------------------------------------------
    std::string corpus_path;
    std::string out_path;
    std::string source_label;
    auto *idf_cmd = app.add_subcommand("idf", "compute a smoothed IDF table from a vector corpus");
    idf_cmd->add_option("--corpus", corpus_path, "corpus (vector JSON lines)")->required();
    idf_cmd->add_option("--out", out_path, "output IDF table (default: stdout)");
    idf_cmd->add_option("--source", source_label, "label stored in the table (default: corpus file name)");
    idf_cmd->footer(kFormats);
    idf_cmd->callback([&] {
        action = [&] {
            auto corpus = read_corpus(corpus_path, "corpus");
            auto label = source_label.empty() ? corpus_path : source_label;
            auto table = compute_idf(corpus.docs, corpus.vocab, label);
            Sink sink(out_path, out);
            sink.stream() << io::idf_to_json(table, corpus.vocab).dump(2) << '\n';
        };
    });

    // index ---------------------------------------------------------------------
    std::string vectors_path;
    bool print_stats = false;
    auto *index_cmd = app.add_subcommand("index", "build an inverted index from sparse document vectors");
    index_cmd->add_option("--vectors", vectors_path, "document vectors (JSON lines)")->required();
    index_cmd->add_option("--out", out_path, "output index file")->required();
    index_cmd->add_flag("--stats", print_stats,
                        "print {corpus_size, distinct_tokens, total_postings, mean_nnz_per_doc}");
    index_cmd->footer(kFormats);
    index_cmd->callback([&] {
        action = [&] {
            auto in = open_input(vectors_path, "vectors");
            Vocabulary vocab;
            auto records = io::read_sparse_jsonl(in, vocab, true, vectors_path);
            IndexBuilder builder(vocab);
            for (auto const &rec : records) {
                builder.add(rec.id, rec.entries);
            }
            for (auto const &d : builder.diagnostics()) {
                err << "warning: " << d << '\n';
            }
            auto index = std::move(builder).build();
            save_index(index, out_path);
            if (print_stats) {
                out << stats_json(index.stats()).dump() << '\n';
            }
        };
    });

    // search --------------------------------------------------------------------
    std::string index_path;
    std::string queries_path;
    std::string idf_path;
    std::string config_path;
    std::string run_tag = "lsr";
    SearchFlags search_flags;
    auto *search_cmd = app.add_subcommand("search", "retrieve top-k documents; writes a TREC run");
    search_cmd->add_option("--index", index_path, "index file");
    search_cmd->add_option("--queries", queries_path, "queries (JSON lines)")->required();
    search_cmd->add_option("--idf", idf_path, "IDF table (required for --mode idf and --two-phase)");
    search_cmd->add_option("--config", config_path, "config file ([search] and [paths] sections)");
    search_cmd->add_option("--run-tag", run_tag, "run tag column (default lsr)");
    search_cmd->add_option("--out", out_path, "output run file (default: stdout)");
    search_flags.add_to(search_cmd);
    search_cmd->footer(kFormats);
    search_cmd->callback([&] {
        action = [&] {
            auto cfg = load_config(config_path);
            search_flags.apply(cfg.search);
            auto index = load_index(pick(index_path, cfg.paths.index));
            std::optional<IdfTable> idf;
            if (auto p = pick(idf_path, cfg.paths.idf); !p.empty()) {
                idf = read_idf(p, index.vocabulary());
            }
            IdfTable const *idf_ptr = idf ? &*idf : nullptr;
            require_idf(cfg.search.mode, idf_ptr);
            if (cfg.search.two_phase && !idf_ptr) {
                throw ConfigError("--two-phase requires --idf");
            }
            Sink sink(pick(out_path, cfg.paths.run), out);
            std::size_t oov = 0;
            std::size_t fallbacks = 0;
            for (auto const &q : read_queries(queries_path, "queries")) {
                auto bq = binarize_query(q.tokens, index.vocabulary());
                oov += bq.oov_count;
                SearchStats stats;
                auto hits = run_search(index, bq.vector, cfg.search, idf_ptr, &stats);
                fallbacks += stats.fallbacks;
                eval::write_run_lines(q.query_id, hits, run_tag, sink.stream());
            }
            if (oov > 0) {
                err << "note: " << oov << " out-of-vocabulary query tokens dropped\n";
            }
            if (fallbacks > 0) {
                err << "warning: " << fallbacks << " queries fell back to exact search (no token above threshold)\n";
            }
        };
    });

    // train ---------------------------------------------------------------------
    std::string pairs_path;
    std::string teachers_path;
    std::string log_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda_d;
    std::optional<double> scale_s;
    std::optional<bool> idf_aware;
    std::optional<std::string> ensemble;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> negatives;
    std::optional<double> learning_rate;
    std::optional<std::size_t> mining_depth;
    auto *train_cmd = app.add_subcommand("train", "distill the toy sparse document encoder");
    train_cmd->add_option("--corpus", corpus_path, "corpus of token counts (vector JSON lines)");
    train_cmd->add_option("--pairs", pairs_path, "training pairs (JSON lines, with positive_id)");
    train_cmd->add_option("--teachers", teachers_path, "replayed teacher scores (JSON lines); default: oracle teachers");
    train_cmd->add_option("--idf", idf_path, "IDF table (default: computed from the corpus)");
    train_cmd->add_option("--config", config_path, "config file");
    train_cmd->add_option("--out", out_path, "output encoder file");
    train_cmd->add_option("--log", log_path, "training log CSV");
    train_cmd->add_option("--seed", seed, "random seed");
    train_cmd->add_option("--lambda-d", lambda_d, "FLOPS regularization weight");
    train_cmd->add_option("--scale-s", scale_s, "teacher ensemble scale S");
    train_cmd->add_option("--idf-aware", idf_aware, "IDF-weighted student scores (true|false)");
    train_cmd->add_option("--ensemble", ensemble, "norm_add (default) or simple_add");
    train_cmd->add_option("--steps", steps, "gradient steps");
    train_cmd->add_option("--batch-size", batch_size, "queries per step");
    train_cmd->add_option("--negatives", negatives, "hard negatives per query");
    train_cmd->add_option("--learning-rate", learning_rate, "gradient descent step size");
    train_cmd->add_option("--mining-depth", mining_depth, "documents mined per query for negatives");
    train_cmd->footer(kFormats);
    train_cmd->callback([&] {
        action = [&] {
            auto cfg = load_config(config_path);
            if (seed) cfg.schedule.seed = *seed;
            if (lambda_d) cfg.loss.lambda_d = *lambda_d;
            if (scale_s) cfg.loss.scale_S = *scale_s;
            if (idf_aware) cfg.loss.idf_aware = *idf_aware;
            if (ensemble) cfg.loss.ensemble = distill::parse_ensemble_method(*ensemble);
            if (steps) cfg.schedule.steps = *steps;
            if (batch_size) cfg.schedule.batch_size = *batch_size;
            if (negatives) cfg.schedule.negatives_per_query = *negatives;
            if (learning_rate) cfg.schedule.learning_rate = *learning_rate;
            if (mining_depth) cfg.schedule.mining_depth = *mining_depth;
            cfg.loss.validate();
            auto encoder_out = pick(out_path, cfg.paths.encoder);
            if (encoder_out.empty()) {
                throw ConfigError("train: --out (or paths.encoder) is required");
            }

            auto corpus = read_corpus(pick(corpus_path, cfg.paths.corpus), "corpus");
            distill::TrainingData data;
            data.vocab = corpus.vocab;
            data.doc_ids = corpus.ids;
            data.docs = corpus.docs;
            std::unordered_map<std::string, DocOrdinal> ord;
            for (std::size_t i = 0; i < data.doc_ids.size(); ++i) {
                if (!ord.emplace(data.doc_ids[i], static_cast<DocOrdinal>(i)).second) {
                    throw FormatError("corpus: duplicate doc_id: " + data.doc_ids[i]);
                }
            }
            auto find_doc = [&](std::string const &id, std::string const &ctx) {
                auto it = ord.find(id);
                if (it == ord.end()) {
                    throw FormatError(ctx + ": unknown doc_id " + id);
                }
                return it->second;
            };
            auto pairs_file = pick(pairs_path, cfg.paths.pairs);
            for (auto const &q : read_queries(pairs_file, "pairs")) {
                if (!q.positive_id) {
                    throw FormatError(pairs_file + ": query " + q.query_id + " has no positive_id");
                }
                data.pairs.push_back({q.query_id, q.tokens, binarize_query(q.tokens, data.vocab).vector,
                                      find_doc(*q.positive_id, pairs_file)});
            }
            if (auto tp = pick(teachers_path, cfg.paths.teachers); !tp.empty()) {
                auto in = open_input(tp, "teachers");
                for (auto &rec : io::read_teachers(in, tp)) {
                    distill::ReplayEntry entry;
                    for (auto const &id : rec.doc_ids) {
                        entry.docs.push_back(find_doc(id, tp));
                    }
                    entry.teacher = std::move(rec.teacher);
                    data.replay.emplace(rec.query_id, std::move(entry));
                }
            }
            auto idf_file = pick(idf_path, cfg.paths.idf);
            auto idf = idf_file.empty() ? compute_idf(data.docs, data.vocab, "corpus")
                                        : read_idf(idf_file, data.vocab);

            auto result = distill::train(data, idf, cfg.loss, cfg.schedule);
            auto effective = cfg.to_text() + "idf.source = " + idf.source() + '\n';
            distill::save_encoder({result.params, data.vocab.fingerprint(), effective}, encoder_out);
            if (auto lp = pick(log_path, cfg.paths.log); !lp.empty()) {
                Sink sink(lp, out);
                distill::write_training_log(result.log, sink.stream());
            }
            if (!result.log.empty()) {
                auto const &first = result.log.front();
                auto const &last = result.log.back();
                err << "trained " << result.log.size() << " steps: loss " << first.loss_total << " -> "
                    << last.loss_total << ", mean nnz " << last.mean_nnz << '\n';
            }
        };
    });

    // encode --------------------------------------------------------------------
    std::string encoder_path;
    auto *encode_cmd = app.add_subcommand("encode", "encode a token-count corpus with a trained encoder");
    encode_cmd->add_option("--encoder", encoder_path, "encoder file from `train`")->required();
    encode_cmd->add_option("--corpus", corpus_path, "corpus of token counts (the one used for training)")->required();
    encode_cmd->add_option("--out", out_path, "output vectors (default: stdout)");
    encode_cmd->footer(kFormats);
    encode_cmd->callback([&] {
        action = [&] {
            auto corpus = read_corpus(corpus_path, "corpus");
            auto enc = distill::load_encoder(encoder_path, &corpus.vocab);
            Sink sink(out_path, out);
            for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
                io::write_sparse_line(sink.stream(), corpus.ids[i],
                                      distill::encode_document(enc.params, corpus.docs[i]), corpus.vocab);
            }
        };
    });

    // mine ----------------------------------------------------------------------
    std::size_t depth = 100;
    std::string mine_mode = "idf";
    auto *mine_cmd = app.add_subcommand("mine", "mine top-M candidates per training pair from an index");
    mine_cmd->add_option("--index", index_path, "index built from the miner's document vectors")->required();
    mine_cmd->add_option("--pairs", pairs_path, "training pairs (JSON lines)")->required();
    mine_cmd->add_option("--idf", idf_path, "IDF table (required for --mode idf)");
    mine_cmd->add_option("--depth", depth, "M, documents per query (default 100)");
    mine_cmd->add_option("--mode", mine_mode, "score mode: idf (default) or plain");
    mine_cmd->add_option("--out", out_path, "output mined candidates (default: stdout)");
    mine_cmd->footer(kFormats);
    mine_cmd->callback([&] {
        action = [&] {
            auto index = load_index(index_path);
            auto mode = parse_score_mode(mine_mode);
            std::optional<IdfTable> idf;
            if (!idf_path.empty()) {
                idf = read_idf(idf_path, index.vocabulary());
            }
            require_idf(mode, idf ? &*idf : nullptr);
            std::vector<distill::MiningQuery> queries;
            for (auto const &q : read_queries(pairs_path, "pairs")) {
                if (!q.positive_id) {
                    throw FormatError(pairs_path + ": query " + q.query_id + " has no positive_id");
                }
                queries.push_back({q.query_id, q.tokens, binarize_query(q.tokens, index.vocabulary()).vector,
                                   *q.positive_id});
            }
            auto mined = distill::mine_hard_negatives(index, queries, depth, mode, idf ? &*idf : nullptr);
            Sink sink(out_path, out);
            for (auto const &m : mined) {
                io::write_mined_line(sink.stream(), m);
            }
        };
    });

    // filter --------------------------------------------------------------------
    std::string mined_path;
    std::size_t filter_k = 10;
    auto *filter_cmd = app.add_subcommand("filter", "keep pairs whose positive ranks within the top k");
    filter_cmd->add_option("--mined", mined_path, "output of `mine`")->required();
    filter_cmd->add_option("--k", filter_k, "rank cutoff (default 10)");
    filter_cmd->add_option("--out", out_path, "output training pairs (default: stdout)");
    filter_cmd->footer(kFormats);
    filter_cmd->callback([&] {
        action = [&] {
            auto in = open_input(mined_path, "mined");
            auto mined = io::read_mined(in, mined_path);
            auto kept = distill::consistency_filter(mined, filter_k);
            Sink sink(out_path, out);
            for (auto const &m : kept) {
                io::write_query_line(sink.stream(), {m.query_id, m.query_tokens, m.positive_id});
            }
            err << "kept " << kept.size() << " of " << mined.size() << " pairs\n";
        };
    });

    // eval ----------------------------------------------------------------------
    std::string run_path;
    std::string qrels_path;
    std::size_t eval_k = 10;
    auto *eval_cmd = app.add_subcommand("eval", "NDCG@k, MRR@k and Recall@k of a run against qrels");
    eval_cmd->add_option("--run", run_path, "TREC run file")->required();
    eval_cmd->add_option("--qrels", qrels_path, "TREC qrels file")->required();
    eval_cmd->add_option("--k", eval_k, "cutoff (default 10)");
    eval_cmd->add_option("--out", out_path, "write the JSON here instead of stdout");
    eval_cmd->footer(kFormats);
    eval_cmd->callback([&] {
        action = [&] {
            auto run_in = open_input(run_path, "run");
            auto qrels_in = open_input(qrels_path, "qrels");
            auto run = eval::read_run(run_in, run_path);
            auto qrels = eval::read_qrels(qrels_in, qrels_path);
            auto metrics = eval::evaluate(run, qrels, eval_k);
            json j = json::object();
            for (auto const &[name, value] : metrics) {
                j[name] = value;
            }
            Sink sink(out_path, out);
            sink.stream() << j.dump() << '\n';
            char buf[96];
            for (auto const &[name, value] : metrics) {
                std::snprintf(buf, sizeof(buf), "%-12s %.4f\n", name.c_str(), value);
                err << buf;
            }
        };
    });

    // bench ---------------------------------------------------------------------
    std::string concurrency = "1,2";
    std::size_t repetitions = 20;
    auto *bench_cmd = app.add_subcommand("bench", "latency/throughput of exact (and two-phase) search");
    bench_cmd->add_option("--index", index_path, "index file")->required();
    bench_cmd->add_option("--queries", queries_path, "queries (JSON lines)")->required();
    bench_cmd->add_option("--idf", idf_path, "IDF table");
    bench_cmd->add_option("--config", config_path, "config file");
    bench_cmd->add_option("--concurrency", concurrency, "comma-separated worker counts (default 1,2)");
    bench_cmd->add_option("--repetitions", repetitions, "passes over the query set per level (default 20)");
    bench_cmd->add_option("--seed", seed, "query order seed");
    bench_cmd->add_option("--out", out_path, "write the JSON report here instead of stdout");
    search_flags.add_to(bench_cmd);
    bench_cmd->footer(kFormats);
    bench_cmd->callback([&] {
        action = [&] {
            auto cfg = load_config(config_path);
            if (seed) {
                cfg.schedule.seed = *seed;
            }
            search_flags.apply(cfg.search);
            auto index = load_index(index_path);
            std::optional<IdfTable> idf;
            if (!idf_path.empty()) {
                idf = read_idf(idf_path, index.vocabulary());
            }
            IdfTable const *idf_ptr = idf ? &*idf : nullptr;
            require_idf(cfg.search.mode, idf_ptr);
            std::vector<SparseVector> queries;
            for (auto const &q : read_queries(queries_path, "queries")) {
                queries.push_back(binarize_query(q.tokens, index.vocabulary()).vector);
            }
            eval::BenchConfig bc;
            bc.concurrency_levels.clear();
            std::stringstream ss(concurrency);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    bc.concurrency_levels.push_back(std::stoul(item));
                } catch (std::logic_error const &) {
                    throw ConfigError("--concurrency: not a number: " + item);
                }
            }
            bc.repetitions = repetitions;
            bc.seed = cfg.seed();

            SearchParams exact = cfg.search;
            exact.two_phase.reset();
            bc.label = "exact";
            auto rows = eval::bench(index, queries, exact, idf_ptr, bc);
            if (cfg.search.two_phase) {
                if (!idf_ptr) {
                    throw ConfigError("--two-phase requires --idf");
                }
                bc.label = "two_phase";
                auto tp = eval::bench(index, queries, cfg.search, idf_ptr, bc);
                rows.insert(rows.end(), tp.begin(), tp.end());
            }
            json report;
            report["config"] = config_json(cfg);
            report["rows"] = json::array();
            for (auto const &r : rows) {
                report["rows"].push_back({{"label", r.label},
                                          {"concurrency", r.concurrency},
                                          {"queries", r.queries},
                                          {"p50_ms", r.p50_ms},
                                          {"p99_ms", r.p99_ms},
                                          {"mean_ms", r.mean_ms},
                                          {"qps", r.qps},
                                          {"fallbacks", r.fallbacks}});
            }
            Sink sink(out_path, out);
            sink.stream() << report.dump(2) << '\n';
            err << eval::format_table(rows);
        };
    });

    // stats ---------------------------------------------------------------------
    auto *stats_cmd = app.add_subcommand("stats", "index summary, expansion rate and theoretical FLOPS");
    stats_cmd->add_option("--index", index_path, "index file")->required();
    stats_cmd->add_option("--queries", queries_path, "queries for the theoretical FLOPS figure");
    stats_cmd->footer(kFormats);
    stats_cmd->callback([&] {
        action = [&] {
            auto index = load_index(index_path);
            auto j = stats_json(index.stats());
            j["expansion_rate"] = index.stats().mean_nnz_per_doc;
            if (!queries_path.empty()) {
                std::vector<SparseVector> queries;
                for (auto const &q : read_queries(queries_path, "queries")) {
                    queries.push_back(binarize_query(q.tokens, index.vocabulary()).vector);
                }
                j["queries"] = queries.size();
                j["theoretical_flops"] = index.corpus_size() == 0
                                             ? 0.0
                                             : theoretical_flops(queries, index.document_frequencies(),
                                                                 index.corpus_size());
            }
            out << j.dump() << '\n';
        };
    });

    // fixture -------------------------------------------------------------------
    std::string out_dir;
    FixtureSpec spec;
    auto *fixture_cmd = app.add_subcommand("fixture", "write the seeded toy corpus, pairs and qrels");
    fixture_cmd->add_option("--out-dir", out_dir, "existing output directory")->required();
    fixture_cmd->add_option("--seed", spec.seed, "fixture seed (default 7)");
    fixture_cmd->add_option("--vocab", spec.vocab, "vocabulary size (default 50)");
    fixture_cmd->add_option("--docs", spec.docs, "documents (default 40)");
    fixture_cmd->add_option("--queries", spec.queries, "queries (default 16)");
    fixture_cmd->footer(kFormats);
    fixture_cmd->callback([&] {
        action = [&] {
            auto fx = make_toy_fixture(spec);
            Sink corpus(out_dir + "/corpus.jsonl", out);
            for (std::size_t i = 0; i < fx.docs.size(); ++i) {
                io::write_sparse_line(corpus.stream(), fx.doc_ids[i], fx.docs[i], fx.vocab);
            }
            Sink pairs(out_dir + "/pairs.jsonl", out);
            eval::Qrels qrels;
            for (auto const &q : fx.queries) {
                io::write_query_line(pairs.stream(), {q.id, q.tokens, fx.doc_ids[q.positive]});
                qrels[q.id][fx.doc_ids[q.positive]] = 1;
            }
            Sink qrels_out(out_dir + "/qrels.trec", out);
            eval::write_qrels(qrels, qrels_out.stream());
        };
    });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (CLI::ParseError const &e) {
        std::ostringstream o;
        std::ostringstream e2;
        int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (action) {
            action();
        }
        return kOk;
    } catch (ConfigError const &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (Error const &e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (std::exception const &e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
}

}  // namespace lsr::cli
