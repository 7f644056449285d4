#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lsr/error.hpp"
#include "lsr/idf.hpp"
#include "lsr/index.hpp"
#include "lsr/retrieval.hpp"

namespace lsr::eval {

struct BenchConfig {
    std::vector<std::size_t> concurrency_levels{1, 2};
    std::size_t repetitions = 20;  ///< passes over the query set per level
    std::uint64_t seed = 1;
    std::string label = "exact";
};

struct BenchRow {
    std::string label;
    std::size_t concurrency = 1;
    std::size_t queries = 0;
    double p50_ms = 0.0;
    double p99_ms = 0.0;
    double mean_ms = 0.0;
    double qps = 0.0;
    std::size_t fallbacks = 0;
};

/// Nearest-rank percentile of an ascending sequence.
inline double percentile(std::vector<double> const &sorted, double p)
{
    if (sorted.empty()) {
        return 0.0;
    }
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

/// Runs the query workload once per concurrency level. The workload (queries
/// repeated `repetitions` times, shuffled by `seed`) is identical across levels;
/// workers pull the next query from a shared counter and record the wall-clock
/// latency of each call in the slot of that query.
inline std::vector<BenchRow> bench(InvertedIndex const &index, std::vector<SparseVector> const &queries,
                                   SearchParams const &params, IdfTable const *idf, BenchConfig const &cfg)
{
    if (queries.empty()) {
        throw InvalidArgument("bench: no queries");
    }
    std::vector<std::size_t> order;
    for (std::size_t r = 0; r < std::max<std::size_t>(cfg.repetitions, 1); ++r) {
        for (std::size_t q = 0; q < queries.size(); ++q) {
            order.push_back(q);
        }
    }
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);

    for (auto const &q : queries) {
        (void)run_search(index, q, params, idf);
    }

    std::vector<BenchRow> rows;
    for (auto level : cfg.concurrency_levels) {
        if (level == 0) {
            throw InvalidArgument("bench: concurrency level must be positive");
        }
        std::vector<double> latency(order.size(), 0.0);
        std::vector<std::size_t> fallbacks(order.size(), 0);
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            SearchStats stats;
            while (true) {
                auto slot = next.fetch_add(1, std::memory_order_relaxed);
                if (slot >= order.size()) {
                    break;
                }
                auto t0 = std::chrono::steady_clock::now();
                auto hits = run_search(index, queries[order[slot]], params, idf, &stats);
                auto t1 = std::chrono::steady_clock::now();
                latency[slot] = std::chrono::duration<double, std::milli>(t1 - t0).count();
                fallbacks[slot] = stats.fallbacks;
                (void)hits;
            }
        };
        auto start = std::chrono::steady_clock::now();
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < level; ++w) {
            threads.emplace_back(worker);
        }
        for (auto &t : threads) {
            t.join();
        }
        auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        BenchRow row;
        row.label = cfg.label;
        row.concurrency = level;
        row.queries = order.size();
        double total = 0.0;
        for (double v : latency) {
            total += v;
        }
        for (auto f : fallbacks) {
            row.fallbacks += f;
        }
        row.mean_ms = total / static_cast<double>(latency.size());
        std::sort(latency.begin(), latency.end());
        row.p50_ms = percentile(latency, 0.50);
        row.p99_ms = percentile(latency, 0.99);
        row.qps = wall > 0.0 ? static_cast<double>(order.size()) / wall : 0.0;
        rows.push_back(row);
    }
    return rows;
}

inline std::string format_table(std::vector<BenchRow> const &rows)
{
    std::string out = "label        conc  queries     p50_ms     p99_ms    mean_ms          qps\n";
    char buf[160];
    for (auto const &r : rows) {
        std::snprintf(buf, sizeof(buf), "%-12s %4zu %8zu %10.4f %10.4f %10.4f %12.1f\n", r.label.c_str(),
                      r.concurrency, r.queries, r.p50_ms, r.p99_ms, r.mean_ms, r.qps);
        out += buf;
    }
    return out;
}

}  // namespace lsr::eval
