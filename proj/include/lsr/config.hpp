#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <vector>
#include <type_traits>
#include <optional>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lsr/distill/loss.hpp"
#include "lsr/distill/train.hpp"
#include "lsr/error.hpp"
#include "lsr/retrieval.hpp"

namespace lsr {

/// Everything a run depends on. Loaded from an INI-style file (`key = value`
/// under `[section]` headers), then overridden by command-line flags.
///
///     seed = 7
///     [loss]      lambda_d, scale_S, idf_aware, ensemble (norm_add|simple_add)
///     [schedule]  steps, batch_size, negatives_per_query, learning_rate, mining_depth
///     [search]    k, mode (plain|idf), two_phase, idf_threshold, window
///     [paths]     corpus, pairs, teachers, idf, index, encoder, qrels, run, out, log
struct Config {
    struct Paths {
        std::string corpus, pairs, teachers, idf, index, encoder, qrels, run, out, log;
    };

    Paths paths;
    SearchParams search;
    distill::LossConfig loss;
    distill::Schedule schedule;

    [[nodiscard]] std::uint64_t seed() const { return schedule.seed; }

    static Config from_ini(std::istream &in, std::string const &name = "config")
    {
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(in, tree);
        } catch (boost::property_tree::ini_parser_error const &e) {
            throw ConfigError(name + ": " + e.what());
        }
        Config cfg;
        cfg.apply(tree, name);
        return cfg;
    }

    static Config from_file(std::string const &path)
    {
        std::ifstream in(path);
        if (!in) {
            throw Error("cannot open config file: " + path);
        }
        return from_ini(in, path);
    }

    /// Canonical `section.key = value` listing of the effective configuration.
    [[nodiscard]] std::string to_text() const
    {
        std::ostringstream out;
        out.precision(17);
        out << "seed = " << schedule.seed << '\n';
        out << "loss.lambda_d = " << loss.lambda_d << '\n';
        out << "loss.scale_S = " << loss.scale_S << '\n';
        out << "loss.idf_aware = " << (loss.idf_aware ? "true" : "false") << '\n';
        out << "loss.ensemble = " << to_string(loss.ensemble) << '\n';
        out << "schedule.steps = " << schedule.steps << '\n';
        out << "schedule.batch_size = " << schedule.batch_size << '\n';
        out << "schedule.negatives_per_query = " << schedule.negatives_per_query << '\n';
        out << "schedule.learning_rate = " << schedule.learning_rate << '\n';
        out << "schedule.mining_depth = " << schedule.mining_depth << '\n';
        out << "search.k = " << search.k << '\n';
        out << "search.mode = " << to_string(search.mode) << '\n';
        out << "search.two_phase = " << (search.two_phase ? "true" : "false") << '\n';
        if (search.two_phase) {
            out << "search.window = " << search.two_phase->window << '\n';
            if (search.two_phase->idf_threshold) {
                out << "search.idf_threshold = " << *search.two_phase->idf_threshold << '\n';
            }
        }
        return out.str();
    }

  private:
    template <typename T>
    static void read(boost::property_tree::ptree const &tree, std::string const &key, T &dst,
                     std::string const &name)
    {
        auto node = tree.get_optional<std::string>(key);
        if (!node) {
            return;
        }
        auto text = unquote(*node);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (text == "true" || text == "1" || text == "yes") {
                    dst = true;
                } else if (text == "false" || text == "0" || text == "no") {
                    dst = false;
                } else {
                    throw std::invalid_argument(text);
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                dst = text;
            } else if constexpr (std::is_floating_point_v<T>) {
                std::size_t used = 0;
                dst = static_cast<T>(std::stod(text, &used));
                if (used != text.size()) {
                    throw std::invalid_argument(text);
                }
            } else {
                std::size_t used = 0;
                auto v = std::stoull(text, &used);
                if (used != text.size() || text.starts_with('-')) {
                    throw std::invalid_argument(text);
                }
                dst = static_cast<T>(v);
            }
        } catch (std::logic_error const &) {
            throw ConfigError(name + ": invalid value for " + key + ": '" + text + "'");
        }
    }

    static std::string unquote(std::string s)
    {
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
            return s.substr(1, s.size() - 2);
        }
        return s;
    }

    void apply(boost::property_tree::ptree const &tree, std::string const &name)
    {
        static constexpr char const *kKnown[] = {
            "seed", "loss", "schedule", "search", "paths",
        };
        static std::map<std::string, std::vector<std::string>> const kSectionKeys = {
            {"loss", {"lambda_d", "scale_S", "idf_aware", "ensemble"}},
            {"schedule", {"steps", "batch_size", "negatives_per_query", "learning_rate", "mining_depth"}},
            {"search", {"k", "mode", "two_phase", "idf_threshold", "window"}},
            {"paths", {"corpus", "pairs", "teachers", "idf", "index", "encoder", "qrels", "run", "out", "log"}},
        };
        for (auto const &[key, child] : tree) {
            if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
                throw ConfigError(name + ": unknown key or section '" + key + "'");
            }
            if (auto it = kSectionKeys.find(key); it != kSectionKeys.end()) {
                for (auto const &[sub, unused] : child) {
                    if (std::find(it->second.begin(), it->second.end(), sub) == it->second.end()) {
                        throw ConfigError(name + ": unknown key '" + key + "." + sub + "'");
                    }
                }
            }
        }
        read(tree, "seed", schedule.seed, name);
        read(tree, "loss.lambda_d", loss.lambda_d, name);
        read(tree, "loss.scale_S", loss.scale_S, name);
        read(tree, "loss.idf_aware", loss.idf_aware, name);
        std::string text;
        read(tree, "loss.ensemble", text, name);
        if (!text.empty()) {
            loss.ensemble = distill::parse_ensemble_method(text);
        }
        read(tree, "schedule.steps", schedule.steps, name);
        read(tree, "schedule.batch_size", schedule.batch_size, name);
        read(tree, "schedule.negatives_per_query", schedule.negatives_per_query, name);
        read(tree, "schedule.learning_rate", schedule.learning_rate, name);
        read(tree, "schedule.mining_depth", schedule.mining_depth, name);
        read(tree, "search.k", search.k, name);
        text.clear();
        read(tree, "search.mode", text, name);
        if (!text.empty()) {
            search.mode = parse_score_mode(text);
        }
        bool two_phase = false;
        read(tree, "search.two_phase", two_phase, name);
        if (two_phase) {
            TwoPhaseParams tp;
            read(tree, "search.window", tp.window, name);
            if (tree.get_optional<std::string>("search.idf_threshold")) {
                double threshold = 0.0;
                read(tree, "search.idf_threshold", threshold, name);
                tp.idf_threshold = threshold;
            }
            search.two_phase = tp;
        }
        read(tree, "paths.corpus", paths.corpus, name);
        read(tree, "paths.pairs", paths.pairs, name);
        read(tree, "paths.teachers", paths.teachers, name);
        read(tree, "paths.idf", paths.idf, name);
        read(tree, "paths.index", paths.index, name);
        read(tree, "paths.encoder", paths.encoder, name);
        read(tree, "paths.qrels", paths.qrels, name);
        read(tree, "paths.run", paths.run, name);
        read(tree, "paths.out", paths.out, name);
        read(tree, "paths.log", paths.log, name);
        loss.validate();
    }
};

}  // namespace lsr
