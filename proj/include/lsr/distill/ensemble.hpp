#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/error.hpp"

namespace lsr::distill {

struct Teacher {
    std::string id;
    std::vector<double> scores;  ///< aligned with the candidate documents
    double weight = 1.0;
};

/// Scores from several teachers over the same candidate list.
struct TeacherScores {
    std::vector<Teacher> teachers;

    [[nodiscard]] std::size_t candidates() const
    {
        return teachers.empty() ? 0 : teachers.front().scores.size();
    }

    void validate() const
    {
        if (teachers.empty()) {
            throw InvalidArgument("teacher scores: no teachers");
        }
        double total = 0.0;
        for (auto const &t : teachers) {
            if (t.scores.size() != teachers.front().scores.size()) {
                throw InvalidArgument("teacher scores: teacher " + t.id
                                      + " has a different number of scores");
            }
            if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) {
                throw InvalidArgument("teacher scores: teacher " + t.id + " has an invalid weight");
            }
            for (double s : t.scores) {
                if (!std::isfinite(s)) {
                    throw InvalidArgument("teacher scores: teacher " + t.id + " has a non-finite score");
                }
            }
            total += t.weight;
        }
        if (!(total > 0.0)) {
            throw InvalidArgument("teacher scores: weights must sum to a positive value");
        }
    }

    /// Restricts every teacher to the candidates at `positions`.
    [[nodiscard]] TeacherScores select(std::vector<std::size_t> const &positions) const
    {
        TeacherScores out;
        for (auto const &t : teachers) {
            Teacher sub{t.id, {}, t.weight};
            for (auto p : positions) {
                sub.scores.push_back(t.scores.at(p));
            }
            out.teachers.push_back(std::move(sub));
        }
        return out;
    }
};

enum class EnsembleMethod {
    NormAdd,    ///< min-max normalize per teacher, weighted sum, scale by S
    SimpleAdd,  ///< weighted sum of raw scores
};

inline EnsembleMethod parse_ensemble_method(std::string_view text)
{
    if (text == "norm_add") {
        return EnsembleMethod::NormAdd;
    }
    if (text == "simple_add") {
        return EnsembleMethod::SimpleAdd;
    }
    throw ConfigError("unknown ensemble method: " + std::string(text) + " (expected norm_add|simple_add)");
}

inline std::string_view to_string(EnsembleMethod m)
{
    return m == EnsembleMethod::NormAdd ? "norm_add" : "simple_add";
}

/// Maps scores onto [0, 1]. A constant list maps to 0.5 everywhere.
inline std::vector<double> min_max_normalize(std::vector<double> const &scores)
{
    if (scores.empty()) {
        return {};
    }
    auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    double const min = *lo;
    double const range = *hi - min;
    std::vector<double> out(scores.size(), 0.5);
    if (range > 0.0) {
        for (std::size_t i = 0; i < scores.size(); ++i) {
            out[i] = (scores[i] - min) / range;
        }
    }
    return out;
}

/// Normalizes each teacher to [0, 1], averages with weights rescaled to sum
/// to one, and multiplies by `scale`. Output lies in [0, scale].
inline std::vector<double> ensemble_teacher(TeacherScores const &teacher, double scale)
{
    teacher.validate();
    if (!(scale > 0.0)) {
        throw InvalidArgument("ensemble scale S must be positive");
    }
    auto n = teacher.candidates();
    if (n < 2) {
        throw InvalidArgument("ensemble_teacher needs at least two candidates");
    }
    double total_weight = 0.0;
    for (auto const &t : teacher.teachers) {
        total_weight += t.weight;
    }
    std::vector<double> out(n, 0.0);
    for (auto const &t : teacher.teachers) {
        auto norm = min_max_normalize(t.scores);
        double w = t.weight / total_weight;
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += w * norm[i];
        }
    }
    for (double &v : out) {
        v = std::clamp(scale * v, 0.0, scale);
    }
    return out;
}

/// Baseline without normalization: weighted sum of raw scores (weights sum to one).
inline std::vector<double> simple_add_teacher(TeacherScores const &teacher)
{
    teacher.validate();
    double total_weight = 0.0;
    for (auto const &t : teacher.teachers) {
        total_weight += t.weight;
    }
    std::vector<double> out(teacher.candidates(), 0.0);
    for (auto const &t : teacher.teachers) {
        double w = t.weight / total_weight;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += w * t.scores[i];
        }
    }
    return out;
}

inline std::vector<double> combine_teachers(TeacherScores const &teacher, EnsembleMethod method,
                                            double scale)
{
    return method == EnsembleMethod::NormAdd ? ensemble_teacher(teacher, scale)
                                             : simple_add_teacher(teacher);
}

}  // namespace lsr::distill
