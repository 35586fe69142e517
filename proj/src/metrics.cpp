#include "metats/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metats/errors.hpp"

namespace metats {

double regret_increment(std::span<const double> expected, std::size_t chosen) {
    if (chosen >= expected.size())
        throw IndexOutOfRange("chosen index " + std::to_string(chosen) + " out of range");
    return *std::max_element(expected.begin(), expected.end()) - expected[chosen];
}

double outage_frequency(std::span<const CpiRecord> rows, double threshold_db) {
    if (rows.empty()) throw EmptyInput("outage frequency of no CPIs");
    const auto hits = std::count_if(rows.begin(), rows.end(),
                                    [&](const CpiRecord& r) { return r.sinr_db < threshold_db; });
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double outage_frequency(std::span<const TrackRecord> tracks, double threshold_db) {
    std::size_t hits = 0, total = 0;
    for (const auto& t : tracks)
        for (const auto& r : t.rows) {
            hits += r.sinr_db < threshold_db;
            ++total;
        }
    if (total == 0) throw EmptyInput("outage frequency of no CPIs");
    return static_cast<double>(hits) / static_cast<double>(total);
}

double suboptimal_frequency(std::span<const CpiRecord> rows) {
    if (rows.empty()) throw EmptyInput("suboptimal frequency of no CPIs");
    const auto hits =
        std::count_if(rows.begin(), rows.end(), [](const CpiRecord& r) { return r.suboptimal; });
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double suboptimal_frequency(std::span<const TrackRecord> tracks) {
    std::size_t hits = 0, total = 0;
    for (const auto& t : tracks)
        for (const auto& r : t.rows) {
            hits += r.suboptimal;
            ++total;
        }
    if (total == 0) throw EmptyInput("suboptimal frequency of no CPIs");
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> kl_trace(std::span<const MetaPosterior> history, const Vector& mu_star) {
    if (history.empty()) throw EmptyInput("KL trace of an empty history");
    const auto truth = Gaussian::isotropic(mu_star, kKlReferenceVar);
    std::vector<double> out;
    out.reserve(history.size());
    for (const auto& mp : history) out.push_back(kl_gaussian(mp.belief(), truth));
    return out;
}

namespace {

void check_bound_inputs(const BoundInputs& b) {
    if (!(b.m >= 2.0)) throw InvalidInput("bound needs m >= 2");
    if (!(b.delta > 0.0 && b.delta <= 1.0)) throw InvalidInput("delta must lie in (0, 1]");
    if (!(b.kl >= 0.0)) throw InvalidInput("KL term must be nonnegative");
    if (!(b.empirical_error >= 0.0 && b.empirical_error <= 1.0))
        throw InvalidInput("empirical error must lie in [0, 1]");
}

} // namespace

double pac_bayes_single(const BoundInputs& b) {
    check_bound_inputs(b);
    return b.empirical_error + std::sqrt((b.kl + std::log(b.m / b.delta)) / (2.0 * (b.m - 1.0)));
}

double pac_bayes_meta(std::span<const BoundInputs> per_task, double env_kl, std::size_t n_tasks,
                      double delta) {
    if (n_tasks < 2) throw InvalidInput("meta bound needs at least two tasks");
    if (per_task.empty()) throw InvalidInput("meta bound needs per-task inputs");
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in (0, 1]");
    if (!(env_kl >= 0.0)) throw InvalidInput("environment KL must be nonnegative");
    const auto n = static_cast<double>(n_tasks);
    double err = 0.0, task_terms = 0.0;
    for (const auto& b : per_task) {
        check_bound_inputs(b);
        err += b.empirical_error;
        task_terms +=
            std::sqrt((env_kl + b.kl + std::log(2.0 * n * b.m / delta)) / (2.0 * (b.m - 1.0)));
    }
    const auto count = static_cast<double>(per_task.size());
    const double env_term = std::sqrt((env_kl + std::log(2.0 * n / delta)) / (2.0 * (n - 1.0)));
    return err / count + task_terms / count + env_term;
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("ECDF of no values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        // last occurrence of each value carries the cumulative count
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        out.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

} // namespace metats
