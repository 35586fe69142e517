#include <doctest.h>

#include <cmath>
#include <map>

#include "metats/bandit.hpp"
#include "metats/errors.hpp"
#include "oracles.hpp"

using namespace metats;

namespace {

Vector vec3(double a, double b, double c) {
    Vector v(3);
    v << a, b, c;
    return v;
}

TsAgent fresh_agent(std::size_t k = 5, std::size_t n_obs = 4) {
    return TsAgent::from_prior(Gaussian::isotropic(Vector::Zero(3), 1.0), 0.05, k, n_obs);
}

} // namespace

TEST_CASE("compute_loss clamps the SINR ratio") {
    CHECK(compute_loss(15.0, 15.0) == 1.0);
    CHECK(compute_loss(0.0, 15.0) == 0.0);
    CHECK(compute_loss(7.5, 15.0) == 0.5);
    CHECK(compute_loss(1e6, 15.0) == 1.0);
    CHECK_THROWS_AS(compute_loss(1.0, 0.0), InvalidInput);
}

TEST_CASE("cold-start context") {
    const auto agent = fresh_agent();
    const auto phi = build_context(agent, 2, 3);
    CHECK(phi[0] == 0.5);
    CHECK(phi[1] == 1.0 / 12.0);
    CHECK(phi[2] == 0.5);
}

TEST_CASE("single-loss context uses the variance fill") {
    auto agent = fresh_agent();
    agent = record(agent, HistoryEntry{0, 1, 2, 0.8, build_context(agent, 1, 2)});
    const auto phi = build_context(agent, 1, 2);
    CHECK(phi[0] == 0.8);
    CHECK(phi[1] == 1.0 / 12.0);
    CHECK(phi[2] == 0.8);
    // other pairs are untouched
    CHECK(build_context(agent, 0, 2)[0] == 0.5);
    CHECK(build_context(agent, 1, 1)[0] == 0.5);
}

TEST_CASE("context statistics over three losses") {
    auto agent = fresh_agent();
    for (double l : {0.2, 0.4, 0.9}) agent = record(agent, HistoryEntry{0, 0, 0, l, build_context(agent, 0, 0)});
    const auto phi = build_context(agent, 0, 0);
    // brute force: mean 1.5 / 3, population variance of the deviations
    const double mean = (0.2 + 0.4 + 0.9) / 3.0;
    const double var = ((0.2 - mean) * (0.2 - mean) + (0.4 - mean) * (0.4 - mean) +
                        (0.9 - mean) * (0.9 - mean)) / 3.0;
    CHECK(phi[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(phi[1] == doctest::Approx(var).epsilon(1e-12));
    CHECK(phi[1] == doctest::Approx(0.08667).epsilon(1e-4));
    CHECK(phi[2] == 0.9);
}

TEST_CASE("context features stay in range") {
    auto rng = make_stream(51, {});
    auto agent = fresh_agent(3, 2);
    for (int i = 0; i < 500; ++i) {
        const int o = static_cast<int>(i % 2);
        const std::size_t w = static_cast<std::size_t>(i % 3);
        agent = record(agent, HistoryEntry{static_cast<std::size_t>(i), o, w, uniform01(rng),
                                           build_context(agent, o, w)});
        const auto phi = build_context(agent, o, w);
        CHECK(phi[0] >= 0.0);
        CHECK(phi[0] <= 1.0);
        CHECK(phi[1] >= 0.0);
        CHECK(phi[1] <= 0.25);
        CHECK(phi[2] >= 0.0);
        CHECK(phi[2] <= 1.0);
    }
}

TEST_CASE("point-mass posterior selects by the first feature") {
    auto rng = make_stream(52, {});
    const auto belief = Gaussian::isotropic(vec3(1, 0, 0), 1e-30);
    const std::vector<Vector> contexts{vec3(0.2, 0.3, 0.9), vec3(0.9, 0.0, 0.1)};
    for (int i = 0; i < 100; ++i) CHECK(thompson_select(belief, contexts, rng) == 1);
}

TEST_CASE("identical contexts go to the lowest index") {
    auto rng = make_stream(53, {});
    const auto agent = fresh_agent();
    for (int i = 0; i < 100; ++i) CHECK(select_waveform(agent, 0, rng) == 0);
    const std::vector<Vector> same(4, vec3(0.3, 0.1, 0.7));
    CHECK(argmax_score(same, vec3(-1, 2, 0.5)) == 0);
}

TEST_CASE("two-arm selection frequency matches the normal CDF") {
    auto rng = make_stream(54, {});
    Matrix cov(3, 3);
    cov << 0.5, 0.1, 0.0, 0.1, 0.3, -0.05, 0.0, -0.05, 0.2;
    const Gaussian belief(vec3(0.2, -0.1, 0.3), cov);
    const std::vector<Vector> contexts{vec3(0.6, 0.05, 0.7), vec3(0.5, 0.2, 0.9)};
    const Vector diff = contexts[0] - contexts[1];
    const double p0 = oracle::phi(diff.dot(belief.mean()) / std::sqrt(diff.dot(cov * diff)));
    const int n = 100000;
    int first = 0;
    for (int i = 0; i < n; ++i) first += thompson_select(belief, contexts, rng) == 0;
    CHECK(std::abs(static_cast<double>(first) / n - p0) < 0.01);
}

TEST_CASE("scaling every context leaves the choice unchanged") {
    auto rng = make_stream(55, {});
    const Gaussian belief(vec3(0.1, 0.2, -0.1), oracle::random_spd(3, rng));
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<Vector> contexts, scaled;
        for (int i = 0; i < 5; ++i) {
            contexts.push_back(vec3(uniform01(rng), 0.25 * uniform01(rng), uniform01(rng)));
            scaled.push_back(3.7 * contexts.back());
        }
        auto a = make_stream(rep, {1});
        auto b = make_stream(rep, {1});
        CHECK(thompson_select(belief, contexts, a) == thompson_select(belief, scaled, b));
    }
}

TEST_CASE("recording the same entry twice") {
    auto agent = fresh_agent();
    const HistoryEntry e{0, 3, 4, 0.6, build_context(agent, 3, 4)};
    agent = record(agent, e);
    agent = record(agent, e);
    CHECK(agent.stats(3, 4).count == 2);
    CHECK(agent.stats(3, 4).mean == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("record delegates the posterior update") {
    const auto agent = fresh_agent();
    const HistoryEntry e{0, 1, 2, 0.35, vec3(0.4, 0.02, 0.8)};
    const auto next = record(agent, e);
    const auto manual = blr_update(agent.posterior(), e.phi, e.loss);
    CHECK(next.posterior().precision() == manual.precision());
    CHECK(next.posterior().precision_mean() == manual.precision_mean());
    // the original agent is untouched
    CHECK(agent.stats(1, 2).count == 0);
    CHECK(agent.posterior().precision() == Matrix::Identity(3, 3));
}

TEST_CASE("record rejects bad entries") {
    const auto agent = fresh_agent(5, 4);
    CHECK_THROWS_AS(record(agent, HistoryEntry{0, 4, 0, 0.5, vec3(0, 0, 0)}), IndexOutOfRange);
    CHECK_THROWS_AS(record(agent, HistoryEntry{0, 0, 5, 0.5, vec3(0, 0, 0)}), IndexOutOfRange);
    CHECK_THROWS_AS(record(agent, HistoryEntry{0, 0, 0, 1.5, vec3(0, 0, 0)}), InvalidInput);
}

TEST_CASE("pair statistics match a recomputation from raw history") {
    auto rng = make_stream(56, {});
    auto agent = fresh_agent(5, 4);
    std::map<std::pair<int, std::size_t>, std::vector<double>> raw;
    for (int i = 0; i < 100; ++i) {
        const int o = static_cast<int>(rng() % 4);
        const std::size_t w = rng() % 5;
        const double l = uniform01(rng);
        raw[{o, w}].push_back(l);
        agent = record(agent, HistoryEntry{static_cast<std::size_t>(i), o, w, l, build_context(agent, o, w)});
    }
    for (const auto& [key, losses] : raw) {
        double sum = 0.0, mx = 0.0;
        for (double l : losses) {
            sum += l;
            mx = std::max(mx, l);
        }
        const double mean = sum / static_cast<double>(losses.size());
        double ss = 0.0;
        for (double l : losses) ss += (l - mean) * (l - mean);
        const auto& st = agent.stats(key.first, key.second);
        CHECK(st.count == losses.size());
        CHECK(std::abs(st.mean - mean) < 1e-12);
        CHECK(st.max == mx);
        if (losses.size() > 1)
            CHECK(std::abs(build_context(agent, key.first, key.second)[1] -
                           ss / static_cast<double>(losses.size())) < 1e-12);
    }
}

TEST_CASE("noiseless synthetic loss") {
    auto rng = make_stream(57, {});
    CHECK(synthetic_loss(vec3(1, 0, 0), vec3(0.7, 0.1, 0.9), 0.0, rng) == doctest::Approx(0.7));
    CHECK(synthetic_loss(vec3(1, 1, 0), vec3(0.7, 0.7, 0.9), 0.0, rng) == 1.0);
    CHECK(synthetic_loss(vec3(-1, 0, 0), vec3(0.7, 0.7, 0.9), 0.0, rng) == 0.0);
    CHECK_THROWS_AS(synthetic_loss(vec3(1, 0, 0), Vector::Ones(2), 0.0, rng), DimensionMismatch);
}

TEST_CASE("synthetic loss consumes one draw regardless of noise") {
    auto a = make_stream(58, {});
    auto b = make_stream(58, {});
    synthetic_loss(vec3(1, 0, 0), vec3(0.5, 0, 0), 0.0, a);
    synthetic_loss(vec3(1, 0, 0), vec3(0.5, 0, 0), 0.3, b);
    CHECK(a() == b());
}

TEST_CASE("synthetic loss mean matches the clamped expectation") {
    auto rng = make_stream(59, {});
    const double noise_var = 0.01, sd = std::sqrt(noise_var);
    for (double m : {0.05, 0.5, 0.97}) {
        const Vector theta = vec3(m, 0, 0), phi = vec3(1, 0.1, 0.5);
        // Simpson's rule over z in [-10, 10]
        const int steps = 20000;
        const double a = -10.0, h = 20.0 / steps;
        double quad = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double z = a + h * i;
            const double f = std::clamp(m + sd * z, 0.0, 1.0) * std::exp(-0.5 * z * z) /
                             std::sqrt(2.0 * std::numbers::pi);
            quad += f * (i == 0 || i == steps ? 1.0 : (i % 2 ? 4.0 : 2.0));
        }
        quad *= h / 3.0;
        double acc = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double l = synthetic_loss(theta, phi, noise_var, rng);
            CHECK(l >= 0.0);
            CHECK(l <= 1.0);
            acc += l;
        }
        CHECK(std::abs(acc / n - quad) < 0.005);
    }
}

TEST_CASE("posterior mean converges under round-robin exploration") {
    auto rng = make_stream(60, {});
    const Vector theta = vec3(0.4, -0.5, 0.3);
    const std::vector<Vector> contexts{vec3(0.6, 0.1, 0.5), vec3(0.3, 0.2, 0.8),
                                       vec3(0.9, 0.05, 0.2), vec3(0.5, 0.15, 0.4)};
    auto agent = TsAgent::from_prior(Gaussian::isotropic(Vector::Zero(3), 2.0), 0.01,
                                     contexts.size(), 1);
    for (int t = 0; t < 10000; ++t) {
        const std::size_t w = static_cast<std::size_t>(t) % contexts.size();
        const double l = synthetic_loss(theta, contexts[w], 0.01, rng);
        agent = record(agent, HistoryEntry{static_cast<std::size_t>(t), 0, w, l, contexts[w]});
    }
    CHECK((agent.posterior().mean() - theta).cwiseAbs().maxCoeff() < 0.05);
}
