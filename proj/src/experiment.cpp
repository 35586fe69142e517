#include "metats/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "metats/errors.hpp"

namespace metats {

namespace {

constexpr double kSinrFloor = 1e-30;

double to_db(double linear) { return 10.0 * std::log10(std::max(linear, kSinrFloor)); }

std::vector<Vector> draw_context_table(std::size_t n_obs, std::size_t k, Rng& rng) {
    // Each pair gets a plausible (mean, variance, max) triple of a loss on [0, 1].
    std::vector<Vector> table;
    table.reserve(n_obs * k);
    for (std::size_t i = 0; i < n_obs * k; ++i) {
        const double mean = uniform01(rng);
        const double var = uniform01(rng) * mean * (1.0 - mean);
        const double max = mean + uniform01(rng) * (1.0 - mean);
        Vector phi(kContextDim);
        phi << mean, var, max;
        table.push_back(std::move(phi));
    }
    return table;
}

} // namespace

ChannelConfig channel_config(const ExperimentConfig& c) {
    ChannelConfig ch;
    ch.grid_delay = c.grid_delay;
    ch.grid_doppler = c.grid_doppler;
    ch.noise_var = c.channel_noise_var;
    ch.target_power = c.target_power;
    ch.clutter_power = c.clutter_power;
    ch.state_gain = c.state_gain;
    ch.doppler_scale = c.doppler_scale;
    return ch;
}

TaskDistribution task_distribution(const ExperimentConfig& c) {
    TaskDistribution t;
    t.mu_star = Eigen::Map<const Vector>(c.mu_star.data(), static_cast<Eigen::Index>(c.mu_star.size()));
    t.sigma0_sq = c.sigma0_sq;
    t.ir_kernel_scale = c.ir_kernel_scale;
    t.ir_taps = c.ir_taps;
    return t;
}

std::shared_ptr<const ReceiverBank> make_receiver_bank(const ExperimentConfig& c) {
    const auto specs = default_catalog();
    std::vector<ComplexEnvelope> catalog;
    for (std::size_t w = 0; w < c.k; ++w) catalog.push_back(make_envelope(specs.at(w), kDefaultSamples));
    return std::make_shared<const ReceiverBank>(std::move(catalog), channel_config(c), c.ir_taps);
}

const Vector& Scenario::table_context(int obs, std::size_t w) const {
    return context_table.at(static_cast<std::size_t>(obs) * config.k + w);
}

Scenario make_scenario(const ExperimentConfig& c, std::uint64_t seed,
                       std::shared_ptr<const ReceiverBank> bank) {
    c.validate();
    Scenario sc;
    sc.config = c;
    sc.task = task_distribution(c);
    sc.channel = channel_config(c);
    sc.sinr_target = std::pow(10.0, c.sinr_target_db / 10.0);
    sc.seed = seed;

    auto scene = make_stream(seed, {kSceneStream});
    sc.state_proc = StateProcess::dirichlet(c.n_states, c.memory, c.dirichlet_concentration,
                                            c.obs_flip_prob, scene);
    if (c.mode == Mode::Synthetic) {
        sc.context_table = draw_context_table(c.n_states, c.k, scene);
    } else {
        sc.bank = bank ? std::move(bank) : make_receiver_bank(c);
        if (sc.bank->size() != c.k) throw DimensionMismatch("receiver bank size differs from k");
    }
    return sc;
}

TrackEnvironment draw_track_environment(const Scenario& sc, std::size_t track) {
    auto rng = make_stream(sc.seed, {kEnvStream, track});
    const auto n = sc.config.n;
    TrackEnvironment env;
    if (sc.config.mode == Mode::Physical) {
        env.instance = draw_instance(sc.task, sc.channel, sc.state_proc, n, rng);
        env.theta = env.instance.theta;
    } else {
        env.theta = sample_gaussian(Gaussian::isotropic(sc.task.mu_star, sc.task.sigma0_sq), rng);
    }
    env.states.reserve(n);
    env.obs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const int s = step_state(sc.state_proc, env.states, rng);
        env.states.push_back(s);
        env.obs.push_back(observe(sc.state_proc, s, rng));
    }
    return env;
}

TrackOutcome run_track(const Scenario& sc, const TrackEnvironment& env, std::size_t track,
                       const Gaussian* prior, Rng& decisions) {
    const auto& cfg = sc.config;
    const bool physical = cfg.mode == Mode::Physical;
    const std::size_t n = cfg.n, k = cfg.k;
    auto noise = make_stream(sc.seed, {kNoiseStream, track});

    // Oracle noise floors: one shared set per track and waveform.
    std::vector<std::vector<double>> floors;
    if (physical) {
        auto oracle = make_stream(sc.seed, {kOracleStream, track});
        floors.resize(k);
        for (std::size_t w = 0; w < k; ++w)
            for (std::size_t j = 0; j < cfg.oracle_draws; ++j)
                floors[w].push_back(sc.bank->draw_noise_floor(env.instance, w, oracle));
    }

    std::optional<TsAgent> agent;
    if (prior) agent.emplace(TsAgent::from_prior(*prior, cfg.noise_var, k, cfg.n_states));

    TrackOutcome out;
    out.rows.reserve(n);
    out.data.x.resize(static_cast<Eigen::Index>(n), kContextDim);
    out.data.l.resize(static_cast<Eigen::Index>(n));

    std::vector<Vector> contexts(k);
    std::vector<double> expected(k);
    std::vector<ReceiverBank::Powers> powers(k);
    for (std::size_t t = 0; t < n; ++t) {
        const int s = env.states[t];
        const int o = env.obs[t];
        for (std::size_t w = 0; w < k; ++w)
            contexts[w] = physical ? (agent ? build_context(*agent, o, w) : Vector::Constant(kContextDim, 0.0))
                                   : sc.table_context(o, w);

        const std::size_t chosen =
            agent ? thompson_select(agent->posterior().belief(), contexts, decisions)
                  : std::uniform_int_distribution<std::size_t>(0, k - 1)(decisions);

        CpiRecord row;
        row.cpi = t;
        row.state = s;
        row.obs = o;
        row.waveform = chosen;
        if (physical) {
            const auto& where = env.instance.trajectory[t];
            for (std::size_t w = 0; w < k; ++w) {
                powers[w] = sc.bank->powers(env.instance, s, where, w);
                double acc = 0.0;
                for (double f : floors[w])
                    acc += compute_loss(ReceiverBank::sinr(powers[w], f), sc.sinr_target);
                expected[w] = acc / static_cast<double>(floors[w].size());
            }
            const double floor = sc.bank->draw_noise_floor(env.instance, chosen, noise);
            const double sinr = ReceiverBank::sinr(powers[chosen], floor);
            row.loss = compute_loss(sinr, sc.sinr_target);
            row.sinr_db = to_db(sinr);
        } else {
            for (std::size_t w = 0; w < k; ++w)
                expected[w] = std::clamp(env.theta.dot(contexts[w]), 0.0, 1.0);
            row.loss = synthetic_loss(env.theta, contexts[chosen], cfg.noise_var, noise);
            row.sinr_db = to_db(std::max(row.loss, 1e-6) * sc.sinr_target);
        }
        row.oracle_loss = *std::max_element(expected.begin(), expected.end());
        row.regret_inc = regret_increment(expected, chosen);
        // ties with the best expected loss are not counted as suboptimal
        row.suboptimal = row.regret_inc > 1e-12;
        row.outage_10db = row.sinr_db < kOutageDb;

        const auto r = static_cast<Eigen::Index>(t);
        out.data.x.row(r) = contexts[chosen].transpose();
        out.data.l[r] = row.loss;
        if (agent) agent = record(*agent, HistoryEntry{t, o, chosen, row.loss, contexts[chosen]});
        out.rows.push_back(row);
    }
    return out;
}

ExperimentResult run_meta_experiment(const Scenario& sc, Policy policy) {
    const auto& cfg = sc.config;
    const auto d = static_cast<Eigen::Index>(cfg.d);
    const auto pidx = static_cast<std::uint64_t>(policy);
    ExperimentResult result;

    std::optional<MetaPosterior> meta;
    if (policy == Policy::MetaTs) meta = init_meta(cfg.sigma_q_sq, d, cfg.sigma0_sq, cfg.noise_var);
    const auto truth_mean = sc.task.mu_star;

    for (std::size_t s = 0; s < cfg.m; ++s) {
        const auto env = draw_track_environment(sc, s);
        auto decisions = make_stream(sc.seed, {kPolicyStream, pidx, s});

        std::optional<Gaussian> prior;
        switch (policy) {
        case Policy::Random: break;
        case Policy::TsUninformative:
            prior = Gaussian::isotropic(Vector::Zero(d), cfg.sigma_q_sq + cfg.sigma0_sq);
            break;
        case Policy::TsOracle: prior = Gaussian::isotropic(truth_mean, cfg.sigma0_sq); break;
        case Policy::MetaTs: {
            auto prior_rng = make_stream(sc.seed, {kPriorStream, pidx, s});
            prior = sample_instance_prior(*meta, prior_rng);
            break;
        }
        }

        auto outcome = run_track(sc, env, s, prior ? &*prior : nullptr, decisions);

        TrackRecord rec;
        rec.policy = std::string(policy_name(policy));
        rec.seed = sc.seed;
        rec.track = s;
        rec.rows = std::move(outcome.rows);
        if (meta) {
            result.meta_history.push_back(*meta);
            rec.kl_to_truth = kl_trace(std::span(&*meta, 1), truth_mean).front();
            rec.has_kl = true;
            meta = meta_update(*meta, outcome.data);
        }
        result.tracks.push_back(std::move(rec));
    }
    if (meta) result.meta_history.push_back(*meta);
    return result;
}

} // namespace metats
