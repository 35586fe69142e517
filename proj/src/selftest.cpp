#include "metats/selftest.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metats/bandit.hpp"
#include "metats/fstc.hpp"
#include "metats/gaussmath.hpp"
#include "metats/meta.hpp"
#include "metats/metrics.hpp"
#include "metats/waveforms.hpp"

namespace metats {

namespace {

// Sequential conjugate updates against the batch normal equations.
double blr_batch_gap(Rng& rng) {
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 15;
        Matrix x(n, 3);
        Vector y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 3; ++j) x(i, j) = standard_normal(rng);
            y[i] = standard_normal(rng);
        }
        const double s2 = 0.3;
        auto p = LinearPosterior::from_prior(Gaussian::isotropic(Vector::Zero(3), 2.0), s2);
        for (int i = 0; i < n; ++i) p = blr_update(p, x.row(i).transpose(), y[i]);
        const Matrix a = x.transpose() * x / s2 + Matrix::Identity(3, 3) / 2.0;
        const Vector batch = a.ldlt().solve(x.transpose() * y / s2);
        worst = std::max(worst, (p.mean() - batch).cwiseAbs().maxCoeff());
    }
    return worst;
}

// One-dimensional hierarchical model integrated on a grid.
double meta_grid_gap() {
    const double s0 = 0.7, sq = 1.3, s2 = 0.4;
    const std::vector<double> xs{0.5, -1.2, 2.0}, ls{0.3, -0.8, 1.1};
    const double h = 0.01;
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (double mu = -8.0; mu <= 8.0; mu += h) {
        double inner = 0.0;
        for (double th = -12.0; th <= 12.0; th += h) {
            double logp = -0.5 * (th - mu) * (th - mu) / s0;
            for (std::size_t i = 0; i < xs.size(); ++i)
                logp -= 0.5 * (ls[i] - xs[i] * th) * (ls[i] - xs[i] * th) / s2;
            inner += std::exp(logp);
        }
        const double w = inner * std::exp(-0.5 * mu * mu / sq);
        z += w;
        m1 += w * mu;
        m2 += w * mu * mu;
    }
    const double mean = m1 / z, var = m2 / z - mean * mean;
    TrackData data{Matrix(3, 1), Vector(3)};
    for (int i = 0; i < 3; ++i) {
        data.x(i, 0) = xs[i];
        data.l[i] = ls[i];
    }
    const auto mp = meta_update(init_meta(sq, 1, s0, s2), data);
    return kl_gaussian(Gaussian::isotropic(Vector::Constant(1, mean), var), mp.belief());
}

// Precomputed receiver powers against the brute-force receiver without noise.
double receiver_gap(Rng& rng) {
    ChannelConfig ch;
    TaskDistribution task;
    task.mu_star = Vector::Zero(3);
    auto inst = draw_instance(task, ch, StateProcess::uniform(4, 2, 0.1), 4, rng);
    inst.noise_var = 1e-300;
    const auto env = make_envelope(WaveformSpec::lfm(kDefaultFmRate), kDefaultSamples);
    ReceiverBank bank({env}, ch, task.ir_taps);
    double worst = 0.0;
    for (int s = 0; s < 4; ++s) {
        const auto& where = inst.trajectory[static_cast<std::size_t>(s)];
        const auto fast = bank.powers(inst, s, where, 0);
        const auto slow = receive(inst, s, where, env, rng);
        const double expect = ReceiverBank::sinr(fast, 0.0);
        worst = std::max(worst, std::abs(10.0 * std::log10(slow.sinr_post / expect)));
    }
    return worst;
}

} // namespace

bool run_selftest(std::ostream& out) {
    auto rng = make_stream(20240601, {1});
    bool ok = true;
    const auto check = [&](const std::string& name, double value, double tol) {
        const bool pass = std::isfinite(value) && value <= tol;
        ok = ok && pass;
        out << (pass ? "PASS " : "FAIL ") << name << " (" << value << " <= " << tol << ")\n";
    };

    check("blr sequential vs batch normal equations", blr_batch_gap(rng), 1e-10);
    check("meta update vs 1-d grid marginalization (KL)", meta_grid_gap(), 1e-6);

    double catalog_energy = 0.0;
    for (const auto& s : default_catalog())
        catalog_energy = std::max(catalog_energy, std::abs(make_envelope(s, kDefaultSamples).energy() - 1.0));
    check("catalog unit energy", catalog_energy, 1e-9);

    const auto zc = make_envelope(WaveformSpec::zadoff_chu(1024, 1), 1024);
    double sidelobe = 0.0;
    for (long lag = 1; lag < 1024; lag += 7) sidelobe = std::max(sidelobe, std::abs(cyclic_autocorrelation(zc, lag)));
    check("Zadoff-Chu cyclic sidelobes", sidelobe, 1e-9);

    check("receiver bank vs brute force (dB)", receiver_gap(rng), 1e-6);
    check("single-task PAC-Bayes spot value",
          std::abs(pac_bayes_single({0.0, 100.0, 0.05, 0.0}) - std::sqrt(std::log(2000.0) / 198.0)), 1e-12);
    return ok;
}

} // namespace metats
