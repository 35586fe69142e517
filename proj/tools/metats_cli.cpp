// metats: batch experiments for meta-Thompson-sampling waveform selection.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "metats/config.hpp"
#include "metats/errors.hpp"
#include "metats/harness.hpp"
#include "metats/selftest.hpp"
#include "metats/waveforms.hpp"

namespace {

metats::WaveformSpec spec_by_name(const std::string& name) {
    for (const auto& s : metats::default_catalog())
        if (s.name() == name) return s;
    std::string known;
    for (const auto& s : metats::default_catalog()) known += " " + s.name();
    throw metats::InvalidInput("unknown waveform \"" + name + "\"; catalog:" + known);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-Thompson-sampling radar waveform selection experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir, seeds, policies, mode;
    bool dump = false;
    auto* run = app.add_subcommand("run", "run experiment replicates and write per-CPI and per-track CSVs");
    run->add_option("--config", config_path, "config file (key = value lines)");
    run->add_option("--out", out_dir, "output directory (overrides output_dir)");
    run->add_option("--seeds", seeds, "seed list, e.g. 1-20 or 1,4,9");
    run->add_option("--policies", policies, "comma-separated subset of random,ts-uninformative,ts-oracle,meta-ts");
    run->add_option("--mode", mode, "synthetic or physical");
    run->add_flag("--dump-instances", dump, "also write per-seed channel instance parameters");

    std::string agg_in, agg_out;
    auto* agg = app.add_subcommand("aggregate", "mean and standard error across seeds per policy and track");
    agg->add_option("--in", agg_in, "directory holding tracks_*.csv")->required();
    agg->add_option("--out", agg_out, "directory for aggregate_<metric>.csv (defaults to --in)");

    std::string kind, wf_out;
    std::size_t samples = metats::kDefaultSamples;
    auto* wf = app.add_subcommand("dump-waveform", "write a catalog envelope as index,re,im CSV");
    wf->add_option("--kind", kind, "lfm, expfm-2.8, expfm-5, zc-1024 or frank-144")->required();
    wf->add_option("--out", wf_out, "output file (stdout if omitted)");
    wf->add_option("--samples", samples, "samples per pulse");

    auto* self = app.add_subcommand("selftest", "check library routines against independent oracles");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = config_path.empty() ? metats::ExperimentConfig{} : metats::load_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (!seeds.empty()) cfg.seeds = metats::parse_seed_list(seeds);
            if (!policies.empty()) cfg.policies = metats::parse_policy_list(policies);
            if (!mode.empty()) cfg.mode = metats::parse_mode(mode);
            cfg.validate();
            const auto wall = metats::run_all(cfg, cfg.output_dir);
            metats::write_text(std::filesystem::path(cfg.output_dir) / "config.txt", metats::serialize(cfg));
            if (dump)
                for (auto s : cfg.seeds) metats::dump_instances(cfg, s, cfg.output_dir);
            double total = 0.0, worst = 0.0;
            for (double w : wall) {
                total += w;
                worst = std::max(worst, w);
            }
            std::cerr << "ran " << wall.size() << " replicates into " << cfg.output_dir << " ("
                      << total / 1000.0 << " s total, slowest " << worst / 1000.0 << " s)\n";
        } else if (*agg) {
            metats::aggregate_dir(agg_in, agg_out.empty() ? agg_in : agg_out);
        } else if (*wf) {
            const auto env = metats::make_envelope(spec_by_name(kind), samples);
            std::string csv = "index,re,im\n";
            for (std::size_t i = 0; i < env.size(); ++i)
                csv += std::to_string(i) + "," + metats::format_double(env.samples[i].real()) + "," +
                       metats::format_double(env.samples[i].imag()) + "\n";
            if (wf_out.empty())
                std::cout << csv;
            else
                metats::write_text(wf_out, csv);
        } else if (*self) {
            return metats::run_selftest(std::cout) ? 0 : 1;
        }
    } catch (const metats::Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
