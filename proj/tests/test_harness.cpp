#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "metats/config.hpp"
#include "metats/errors.hpp"
#include "metats/harness.hpp"
#include "oracles.hpp"

using namespace metats;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("metats_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.m = 6;
    c.n = 40;
    c.seeds = {1, 2, 3};
    return c;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::istringstream in(read_text(p));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) rows.push_back(split(line));
    return rows;
}

} // namespace

TEST_CASE("empty config gives the defaults") {
    const auto c = parse_config("");
    CHECK(c.m == 50);
    CHECK(c.n == 200);
    CHECK(c.k == 5);
    CHECK(c.d == 3);
    CHECK(c.seeds.size() == 20);
    CHECK(c.policies.size() == 4);
    CHECK(c == ExperimentConfig{});
    CHECK(parse_config("# only a comment\n\n   \n") == ExperimentConfig{});
}

TEST_CASE("m = 0 is rejected by name") {
    try {
        parse_config("m = 0\n");
        FAIL("expected a FieldError");
    } catch (const FieldError& e) {
        CHECK(e.field() == "m");
    }
    CHECK_THROWS_AS(parse_config("sigma0_sq = -1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("seeds = \n"), ParseError);
}

TEST_CASE("serialized config reparses to an equal config") {
    ExperimentConfig c;
    c.m = 7;
    c.sigma0_sq = 0.1 + 0.2;   // not exactly representable as typed
    c.mu_star = {0.1, -1e-7, 3.25};
    c.seeds = {4, 5, 6, 100};
    c.policies = {Policy::MetaTs, Policy::Random};
    c.mode = Mode::Physical;
    c.output_dir = "results/run a";
    const auto back = parse_config(serialize(c));
    CHECK(back == c);
    CHECK(serialize(back) == serialize(c));
}

TEST_CASE("config parse errors carry a position") {
    try {
        parse_config("m = 5\nn 200\n");
        FAIL("expected a ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() >= 1);
    }
    try {
        parse_config("m = 5\n\n  bogus_key = 1\n");
        FAIL("expected a ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 3);
    }
    CHECK_THROWS_AS(parse_config("m = 5\nm = 6\n"), ParseError);
    CHECK_THROWS_AS(parse_config("n = twelve\n"), ParseError);
    CHECK_THROWS_AS(parse_config("mode = quantum\n"), ParseError);
}

TEST_CASE("seed and policy lists") {
    CHECK(parse_seed_list("1-3, 7") == std::vector<std::uint64_t>{1, 2, 3, 7});
    CHECK(parse_policy_list("meta-ts,random") == std::vector<Policy>{Policy::MetaTs, Policy::Random});
    CHECK_THROWS(parse_seed_list("5-2"));
    CHECK_THROWS_AS(parse_policy_list("greedy"), InvalidInput);
}

TEST_CASE("load_config reads a file") {
    const auto dir = scratch_dir("load");
    write_text(dir / "c.txt", "m = 3 # tracks\nmode = physical\n");
    const auto c = load_config(dir / "c.txt");
    CHECK(c.m == 3);
    CHECK(c.mode == Mode::Physical);
    CHECK_THROWS_AS(load_config(dir / "missing.txt"), IoError);
}

TEST_CASE("identical runs write byte-identical CSVs") {
    const auto c = small_config();
    for (auto mode : {Mode::Synthetic, Mode::Physical}) {
        auto cm = c;
        cm.mode = mode;
        cm.m = 3;
        const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
        for (auto p : kAllPolicies) {
            run(cm, p, 11, a);
            run(cm, p, 11, b);
            CHECK(read_text(cpi_csv_path(a, p, 11)) == read_text(cpi_csv_path(b, p, 11)));
            CHECK(read_text(track_csv_path(a, p, 11)) == read_text(track_csv_path(b, p, 11)));
        }
    }
}

TEST_CASE("worker count does not change the output") {
    auto c = small_config();
    const auto one = scratch_dir("w1"), three = scratch_dir("w3");
    c.workers = 1;
    run_all(c, one);
    c.workers = 3;
    CHECK(run_all(c, three).size() == 12);
    for (auto p : kAllPolicies)
        for (auto s : c.seeds) CHECK(read_text(cpi_csv_path(one, p, s)) == read_text(cpi_csv_path(three, p, s)));
}

TEST_CASE("METATS_WORKERS overrides the config") {
    ExperimentConfig c;
    c.workers = 2;
    ::unsetenv("METATS_WORKERS");
    CHECK(resolve_workers(c) == 2);
    ::setenv("METATS_WORKERS", "5", 1);
    CHECK(resolve_workers(c) == 5);
    ::setenv("METATS_WORKERS", "zero", 1);
    CHECK_THROWS_AS(resolve_workers(c), FieldError);
    ::unsetenv("METATS_WORKERS");
}

TEST_CASE("a policy's draws do not depend on which other policies run") {
    auto c = small_config();
    c.seeds = {4};
    const auto all = scratch_dir("all"), solo = scratch_dir("solo");
    run_all(c, all);
    c.policies = {Policy::MetaTs};
    run_all(c, solo);
    CHECK(read_text(cpi_csv_path(all, Policy::MetaTs, 4)) == read_text(cpi_csv_path(solo, Policy::MetaTs, 4)));
}

TEST_CASE("minimal run emits one CPI row") {
    ExperimentConfig c;
    c.m = 1;
    c.n = 1;
    const auto dir = scratch_dir("min");
    for (auto mode : {Mode::Synthetic, Mode::Physical}) {
        c.mode = mode;
        run(c, Policy::MetaTs, 1, dir);
        const auto rows = read_csv(cpi_csv_path(dir, Policy::MetaTs, 1));
        REQUIRE(rows.size() == 2);
        CHECK(rows[1].size() == 13);
        const auto tracks = read_csv(track_csv_path(dir, Policy::MetaTs, 1));
        REQUIRE(tracks.size() == 2);
        CHECK(tracks[1].size() == 8);
    }
}

TEST_CASE("CSV headers and column counts are fixed") {
    const auto c = small_config();
    const auto dir = scratch_dir("schema");
    for (auto p : kAllPolicies) {
        run(c, p, 2, dir);
        const auto cpi = read_csv(cpi_csv_path(dir, p, 2));
        CHECK(read_text(cpi_csv_path(dir, p, 2)).starts_with(std::string(kCpiHeader) + "\n"));
        CHECK(cpi.size() == c.m * c.n + 1);
        for (const auto& r : cpi) CHECK(r.size() == 13);
        const auto tr = read_csv(track_csv_path(dir, p, 2));
        CHECK(read_text(track_csv_path(dir, p, 2)).starts_with(std::string(kTrackHeader) + "\n"));
        CHECK(tr.size() == c.m + 1);
        for (std::size_t i = 1; i < tr.size(); ++i) {
            CHECK(tr[i].size() == 8);
            // only meta-ts carries a KL value
            CHECK(tr[i][7].empty() == (p != Policy::MetaTs));
        }
    }
}

TEST_CASE("track summaries follow from the CPI rows") {
    const auto c = small_config();
    const auto r = run_replicate(c, Policy::TsUninformative, 3);
    double cum = 0.0;
    for (std::size_t s = 0; s < c.m; ++s) {
        const auto& rows = r.experiment.tracks[s].rows;
        double loss = 0.0;
        std::size_t out = 0, sub = 0;
        for (const auto& row : rows) {
            cum += row.regret_inc;
            loss += row.loss;
            out += row.outage_10db;
            sub += row.suboptimal;
        }
        const auto& t = r.summary[s];
        CHECK(t.cum_regret == doctest::Approx(cum).epsilon(1e-12));
        CHECK(t.mean_loss == doctest::Approx(loss / rows.size()).epsilon(1e-12));
        CHECK(t.outage_freq == static_cast<double>(out) / rows.size());
        CHECK(t.subopt_freq == static_cast<double>(sub) / rows.size());
        CHECK(!t.kl_to_truth);
    }
    CHECK(parse_track_csv(track_csv(r.summary)) == r.summary);
}

TEST_CASE("aggregate of one and two seeds") {
    TrackSummary a;
    a.policy = "meta-ts";
    a.seed = 1;
    a.track = 0;
    a.cum_regret = 0.2;
    const std::vector<TrackSummary> one{a};
    const auto single = aggregate(one).at("cum_regret");
    REQUIRE(single.size() == 1);
    CHECK(single[0].mean == 0.2);
    CHECK(single[0].stderr_ == 0.0);
    CHECK(single[0].n_seeds == 1);

    auto b = a;
    b.seed = 2;
    b.cum_regret = 0.4;
    const std::vector<TrackSummary> two{a, b};
    const auto pair = aggregate(two).at("cum_regret");
    REQUIRE(pair.size() == 1);
    CHECK(pair[0].mean == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(pair[0].stderr_ == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_THROWS_AS(aggregate(std::span<const TrackSummary>{}), EmptyInput);
}

TEST_CASE("aggregate files match a recount from the per-seed CSVs") {
    const auto c = small_config();
    const auto dir = scratch_dir("agg");
    run_all(c, dir);
    aggregate_dir(dir, dir / "agg");

    // recount: policy -> track -> per-seed values, straight from tracks_*.csv
    std::map<std::string, std::map<std::size_t, std::vector<double>>> regret, cum_out;
    for (auto p : c.policies)
        for (auto s : c.seeds) {
            const auto rows = read_csv(track_csv_path(dir, p, s));
            double out_sum = 0.0;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                const auto track = std::stoul(rows[i][2]);
                regret[rows[i][0]][track].push_back(std::strtod(rows[i][3].c_str(), nullptr));
                out_sum += std::strtod(rows[i][5].c_str(), nullptr);
                cum_out[rows[i][0]][track].push_back(out_sum / static_cast<double>(i));
            }
        }
    const auto check_file = [&](const fs::path& f,
                                const std::map<std::string, std::map<std::size_t, std::vector<double>>>& want) {
        const auto rows = read_csv(f);
        REQUIRE(rows.size() == 1 + c.policies.size() * c.m);
        CHECK(rows[0] == std::vector<std::string>{"policy", "track", "n_seeds", "mean", "stderr"});
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& v = want.at(rows[i][0]).at(std::stoul(rows[i][1]));
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            const double se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
            CHECK(std::stoul(rows[i][2]) == v.size());
            CHECK(std::strtod(rows[i][3].c_str(), nullptr) == doctest::Approx(mean).epsilon(1e-14));
            CHECK(std::strtod(rows[i][4].c_str(), nullptr) == doctest::Approx(se).epsilon(1e-12));
        }
    };
    check_file(dir / "agg" / "aggregate_cum_regret.csv", regret);
    check_file(dir / "agg" / "aggregate_cum_outage_freq.csv", cum_out);
    CHECK(fs::exists(dir / "agg" / "aggregate_kl_to_truth.csv"));
    CHECK(fs::exists(dir / "agg" / "aggregate_cum_subopt_freq.csv"));
    CHECK_THROWS_AS(aggregate_dir(scratch_dir("empty"), dir / "x"), EmptyInput);
}

TEST_CASE("unwritable output directory raises IoError") {
    const auto dir = scratch_dir("io");
    write_text(dir / "file", "x");
    ExperimentConfig c;
    c.m = 1;
    c.n = 1;
    CHECK_THROWS_AS(run(c, Policy::Random, 1, dir / "file" / "sub"), IoError);
}

TEST_CASE("instance dump lists every track") {
    auto c = small_config();
    c.mode = Mode::Physical;
    const auto dir = scratch_dir("dump");
    dump_instances(c, 1, dir);
    const auto text = read_text(dir / "instances_seed1.csv");
    for (std::size_t s = 0; s < c.m; ++s) CHECK(text.find("\n" + std::to_string(s) + ",") != std::string::npos);
}
