#include "metats/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "metats/errors.hpp"

namespace metats {

namespace fs = std::filesystem;

namespace {

void append_row(std::string& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    out += '\n';
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

template <class T>
T parse_cell(std::string_view cell, std::size_t line, std::size_t column) {
    T v{};
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
        throw ParseError(line, column, "bad CSV value \"" + std::string(cell) + "\"");
    return v;
}

} // namespace

std::vector<TrackSummary> summarize(std::span<const TrackRecord> tracks) {
    std::vector<TrackSummary> out;
    double cum = 0.0;
    for (const auto& t : tracks) {
        TrackSummary s;
        s.policy = t.policy;
        s.seed = t.seed;
        s.track = t.track;
        double loss = 0.0;
        for (const auto& r : t.rows) {
            cum += r.regret_inc;
            loss += r.loss;
        }
        s.cum_regret = cum;
        s.mean_loss = t.rows.empty() ? 0.0 : loss / static_cast<double>(t.rows.size());
        s.outage_freq = t.rows.empty() ? 0.0 : outage_frequency(t.rows);
        s.subopt_freq = t.rows.empty() ? 0.0 : suboptimal_frequency(t.rows);
        if (t.has_kl) s.kl_to_truth = t.kl_to_truth;
        out.push_back(std::move(s));
    }
    return out;
}

std::string cpi_csv(std::span<const TrackRecord> tracks) {
    std::string out = std::string(kCpiHeader) + '\n';
    for (const auto& t : tracks)
        for (const auto& r : t.rows)
            append_row(out, {t.policy, std::to_string(t.seed), std::to_string(t.track),
                             std::to_string(r.cpi), std::to_string(r.state), std::to_string(r.obs),
                             std::to_string(r.waveform), format_double(r.sinr_db),
                             format_double(r.loss), format_double(r.oracle_loss),
                             format_double(r.regret_inc), r.suboptimal ? "1" : "0",
                             r.outage_10db ? "1" : "0"});
    return out;
}

std::string track_csv(std::span<const TrackSummary> rows) {
    std::string out = std::string(kTrackHeader) + '\n';
    for (const auto& s : rows)
        append_row(out, {s.policy, std::to_string(s.seed), std::to_string(s.track),
                         format_double(s.cum_regret), format_double(s.mean_loss),
                         format_double(s.outage_freq), format_double(s.subopt_freq),
                         s.kl_to_truth ? format_double(*s.kl_to_truth) : std::string()});
    return out;
}

std::vector<TrackSummary> parse_track_csv(std::string_view text) {
    std::vector<TrackSummary> out;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        const auto eol = text.find('\n', pos);
        const auto line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (line_no == 1) {
            if (line != kTrackHeader) throw ParseError(1, 1, "unexpected track CSV header");
            continue;
        }
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 8) throw ParseError(line_no, 1, "expected 8 columns");
        TrackSummary s;
        s.policy = std::string(cells[0]);
        s.seed = parse_cell<std::uint64_t>(cells[1], line_no, 2);
        s.track = parse_cell<std::size_t>(cells[2], line_no, 3);
        s.cum_regret = parse_cell<double>(cells[3], line_no, 4);
        s.mean_loss = parse_cell<double>(cells[4], line_no, 5);
        s.outage_freq = parse_cell<double>(cells[5], line_no, 6);
        s.subopt_freq = parse_cell<double>(cells[6], line_no, 7);
        if (!cells[7].empty()) s.kl_to_truth = parse_cell<double>(cells[7], line_no, 8);
        out.push_back(std::move(s));
    }
    if (line_no == 0) throw ParseError(1, 1, "empty track CSV");
    return out;
}

fs::path cpi_csv_path(const fs::path& dir, Policy p, std::uint64_t seed) {
    return dir / ("cpi_" + std::string(policy_name(p)) + "_seed" + std::to_string(seed) + ".csv");
}

fs::path track_csv_path(const fs::path& dir, Policy p, std::uint64_t seed) {
    return dir / ("tracks_" + std::string(policy_name(p)) + "_seed" + std::to_string(seed) + ".csv");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ReplicateResult run_replicate(const ExperimentConfig& c, Policy p, std::uint64_t seed,
                              std::shared_ptr<const ReceiverBank> bank) {
    const auto start = std::chrono::steady_clock::now();
    const auto sc = make_scenario(c, seed, std::move(bank));
    ReplicateResult r;
    r.experiment = run_meta_experiment(sc, p);
    r.summary = summarize(r.experiment.tracks);
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

ReplicateResult run(const ExperimentConfig& c, Policy p, std::uint64_t seed, const fs::path& dir,
                    std::shared_ptr<const ReceiverBank> bank) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    auto r = run_replicate(c, p, seed, std::move(bank));
    write_text(cpi_csv_path(dir, p, seed), cpi_csv(r.experiment.tracks));
    write_text(track_csv_path(dir, p, seed), track_csv(r.summary));
    return r;
}

std::size_t resolve_workers(const ExperimentConfig& c) {
    if (const char* env = std::getenv("METATS_WORKERS")) {
        std::size_t v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
            throw FieldError("METATS_WORKERS", "must be a positive integer");
        return v;
    }
    return c.workers;
}

std::vector<double> run_all(const ExperimentConfig& c, const fs::path& dir) {
    c.validate();
    std::shared_ptr<const ReceiverBank> bank;
    if (c.mode == Mode::Physical) bank = make_receiver_bank(c);

    struct Job {
        Policy policy;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (auto p : c.policies)
        for (auto s : c.seeds) jobs.push_back({p, s});

    std::vector<double> wall(jobs.size(), 0.0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                wall[i] = run(c, jobs[i].policy, jobs[i].seed, dir, bank).wall_ms;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = jobs.size();
            }
        }
    };
    const auto n_workers = std::min(resolve_workers(c), jobs.size());
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
    return wall;
}

void dump_instances(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir) {
    auto cfg = c;
    cfg.mode = Mode::Physical;
    const auto sc = make_scenario(cfg, seed);
    std::string out = "track,field,index,re,im\n";
    const auto cell = [&](const std::string& track, const char* field, std::size_t i, double re,
                          double im) {
        append_row(out, {track, field, std::to_string(i), format_double(re), format_double(im)});
    };
    for (std::size_t r = 0; r < sc.state_proc.transition.size(); ++r)
        for (std::size_t j = 0; j < sc.state_proc.alphabet_size; ++j)
            cell("scene", "transition", r * sc.state_proc.alphabet_size + j,
                 sc.state_proc.transition[r][j], 0.0);
    for (std::size_t s = 0; s < cfg.m; ++s) {
        const auto env = draw_track_environment(sc, s);
        const auto t = std::to_string(s);
        for (Eigen::Index i = 0; i < env.theta.size(); ++i)
            cell(t, "theta", static_cast<std::size_t>(i), env.theta[i], 0.0);
        for (std::size_t i = 0; i < env.instance.target_ir.size(); ++i)
            cell(t, "target_ir", i, env.instance.target_ir[i].real(), env.instance.target_ir[i].imag());
        for (std::size_t i = 0; i < env.instance.clutter_ir.size(); ++i)
            cell(t, "clutter_ir", i, env.instance.clutter_ir[i].real(),
                 env.instance.clutter_ir[i].imag());
        cell(t, "clutter_delay_cell", 0, env.instance.clutter_delay_cell, 0.0);
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / ("instances_seed" + std::to_string(seed) + ".csv"), out);
}

std::map<std::string, std::vector<AggregateRow>> aggregate(std::span<const TrackSummary> rows) {
    if (rows.empty()) throw EmptyInput("nothing to aggregate");

    // policy -> seed -> track-ordered summaries
    std::map<std::string, std::map<std::uint64_t, std::vector<const TrackSummary*>>> grouped;
    for (const auto& r : rows) grouped[r.policy][r.seed].push_back(&r);

    using Getter = std::optional<double> (*)(const TrackSummary&);
    const std::pair<const char*, Getter> plain[] = {
        {"cum_regret", [](const TrackSummary& s) -> std::optional<double> { return s.cum_regret; }},
        {"mean_loss", [](const TrackSummary& s) -> std::optional<double> { return s.mean_loss; }},
        {"outage_freq", [](const TrackSummary& s) -> std::optional<double> { return s.outage_freq; }},
        {"subopt_freq", [](const TrackSummary& s) -> std::optional<double> { return s.subopt_freq; }},
        {"kl_to_truth", [](const TrackSummary& s) { return s.kl_to_truth; }},
    };

    // metric -> policy -> track -> per-seed values
    std::map<std::string, std::map<std::string, std::map<std::size_t, std::vector<double>>>> values;
    for (auto& [policy, seeds] : grouped) {
        for (auto& [seed, list] : seeds) {
            std::sort(list.begin(), list.end(),
                      [](auto* a, auto* b) { return a->track < b->track; });
            double outage_sum = 0.0, subopt_sum = 0.0;
            std::size_t count = 0;
            for (const auto* s : list) {
                for (const auto& [name, get] : plain)
                    if (auto v = get(*s)) values[name][policy][s->track].push_back(*v);
                // tracks have equal length, so cumulative frequency is the running mean
                ++count;
                outage_sum += s->outage_freq;
                subopt_sum += s->subopt_freq;
                values["cum_outage_freq"][policy][s->track].push_back(outage_sum / static_cast<double>(count));
                values["cum_subopt_freq"][policy][s->track].push_back(subopt_sum / static_cast<double>(count));
            }
        }
    }

    std::map<std::string, std::vector<AggregateRow>> out;
    for (const auto& [metric, by_policy] : values)
        for (const auto& [policy, by_track] : by_policy)
            for (const auto& [track, v] : by_track) {
                AggregateRow a;
                a.policy = policy;
                a.track = track;
                a.n_seeds = v.size();
                double sum = 0.0;
                for (double x : v) sum += x;
                a.mean = sum / static_cast<double>(v.size());
                if (v.size() > 1) {
                    double ss = 0.0;
                    for (double x : v) ss += (x - a.mean) * (x - a.mean);
                    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
                    a.stderr_ = sd / std::sqrt(static_cast<double>(v.size()));
                }
                out[metric].push_back(a);
            }
    return out;
}

void aggregate_dir(const fs::path& in_dir, const fs::path& out_dir) {
    if (!fs::is_directory(in_dir)) throw IoError(in_dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("tracks_") && name.ends_with(".csv"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TrackSummary> rows;
    for (const auto& f : files) {
        auto part = parse_track_csv(read_text(f));
        rows.insert(rows.end(), part.begin(), part.end());
    }
    if (rows.empty()) throw EmptyInput("no track summaries found in " + in_dir.string());

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    for (const auto& [metric, table] : aggregate(rows)) {
        std::string out = "policy,track,n_seeds,mean,stderr\n";
        for (const auto& a : table)
            append_row(out, {a.policy, std::to_string(a.track), std::to_string(a.n_seeds),
                             format_double(a.mean), format_double(a.stderr_)});
        write_text(out_dir / ("aggregate_" + metric + ".csv"), out);
    }
}

} // namespace metats
