#include "metats/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "metats/errors.hpp"

namespace metats {

namespace {

constexpr std::string_view kPolicyNames[] = {"random", "ts-uninformative", "ts-oracle", "meta-ts"};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(',', start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Value parsers throw InvalidInput; the config reader turns that into a
// ParseError with the position of the value.
double to_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw InvalidInput("expected a number, got \"" + std::string(s) + "\"");
    return v;
}

template <class Int>
Int to_integer(std::string_view s) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw InvalidInput("expected a nonnegative integer, got \"" + std::string(s) + "\"");
    return v;
}

std::vector<double> to_double_list(std::string_view s) {
    std::vector<double> out;
    for (auto item : split_commas(s)) out.push_back(to_double(item));
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v[i]);
    }
    return out;
}

struct Field {
    std::string_view key;
    std::function<void(ExperimentConfig&, std::string_view)> parse;
    std::function<std::string(const ExperimentConfig&)> format;
};

template <std::size_t ExperimentConfig::*M>
Field size_field(std::string_view key) {
    return {key, [](ExperimentConfig& c, std::string_view v) { c.*M = to_integer<std::size_t>(v); },
            [](const ExperimentConfig& c) { return std::to_string(c.*M); }};
}

template <double ExperimentConfig::*M>
Field real_field(std::string_view key) {
    return {key, [](ExperimentConfig& c, std::string_view v) { c.*M = to_double(v); },
            [](const ExperimentConfig& c) { return format_double(c.*M); }};
}

template <std::vector<double> ExperimentConfig::*M>
Field list_field(std::string_view key) {
    return {key, [](ExperimentConfig& c, std::string_view v) { c.*M = to_double_list(v); },
            [](const ExperimentConfig& c) { return join(c.*M, format_double); }};
}

const std::vector<Field>& fields() {
    using C = ExperimentConfig;
    static const std::vector<Field> table = {
        size_field<&C::m>("m"),
        size_field<&C::n>("n"),
        size_field<&C::k>("k"),
        size_field<&C::d>("d"),
        size_field<&C::n_states>("n_states"),
        size_field<&C::memory>("memory"),
        size_field<&C::grid_delay>("grid_delay"),
        size_field<&C::grid_doppler>("grid_doppler"),
        size_field<&C::ir_taps>("ir_taps"),
        size_field<&C::oracle_draws>("oracle_draws"),
        size_field<&C::workers>("workers"),
        real_field<&C::sigma_q_sq>("sigma_q_sq"),
        real_field<&C::sigma0_sq>("sigma0_sq"),
        real_field<&C::noise_var>("noise_var"),
        real_field<&C::channel_noise_var>("channel_noise_var"),
        real_field<&C::ir_kernel_scale>("ir_kernel_scale"),
        real_field<&C::sinr_target_db>("sinr_target_db"),
        real_field<&C::obs_flip_prob>("obs_flip_prob"),
        real_field<&C::dirichlet_concentration>("dirichlet_concentration"),
        real_field<&C::target_power>("target_power"),
        real_field<&C::clutter_power>("clutter_power"),
        real_field<&C::doppler_scale>("doppler_scale"),
        list_field<&C::mu_star>("mu_star"),
        list_field<&C::state_gain>("state_gain"),
        {"seeds", [](C& c, std::string_view v) { c.seeds = parse_seed_list(v); },
         [](const C& c) {
             return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
         }},
        {"policies", [](C& c, std::string_view v) { c.policies = parse_policy_list(v); },
         [](const C& c) {
             return join(c.policies, [](Policy p) { return std::string(policy_name(p)); });
         }},
        {"mode", [](C& c, std::string_view v) { c.mode = parse_mode(v); },
         [](const C& c) { return std::string(mode_name(c.mode)); }},
        {"output_dir", [](C& c, std::string_view v) { c.output_dir = std::string(v); },
         [](const C& c) { return c.output_dir; }},
    };
    return table;
}

void require(bool ok, const char* field, const std::string& why) {
    if (!ok) throw FieldError(field, why);
}

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

} // namespace

std::string_view policy_name(Policy p) { return kPolicyNames[static_cast<int>(p)]; }

Policy parse_policy(std::string_view name) {
    for (auto p : kAllPolicies)
        if (policy_name(p) == name) return p;
    throw InvalidInput("unknown policy \"" + std::string(name) + "\"");
}

std::string_view mode_name(Mode m) { return m == Mode::Synthetic ? "synthetic" : "physical"; }

Mode parse_mode(std::string_view name) {
    if (name == "synthetic") return Mode::Synthetic;
    if (name == "physical") return Mode::Physical;
    throw InvalidInput("unknown mode \"" + std::string(name) + "\"");
}

std::vector<std::uint64_t> ExperimentConfig::default_seeds() {
    std::vector<std::uint64_t> s;
    for (std::uint64_t i = 1; i <= 20; ++i) s.push_back(i);
    return s;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> out;
    for (auto item : split_commas(text)) {
        const auto dash = item.find('-');
        if (dash == std::string_view::npos) {
            out.push_back(to_integer<std::uint64_t>(item));
            continue;
        }
        const auto lo = to_integer<std::uint64_t>(trim(item.substr(0, dash)));
        const auto hi = to_integer<std::uint64_t>(trim(item.substr(dash + 1)));
        if (hi < lo) throw InvalidInput("empty seed range \"" + std::string(item) + "\"");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    return out;
}

std::vector<Policy> parse_policy_list(std::string_view text) {
    std::vector<Policy> out;
    for (auto item : split_commas(text)) out.push_back(parse_policy(item));
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void ExperimentConfig::validate() const {
    require(m >= 1, "m", "need at least one track");
    require(n >= 1, "n", "need at least one CPI per track");
    require(k >= 1 && k <= 5, "k", "catalog holds between 1 and 5 waveforms");
    require(d == 3, "d", "contexts are (mean, variance, max), so d must be 3");
    require(n_states >= 1, "n_states", "need at least one state");
    require(memory >= 1, "memory", "memory must be at least 1");
    require(grid_delay >= 1, "grid_delay", "must be positive");
    require(grid_doppler >= 1, "grid_doppler", "must be positive");
    require(ir_taps >= 1, "ir_taps", "must be positive");
    require(oracle_draws >= 1, "oracle_draws", "must be positive");
    require(workers >= 1, "workers", "must be positive");
    require(positive_finite(sigma_q_sq), "sigma_q_sq", "must be positive");
    require(positive_finite(sigma0_sq), "sigma0_sq", "must be positive");
    require(positive_finite(noise_var), "noise_var", "must be positive");
    require(positive_finite(channel_noise_var), "channel_noise_var", "must be positive");
    require(positive_finite(ir_kernel_scale), "ir_kernel_scale", "must be positive");
    require(std::isfinite(sinr_target_db), "sinr_target_db", "must be finite");
    require(obs_flip_prob >= 0.0 && obs_flip_prob < 1.0, "obs_flip_prob", "must lie in [0, 1)");
    require(positive_finite(dirichlet_concentration), "dirichlet_concentration", "must be positive");
    require(positive_finite(target_power), "target_power", "must be positive");
    require(clutter_power >= 0.0 && std::isfinite(clutter_power), "clutter_power",
            "must be nonnegative");
    require(std::isfinite(doppler_scale), "doppler_scale", "must be finite");
    require(mu_star.size() == d, "mu_star", "needs d entries");
    for (double v : mu_star) require(std::isfinite(v), "mu_star", "entries must be finite");
    require(state_gain.size() == n_states, "state_gain", "needs one entry per state");
    for (double g : state_gain)
        require(g >= 0.0 && std::isfinite(g), "state_gain", "gains must be nonnegative");
    require(!seeds.empty(), "seeds", "need at least one seed");
    require(!policies.empty(), "policies", "need at least one policy");
    require(!output_dir.empty(), "output_dir", "must not be empty");
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        if (trim(line).empty()) continue;

        const auto col_of = [&](std::string_view part) {
            return static_cast<std::size_t>(part.data() - line.data()) + 1;
        };
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, col_of(trim(line)), "expected `key = value`");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, eq + 1, "missing key before '='");

        const Field* field = nullptr;
        for (const auto& f : fields())
            if (f.key == key) field = &f;
        if (!field) throw ParseError(line_no, col_of(key), "unknown key \"" + std::string(key) + "\"");
        if (!seen.insert(std::string(key)).second)
            throw ParseError(line_no, col_of(key), "key \"" + std::string(key) + "\" given twice");
        const auto value_col = value.empty() ? eq + 2 : col_of(value);
        if (value.empty())
            throw ParseError(line_no, value_col, "missing value for \"" + std::string(key) + "\"");
        try {
            field->parse(c, value);
        } catch (const InvalidInput& e) {
            throw ParseError(line_no, value_col, e.what());
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const ExperimentConfig& c) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.key;
        out += " = ";
        out += f.format(c);
        out += '\n';
    }
    return out;
}

} // namespace metats
