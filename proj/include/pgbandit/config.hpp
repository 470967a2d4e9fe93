#pragma once
/*
Experiment configuration.

File grammar (UTF-8, one entry per line):

    # comment
    key = value          # trailing comments allowed outside quotes
    means = [0.9, 0.4]   # arrays in brackets, comma separated
    eta = "theorem_auto" # strings may be quoted; bare words also accepted

Known keys:
    preset, means, distribution, half_width, n, eta, schedule_rounds,
    schedule_rates, m, seed, delta, stride, out, checkpoints, threads,
    k, gap, eta_scale
Unknown keys are errors. Values are layered: preset defaults, then the
file, then command-line overrides.
*/

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pgbandit/agent.hpp"
#include "pgbandit/bandit.hpp"
#include "pgbandit/diagnostics.hpp"
#include "pgbandit/error.hpp"
#include "pgbandit/sim.hpp"

namespace pgbandit {

/// Every field optional; the result of parsing a file or a set of CLI flags.
struct ConfigLayer {
    std::optional<std::string> preset;
    std::optional<std::vector<double>> means;
    std::optional<std::string> distribution;
    std::optional<double> half_width;
    std::optional<std::uint64_t> n;
    std::optional<std::string> eta;  // real literal or "theorem_auto"
    std::optional<std::vector<std::uint64_t>> schedule_rounds;
    std::optional<std::vector<double>> schedule_rates;
    std::optional<std::uint64_t> m;
    std::optional<std::uint64_t> seed;
    std::optional<double> delta;
    std::optional<std::uint64_t> stride;
    std::optional<std::string> out;
    std::optional<std::vector<std::uint64_t>> checkpoints;
    std::optional<unsigned> threads;
    std::optional<std::size_t> k;
    std::optional<double> gap;
    std::optional<double> eta_scale;

    /// Fields set in `over` replace fields here.
    void merge(const ConfigLayer& over) {
        auto take = [](auto& dst, const auto& src) {
            if (src) dst = src;
        };
        take(preset, over.preset);
        take(means, over.means);
        take(distribution, over.distribution);
        take(half_width, over.half_width);
        take(n, over.n);
        take(eta, over.eta);
        take(schedule_rounds, over.schedule_rounds);
        take(schedule_rates, over.schedule_rates);
        take(m, over.m);
        take(seed, over.seed);
        take(delta, over.delta);
        take(stride, over.stride);
        take(out, over.out);
        take(checkpoints, over.checkpoints);
        take(threads, over.threads);
        take(k, over.k);
        take(gap, over.gap);
        take(eta_scale, over.eta_scale);
    }
};

struct ExperimentConfig {
    std::optional<std::string> preset;
    std::vector<double> means;
    RewardFamily family = RewardFamily::Bernoulli;
    double half_width = 0.0;
    std::uint64_t n = 0;
    LearningRateSpec rate = LearningRateSpec::theorem_auto();
    std::uint64_t m = 1;
    std::uint64_t seed = 0;
    double delta = 0.0;            // resolved; 1/(k² n) unless overridden
    bool delta_overridden = false;
    std::uint64_t stride = 1;      // resolved; max(1, n/1000) unless overridden
    std::string out_dir = "out";
    std::vector<std::uint64_t> checkpoints;
    unsigned threads = 0;
    std::vector<std::string> labels;  // e.g. EXPLORATORY, non-theorem regime

    std::size_t k() const { return means.size(); }
    BanditInstance instance() const { return BanditInstance(means, family, half_width); }

    RecordingOptions recording() const {
        RecordingOptions r;
        r.stride = stride;
        r.delta = delta;
        r.checkpoints = checkpoints;
        return r;
    }
};

// ------------------------------------------------------------------ parsing

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

inline std::string strip_comment(const std::string& line) {
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quotes = !in_quotes;
        if (line[i] == '#' && !in_quotes) return line.substr(0, i);
    }
    return line;
}

[[noreturn]] inline void parse_fail(int line, const std::string& msg) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + msg);
}

inline double to_real(const std::string& text, int line, const std::string& key) {
    const std::string s = unquote(text);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
        parse_fail(line, key + ": expected a number, got '" + text + "'");
    return v;
}

inline std::uint64_t to_uint(const std::string& text, int line, const std::string& key) {
    const std::string s = unquote(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty()) return v;
    // Accept integral reals such as 1e4.
    const double d = to_real(text, line, key);
    if (d < 0.0 || d != std::floor(d) || d > 1.8e19)
        parse_fail(line, key + ": expected a nonnegative integer, got '" + text + "'");
    return static_cast<std::uint64_t>(d);
}

inline std::vector<std::string> array_items(const std::string& text, int line, const std::string& key) {
    if (text.size() < 2 || text.front() != '[' || text.back() != ']')
        parse_fail(line, key + ": expected an array in brackets");
    std::vector<std::string> items;
    const std::string body = text.substr(1, text.size() - 2);
    if (trim(body).empty()) return items;
    std::istringstream is(body);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) parse_fail(line, key + ": empty array element");
        items.push_back(item);
    }
    return items;
}

inline std::vector<double> to_reals(const std::string& text, int line, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : array_items(text, line, key)) out.push_back(to_real(item, line, key));
    return out;
}

inline std::vector<std::uint64_t> to_uints(const std::string& text, int line, const std::string& key) {
    std::vector<std::uint64_t> out;
    for (const auto& item : array_items(text, line, key)) out.push_back(to_uint(item, line, key));
    return out;
}

}  // namespace detail

inline ConfigLayer parse_config_text(std::string_view text) {
    using namespace detail;
    ConfigLayer c;
    std::map<std::string, int> seen;
    std::istringstream is{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const std::string content = trim(strip_comment(raw));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) parse_fail(line, "expected 'key = value'");
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (key.empty()) parse_fail(line, "missing key");
        if (value.empty()) parse_fail(line, key + ": missing value");
        if (auto [it, fresh] = seen.emplace(key, line); !fresh)
            parse_fail(line, key + ": duplicate key (first on line " + std::to_string(it->second) + ")");

        if (key == "preset") c.preset = unquote(value);
        else if (key == "means") c.means = to_reals(value, line, key);
        else if (key == "distribution") c.distribution = unquote(value);
        else if (key == "half_width") c.half_width = to_real(value, line, key);
        else if (key == "n") c.n = to_uint(value, line, key);
        else if (key == "eta") c.eta = unquote(value);
        else if (key == "schedule_rounds") c.schedule_rounds = to_uints(value, line, key);
        else if (key == "schedule_rates") c.schedule_rates = to_reals(value, line, key);
        else if (key == "m") c.m = to_uint(value, line, key);
        else if (key == "seed") c.seed = to_uint(value, line, key);
        else if (key == "delta") c.delta = to_real(value, line, key);
        else if (key == "stride") c.stride = to_uint(value, line, key);
        else if (key == "out") c.out = unquote(value);
        else if (key == "checkpoints") c.checkpoints = to_uints(value, line, key);
        else if (key == "threads") c.threads = static_cast<unsigned>(to_uint(value, line, key));
        else if (key == "k") c.k = static_cast<std::size_t>(to_uint(value, line, key));
        else if (key == "gap") c.gap = to_real(value, line, key);
        else if (key == "eta_scale") c.eta_scale = to_real(value, line, key);
        else throw Error(ErrorCode::UnknownKey, "line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    return c;
}

inline ConfigLayer parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ------------------------------------------------------------------ presets

inline constexpr double kPresetRateCap = 0.5;

struct PresetResult {
    ConfigLayer defaults;
    std::vector<std::string> labels;
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"theorem-regime", "lower-bound-instance", "large-eta-remark",
                                                "equal-gaps-baudry"};
    return names;
}

inline std::string real_literal(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Preset defaults given the user's layer (which supplies k, gap, eta_scale).
inline PresetResult preset_defaults(const std::string& name, const ConfigLayer& user) {
    auto validation = [](const std::string& field, const std::string& msg) {
        return Error(ErrorCode::ValidationError, field + ": " + msg);
    };
    PresetResult p;
    auto& d = p.defaults;
    if (name == "theorem-regime") {
        d.means = std::vector<double>{0.9, 0.4};
        d.n = 10000;
        d.eta = "theorem_auto";
        return p;
    }

    const std::size_t k = user.k.value_or(name == "lower-bound-instance" ? 3 : name == "large-eta-remark" ? 10 : 4);
    if (k < 2) throw validation("k", "presets need at least two arms");
    if (name == "lower-bound-instance") {
        // μ = (1, 1 - Δ, 0, ..., 0), η = min(C Δ², 1/2).
        const double gap = user.gap.value_or(0.25);
        const double scale = user.eta_scale.value_or(10.0);
        if (!(gap > 0.0 && gap <= 1.0)) throw validation("gap", "must lie in (0,1]");
        if (!(scale > 0.0)) throw validation("eta_scale", "must be positive");
        std::vector<double> mu(k, 0.0);
        mu[0] = 1.0;
        mu[1] = 1.0 - gap;
        d.means = mu;
        d.n = 100000;
        d.eta = real_literal(std::min(scale * gap * gap, kPresetRateCap));
        p.labels = {"EXPLORATORY", "non-theorem regime"};
        return p;
    }
    if (name == "large-eta-remark") {
        // All suboptimal arms at 1 - Δ with Δ ≥ 1/2; η just above 3 ln 3 / (k - 1).
        const double gap = user.gap.value_or(0.5);
        if (!(gap >= 0.5 && gap <= 1.0)) throw validation("gap", "must lie in [0.5, 1]");
        std::vector<double> mu(k, 1.0 - gap);
        mu[0] = 1.0;
        d.means = mu;
        d.n = 10000;
        d.eta = real_literal(1.01 * 3.0 * std::log(3.0) / static_cast<double>(k - 1));
        p.labels = {"EXPLORATORY", "non-theorem regime"};
        return p;
    }
    if (name == "equal-gaps-baudry") {
        // Δmin = Δmax = Δ, η = Δ / (8k).
        const double gap = user.gap.value_or(0.5);
        if (!(gap > 0.0 && gap <= 1.0)) throw validation("gap", "must lie in (0,1]");
        std::vector<double> mu(k, 1.0 - gap);
        mu[0] = 1.0;
        d.means = mu;
        d.n = 10000;
        d.eta = real_literal(gap / (8.0 * static_cast<double>(k)));
        p.labels = {"non-theorem regime"};
        return p;
    }
    throw Error(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
}

inline LearningRateSpec rate_from_layer(const ConfigLayer& c) {
    const bool has_schedule = c.schedule_rounds || c.schedule_rates;
    if (has_schedule && c.eta)
        throw Error(ErrorCode::ValidationError, "eta: give either eta or schedule_rounds/schedule_rates");
    if (has_schedule) {
        if (!c.schedule_rounds || !c.schedule_rates || c.schedule_rounds->size() != c.schedule_rates->size())
            throw Error(ErrorCode::ValidationError,
                        "schedule_rounds: needs schedule_rates of the same length");
        std::vector<RateBreakpoint> bps;
        for (std::size_t i = 0; i < c.schedule_rounds->size(); ++i)
            bps.push_back({(*c.schedule_rounds)[i], (*c.schedule_rates)[i]});
        try {
            return LearningRateSpec::schedule(std::move(bps));
        } catch (const Error& e) {
            throw Error(ErrorCode::ValidationError, std::string("schedule_rates: ") + e.what());
        }
    }
    if (!c.eta) throw Error(ErrorCode::ValidationError, "eta: missing");
    if (*c.eta == "theorem_auto") return LearningRateSpec::theorem_auto();
    double v = 0.0;
    const auto& s = *c.eta;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::ValidationError, "eta: expected a number or \"theorem_auto\", got '" + s + "'");
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::ValidationError, "eta: must be positive");
    return LearningRateSpec::constant(v);
}

/// Applies preset defaults under `layer`, validates and fills derived defaults.
inline ExperimentConfig finalize_config(const ConfigLayer& layer) {
    auto validation = [](const std::string& field, const std::string& msg) {
        return Error(ErrorCode::ValidationError, field + ": " + msg);
    };
    ConfigLayer c;
    std::vector<std::string> labels;
    if (layer.preset) {
        PresetResult p = preset_defaults(*layer.preset, layer);
        c = std::move(p.defaults);
        labels = std::move(p.labels);
        // An explicit schedule replaces a preset rate.
        if (layer.schedule_rounds || layer.schedule_rates) c.eta.reset();
    }
    c.merge(layer);

    ExperimentConfig cfg;
    cfg.preset = c.preset;
    cfg.labels = labels;
    if (!c.means) throw validation("means", "missing");
    cfg.means = *c.means;
    if (c.distribution) {
        try {
            cfg.family = parse_reward_family(*c.distribution);
        } catch (const Error& e) {
            throw validation("distribution", e.what());
        }
    }
    cfg.half_width = c.half_width.value_or(cfg.family == RewardFamily::ClippedUniform ? 0.5 : 0.0);
    try {
        (void)cfg.instance();
    } catch (const Error& e) {
        throw Error(e.code(), std::string("means: ") + e.what());
    }
    if (!c.n) throw validation("n", "missing");
    cfg.n = *c.n;
    if (cfg.n < cfg.k()) throw validation("n", "horizon must be at least the number of arms");
    cfg.rate = rate_from_layer(c);
    if (cfg.rate.is_schedule() &&
        std::find(labels.begin(), labels.end(), "non-theorem regime") == labels.end())
        cfg.labels.push_back("non-theorem regime");
    cfg.m = c.m.value_or(1);
    if (cfg.m < 1) throw validation("m", "need at least one run");
    cfg.seed = c.seed.value_or(0);
    cfg.delta_overridden = c.delta.has_value();
    cfg.delta = c.delta.value_or(default_delta(cfg.k(), cfg.n));
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw validation("delta", "must lie in (0,1)");
    cfg.stride = c.stride.value_or(std::max<std::uint64_t>(1, cfg.n / 1000));
    if (cfg.stride < 1) throw validation("stride", "must be at least 1");
    cfg.out_dir = c.out.value_or("out");
    if (c.checkpoints) {
        for (auto t : *c.checkpoints)
            if (t < 1 || t > cfg.n) throw validation("checkpoints", "must lie in [1, n]");
        cfg.checkpoints = *c.checkpoints;
    } else {
        cfg.checkpoints = resolve_checkpoints({}, cfg.n);
    }
    cfg.threads = c.threads.value_or(0);
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    return finalize_config(parse_config_file(path));
}

}  // namespace pgbandit
