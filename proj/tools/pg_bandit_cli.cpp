// Experiment driver for softmax policy gradient on stochastic bandits.
//
//   pg_bandit_cli run    [--config f] [--preset p] [--seed s] [--out dir] [--stride j] [--delta d]
//   pg_bandit_cli batch  [... same ...] [--runs m]
//   pg_bandit_cli verify [... same ...]
//   pg_bandit_cli preset <name> [... same ...]
//
// Exit status: 0 on success, 1 when `verify` reports a failed check, 2 on errors.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pgbandit/config.hpp"
#include "pgbandit/report.hpp"
#include "pgbandit/sim.hpp"
#include "pgbandit/verify.hpp"

namespace fs = std::filesystem;
using namespace pgbandit;

namespace {

struct Flags {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> runs;
    std::string out;
    std::optional<std::uint64_t> stride;
    std::optional<double> delta;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "Experiment config file (key = value lines)");
    cmd->add_option("--preset", f.preset, "Preset: theorem-regime, lower-bound-instance, large-eta-remark, equal-gaps-baudry");
    cmd->add_option("--seed", f.seed, "Base seed (u64)");
    cmd->add_option("--runs", f.runs, "Number of runs m");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--stride", f.stride, "Logit snapshot stride");
    cmd->add_option("--delta", f.delta, "Confidence delta (default 1/(k^2 n))");
}

ConfigLayer layer_from(const Flags& f, const std::optional<std::string>& preset_override = std::nullopt) {
    ConfigLayer layer;
    if (!f.config.empty()) layer = parse_config_file(f.config);
    ConfigLayer cli;
    if (preset_override) cli.preset = *preset_override;
    else if (!f.preset.empty()) cli.preset = f.preset;
    cli.seed = f.seed;
    cli.m = f.runs;
    if (!f.out.empty()) cli.out = f.out;
    cli.stride = f.stride;
    cli.delta = f.delta;
    layer.merge(cli);
    if (!layer.preset && !layer.means) layer.preset = "theorem-regime";
    return layer;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
    return s;
}

MetadataBlock config_echo(const ExperimentConfig& cfg) {
    std::vector<std::string> mu;
    for (double x : cfg.means) mu.push_back(fmt_real(x));
    MetadataBlock meta{
        {"preset", cfg.preset.value_or("none")},
        {"means", "[" + join(mu, ", ") + "]"},
        {"distribution", std::string(to_string(cfg.family))},
        {"half_width", fmt_real(cfg.half_width)},
        {"m", std::to_string(cfg.m)},
        {"base_seed", std::to_string(cfg.seed)},
        {"delta_source", cfg.delta_overridden ? "override" : "1/(k^2 n)"},
    };
    if (!cfg.labels.empty()) meta.emplace_back("labels", join(cfg.labels, "; "));
    return meta;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    return os;
}

void print_labels(const ExperimentConfig& cfg) {
    for (const auto& l : cfg.labels) std::cout << "[" << l << "] ";
    if (!cfg.labels.empty()) std::cout << '\n';
}

int do_run(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const Trajectory traj = run_episode(cfg.instance(), cfg.rate, cfg.n, cfg.seed, cfg.recording());
    const MetadataBlock extra = config_echo(cfg);
    {
        auto os = open_out(fs::path(cfg.out_dir) / "trajectory.csv");
        write_trajectory_csv(os, traj, extra);
    }
    {
        auto os = open_out(fs::path(cfg.out_dir) / "snapshots.csv");
        write_snapshots_csv(os, traj);
    }
    {
        auto os = open_out(fs::path(cfg.out_dir) / "trajectory.gp");
        write_trajectory_gnuplot(os, "trajectory.csv");
    }
    print_labels(cfg);
    std::cout << "eta " << fmt_real(traj.metadata.eta_first) << "  pseudo-regret " << fmt_real(traj.cum_pseudo_regret)
              << "  expected regret " << fmt_real(traj.cum_expected_regret) << "  tau " << traj.summary.tau << '\n'
              << "wrote " << (fs::path(cfg.out_dir) / "trajectory.csv").string() << '\n';
    return 0;
}

int do_batch(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const BatchResult batch = run_batch(cfg.instance(), cfg.rate, cfg.n, cfg.seed, cfg.m, cfg.recording(), cfg.threads);
    const BatchSummary summary = summarize_batch(batch);
    const MetadataBlock extra = config_echo(cfg);
    {
        auto os = open_out(fs::path(cfg.out_dir) / "batch.csv");
        write_batch_csv(os, batch, extra);
    }
    {
        auto os = open_out(fs::path(cfg.out_dir) / "summary.csv");
        write_summary_csv(os, batch, summary, extra);
    }
    {
        auto os = open_out(fs::path(cfg.out_dir) / "curve.csv");
        write_curve_csv(os, batch);
    }
    {
        auto os = open_out(fs::path(cfg.out_dir) / "curve.gp");
        write_curve_gnuplot(os, "curve.csv");
    }
    print_labels(cfg);
    std::cout << "eta " << fmt_real(batch.metadata.eta_first) << "  runs " << batch.runs.size()
              << "  mean pseudo-regret " << fmt_real(summary.bounds.empirical_mean_regret)
              << "  sublinearity " << fmt_real(summary.sublinearity_indicator) << '\n';
    for (const auto& e : summary.events)
        std::cout << to_string(e.event) << ": " << e.count << "/" << e.runs << "  wilson [" << fmt_real(e.interval.lo)
                  << ", " << fmt_real(e.interval.hi) << "]  ceiling " << fmt_real(e.ceiling) << '\n';
    std::cout << "wrote " << (fs::path(cfg.out_dir) / "summary.csv").string() << '\n';
    return 0;
}

int do_verify(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    VerifyOptions opts;
    opts.threads = cfg.threads;
    const auto rows = run_verify_suite(cfg.instance(), cfg.n, cfg.m, cfg.seed, cfg.recording(), opts);
    MetadataBlock meta = config_echo(cfg);
    meta.emplace_back("rate", "theorem_auto");
    meta.emplace_back("n", std::to_string(cfg.n));
    meta.emplace_back("band_events", "95% Wilson lower end <= union-bound ceiling");
    meta.emplace_back("band_regret", "mean < 10 k ln(n) ln(max(k,2)) / eta; second half smaller in >= 95% of runs");
    meta.emplace_back("tolerance_exact", "1e-12");
    meta.emplace_back("tolerance_finite_difference", "1e-6 relative, h = 1e-5");
    {
        auto os = open_out(fs::path(cfg.out_dir) / "verify.csv");
        write_verify_csv(os, rows, meta);
    }
    int failures = 0;
    for (const auto& r : rows) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  value=" << fmt_real(r.value)
                  << "  threshold=" << fmt_real(r.threshold) << '\n';
        if (!r.pass) ++failures;
    }
    std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << '\n';
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Softmax policy gradient bandit experiments"};
    app.require_subcommand(1);

    Flags run_flags, batch_flags, verify_flags, preset_flags;
    auto* run = app.add_subcommand("run", "Run one episode and write its trajectory");
    add_common_flags(run, run_flags);
    auto* batch = app.add_subcommand("batch", "Run m seeded episodes and summarize them");
    add_common_flags(batch, batch_flags);
    auto* verify = app.add_subcommand("verify", "Run the diagnostics suite on a theorem-regime batch");
    add_common_flags(verify, verify_flags);
    auto* preset = app.add_subcommand("preset", "Run a batch with a named preset");
    std::string preset_name;
    preset->add_option("name", preset_name, "Preset name")->required();
    add_common_flags(preset, preset_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(finalize_config(layer_from(run_flags)));
        if (batch->parsed()) return do_batch(finalize_config(layer_from(batch_flags)));
        if (verify->parsed()) {
            ConfigLayer layer = layer_from(verify_flags);
            if (!layer.m) layer.m = 1000;
            layer.eta = "theorem_auto";
            layer.schedule_rounds.reset();
            layer.schedule_rates.reset();
            return do_verify(finalize_config(layer));
        }
        if (preset->parsed()) return do_batch(finalize_config(layer_from(preset_flags, preset_name)));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
