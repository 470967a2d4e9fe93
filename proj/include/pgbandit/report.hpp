#pragma once
/*
CSV artifacts. Every file starts with a block of "# key: value" metadata
lines followed by a header row. Reals are written in shortest round-trip
form so a file re-read with strtod reproduces the exact doubles, and two
runs with the same configuration produce identical bytes.

Arm indices are written 1-based.
*/

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgbandit/error.hpp"
#include "pgbandit/events.hpp"
#include "pgbandit/sim.hpp"

namespace pgbandit {

inline constexpr std::string_view kArtifactVersion = "0.1.0";

inline std::string fmt_real(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

using MetadataBlock = std::vector<std::pair<std::string, std::string>>;

inline void write_metadata(std::ostream& os, const MetadataBlock& meta) {
    for (const auto& [key, value] : meta) os << "# " << key << ": " << value << '\n';
}

inline MetadataBlock run_metadata_block(const RunMetadata& m) {
    return {
        {"artifact_version", std::string(kArtifactVersion)},
        {"rng", m.rng},
        {"log_base", m.log_base},
        {"k", std::to_string(m.k)},
        {"n", std::to_string(m.n)},
        {"rate", m.rate},
        {"eta", fmt_real(m.eta_first)},
        {"regime", m.non_theorem_regime ? "non-theorem regime" : "theorem regime"},
        {"delta", fmt_real(m.delta)},
        {"log_n_over_delta", fmt_real(m.log_term)},
        {"snapshot_stride", std::to_string(m.stride)},
    };
}

inline constexpr std::string_view kTrajectoryHeader =
    "t,action,reward,pi_star,theta_star,inst_regret,cum_expected_regret,cum_pseudo_regret,"
    "min_logit,pair_margin,g_event";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const MetadataBlock& extra = {}) {
    MetadataBlock meta = run_metadata_block(traj.metadata);
    meta.emplace_back("seed", std::to_string(traj.seed));
    meta.insert(meta.end(), extra.begin(), extra.end());
    write_metadata(os, meta);
    os << kTrajectoryHeader << '\n';
    for (const auto& s : traj.steps) {
        os << s.t << ',' << (s.action + 1) << ',' << fmt_real(s.reward) << ',' << fmt_real(s.pi_star) << ','
           << fmt_real(s.theta_star) << ',' << fmt_real(s.inst_regret) << ',' << fmt_real(s.cum_expected_regret)
           << ',' << fmt_real(s.cum_pseudo_regret) << ',' << fmt_real(s.min_logit) << ','
           << fmt_real(s.pair_margin) << ',' << (s.g_event ? 1 : 0) << '\n';
    }
}

inline void write_snapshots_csv(std::ostream& os, const Trajectory& traj) {
    write_metadata(os, run_metadata_block(traj.metadata));
    os << 't';
    for (std::size_t a = 0; a < traj.metadata.k; ++a) os << ",theta_" << (a + 1);
    os << '\n';
    auto row = [&](std::uint64_t t, const std::vector<double>& theta) {
        os << t;
        for (double x : theta) os << ',' << fmt_real(x);
        os << '\n';
    };
    for (const auto& s : traj.snapshots) row(s.t, s.theta);
    if (!traj.final_theta.empty()) row(traj.metadata.n + 1, traj.final_theta);
}

inline constexpr std::string_view kBatchHeader =
    "run_index,seed,final_pseudo_regret,final_expected_regret,min_min_logit,min_pair_margin,tau";

inline void write_batch_csv(std::ostream& os, const BatchResult& batch, const MetadataBlock& extra = {}) {
    MetadataBlock meta = run_metadata_block(batch.metadata);
    meta.emplace_back("base_seed", std::to_string(batch.base_seed));
    meta.emplace_back("runs", std::to_string(batch.runs.size()));
    meta.insert(meta.end(), extra.begin(), extra.end());
    write_metadata(os, meta);
    os << kBatchHeader << '\n';
    for (const auto& r : batch.runs) {
        os << r.run_index << ',' << r.seed << ',' << fmt_real(r.final_pseudo_regret) << ','
           << fmt_real(r.final_expected_regret) << ',' << fmt_real(r.min_min_logit) << ','
           << fmt_real(r.min_pair_margin) << ',' << r.tau << '\n';
    }
}

inline std::string batch_csv_string(const BatchResult& batch) {
    std::ostringstream os;
    write_batch_csv(os, batch);
    return os.str();
}

// ------------------------------------------------------------- summaries

/// Empirical regret against the regret-bound shapes (constants unspecified).
struct BoundComparison {
    double empirical_mean_regret = 0.0;
    double eta = 0.0;
    double refined_bound_shape = 0.0;  // k ln(n) ln(k) / η
    double coarse_bound_shape = 0.0;   // k² ln(n) / η
    double refined_ratio = 0.0;
    double coarse_ratio = 0.0;
};

inline BoundComparison compare_bounds(double mean_regret, std::size_t k, std::uint64_t n, double eta) {
    BoundComparison b;
    const double kd = static_cast<double>(k);
    const double ln_n = std::log(static_cast<double>(n));
    b.empirical_mean_regret = mean_regret;
    b.eta = eta;
    b.refined_bound_shape = kd * ln_n * std::log(std::max(kd, 2.0)) / eta;
    b.coarse_bound_shape = kd * kd * ln_n / eta;
    b.refined_ratio = mean_regret / b.refined_bound_shape;
    b.coarse_ratio = mean_regret / b.coarse_bound_shape;
    return b;
}

struct BatchSummary {
    BatchAggregate aggregate;
    BoundComparison bounds;
    std::vector<FrequencyEstimate> events;
    /// Mean regret over (n/2, n] divided by mean regret over (0, n/2]; 0 when both are 0.
    double sublinearity_indicator = 0.0;
    double fraction_second_half_smaller = 0.0;
};

inline BatchSummary summarize_batch(const BatchResult& batch) {
    if (batch.runs.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
    BatchSummary s;
    s.aggregate = batch.aggregate;
    const double mean_final = batch.aggregate.checkpoints.empty() ? 0.0 : batch.aggregate.checkpoints.back().pseudo.mean;
    s.bounds = compare_bounds(mean_final, batch.metadata.k, batch.metadata.n, batch.metadata.eta_first);
    for (EventKind e : {EventKind::MinLogitBreach, EventKind::PairMarginBreach, EventKind::GoodEventBreach})
        s.events.push_back(event_frequency(batch, e));
    const double first = batch.aggregate.mean_first_half_pseudo;
    const double second = batch.aggregate.mean_second_half_pseudo;
    s.sublinearity_indicator = first > 0.0 ? second / first : (second > 0.0 ? INFINITY : 0.0);
    s.fraction_second_half_smaller =
        static_cast<double>(batch.aggregate.runs_second_half_smaller) / static_cast<double>(batch.runs.size());
    return s;
}

inline void write_summary_csv(std::ostream& os, const BatchResult& batch, const BatchSummary& s,
                              const MetadataBlock& extra = {}) {
    MetadataBlock meta = run_metadata_block(batch.metadata);
    meta.emplace_back("base_seed", std::to_string(batch.base_seed));
    meta.emplace_back("runs", std::to_string(batch.runs.size()));
    meta.insert(meta.end(), extra.begin(), extra.end());
    write_metadata(os, meta);
    os << "metric,value\n";
    auto put = [&](const std::string& name, double v) { os << name << ',' << fmt_real(v) << '\n'; };
    for (const auto& cp : s.aggregate.checkpoints) {
        const std::string at = "@" + std::to_string(cp.t);
        put("pseudo_regret_mean" + at, cp.pseudo.mean);
        put("pseudo_regret_median" + at, cp.pseudo.median);
        put("pseudo_regret_p95" + at, cp.pseudo.p95);
        put("pseudo_regret_stddev" + at, cp.pseudo.stddev);
        put("expected_regret_mean" + at, cp.expected.mean);
        put("expected_regret_median" + at, cp.expected.median);
        put("expected_regret_p95" + at, cp.expected.p95);
        put("expected_regret_stddev" + at, cp.expected.stddev);
    }
    put("bound_eta", s.bounds.eta);
    put("bound_refined_shape", s.bounds.refined_bound_shape);
    put("bound_coarse_shape", s.bounds.coarse_bound_shape);
    put("bound_refined_ratio", s.bounds.refined_ratio);
    put("bound_coarse_ratio", s.bounds.coarse_ratio);
    for (const auto& e : s.events) {
        const std::string name(to_string(e.event));
        put(name + "_count", static_cast<double>(e.count));
        put(name + "_frequency", e.estimate);
        put(name + "_wilson_lo", e.interval.lo);
        put(name + "_wilson_hi", e.interval.hi);
        put(name + "_ceiling", e.ceiling);
        put(name + "_within_ceiling", e.pass ? 1.0 : 0.0);
    }
    put("first_half_pseudo_regret_mean", s.aggregate.mean_first_half_pseudo);
    put("second_half_pseudo_regret_mean", s.aggregate.mean_second_half_pseudo);
    put("sublinearity_indicator", s.sublinearity_indicator);
    put("fraction_second_half_smaller", s.fraction_second_half_smaller);
    put("lemma3_in_event_steps", static_cast<double>(s.aggregate.in_event_steps));
    put("lemma3_failures", static_cast<double>(s.aggregate.lemma3_failures));
    put("max_abs_logit_sum", s.aggregate.max_abs_logit_sum);
    put("theta_star_increment_violations", static_cast<double>(s.aggregate.increment_violations));
}

inline void write_curve_csv(std::ostream& os, const BatchResult& batch) {
    write_metadata(os, run_metadata_block(batch.metadata));
    os << "t,pseudo_mean,pseudo_median,pseudo_p95,expected_mean,expected_median,expected_p95\n";
    for (const auto& cp : batch.aggregate.checkpoints) {
        os << cp.t << ',' << fmt_real(cp.pseudo.mean) << ',' << fmt_real(cp.pseudo.median) << ','
           << fmt_real(cp.pseudo.p95) << ',' << fmt_real(cp.expected.mean) << ','
           << fmt_real(cp.expected.median) << ',' << fmt_real(cp.expected.p95) << '\n';
    }
}

inline void write_trajectory_gnuplot(std::ostream& os, std::string_view csv_name) {
    os << "set datafile separator ','\n"
          "set key left top\n"
          "set xlabel 'round t'\n"
          "set ylabel 'cumulative regret'\n"
          "plot '" << csv_name << "' using 1:8 with lines title 'pseudo-regret', \\\n"
          "     '" << csv_name << "' using 1:7 with lines title 'expected regret'\n";
}

inline void write_curve_gnuplot(std::ostream& os, std::string_view csv_name) {
    os << "set datafile separator ','\n"
          "set key left top\n"
          "set xlabel 'round t'\n"
          "set ylabel 'cumulative regret'\n"
          "plot '" << csv_name << "' using 1:2 with linespoints title 'mean pseudo-regret', \\\n"
          "     '" << csv_name << "' using 1:4 with linespoints title 'p95 pseudo-regret', \\\n"
          "     '" << csv_name << "' using 1:5 with linespoints title 'mean expected regret'\n";
}

// ------------------------------------------------------------ verify rows

struct CheckRow {
    std::string name;
    bool deterministic = true;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

inline constexpr std::string_view kVerifyHeader = "check_name,kind,value,threshold,pass";

inline void write_verify_csv(std::ostream& os, const std::vector<CheckRow>& rows, const MetadataBlock& meta) {
    write_metadata(os, meta);
    os << kVerifyHeader << '\n';
    for (const auto& r : rows) {
        os << r.name << ',' << (r.deterministic ? "deterministic" : "statistical") << ',' << fmt_real(r.value)
           << ',' << fmt_real(r.threshold) << ',' << (r.pass ? 1 : 0) << '\n';
    }
}

// ------------------------------------------------------------ reading back

/// Minimal reader for the CSV files above: metadata, header and rows of fields.
struct CsvTable {
    MetadataBlock metadata;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error(ErrorCode::InvalidArgument, "no column '" + std::string(name) + "'");
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            if (colon != std::string::npos)
                t.metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        if (t.header.empty()) {
            t.header = split_csv_line(line);
            continue;
        }
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

}  // namespace pgbandit
