#pragma once
/*
Seeded episode execution and batch runs.

One episode is a strictly sequential recursion; a batch runs independent
episodes with seeds derive_seed(base, i) and may spread them over threads.
Summaries are stored by run index and aggregated in index order, so a batch
result does not depend on how many threads executed it.

Per round the engine draws exactly two uniforms from the run's stream:
first the action (inverse CDF over user arm order), then the reward.
*/

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pgbandit/agent.hpp"
#include "pgbandit/bandit.hpp"
#include "pgbandit/diagnostics.hpp"
#include "pgbandit/error.hpp"
#include "pgbandit/rng.hpp"

namespace pgbandit {

struct RecordingOptions {
    /// Full-logit snapshot stride; 0 selects max(1, n/1000).
    std::uint64_t stride = 0;
    bool snapshots = true;
    /// Overrides δ = 1/(k² n) for the good-event threshold.
    std::optional<double> delta;
    /// Regret checkpoints; empty selects {n/10, n/2, n}.
    std::vector<std::uint64_t> checkpoints;
};

inline std::uint64_t resolve_stride(const RecordingOptions& opts, std::uint64_t n) {
    return opts.stride > 0 ? opts.stride : std::max<std::uint64_t>(1, n / 1000);
}

inline std::vector<std::uint64_t> resolve_checkpoints(const RecordingOptions& opts, std::uint64_t n) {
    std::vector<std::uint64_t> cps = opts.checkpoints;
    if (cps.empty()) cps = {n / 10, n / 2, n};
    for (auto& c : cps) c = std::clamp<std::uint64_t>(c, 1, n);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    return cps;
}

struct StepRecord {
    std::uint64_t t = 0;
    std::size_t action = 0;
    double reward = 0.0;
    double pi_star = 0.0;
    double theta_star = 0.0;
    double inst_regret = 0.0;
    double realized_gap = 0.0;
    double cum_expected_regret = 0.0;
    double cum_pseudo_regret = 0.0;
    double min_logit = 0.0;
    double pair_margin = 0.0;
    double eta = 0.0;
    bool g_event = false;
};

struct Snapshot {
    std::uint64_t t = 0;
    std::vector<double> theta;
};

struct RunSummary {
    std::uint64_t run_index = 0;
    std::uint64_t seed = 0;
    double final_pseudo_regret = 0.0;
    double final_expected_regret = 0.0;
    double min_min_logit = 0.0;
    double min_pair_margin = 0.0;
    std::uint64_t tau = 0;

    std::vector<double> checkpoint_pseudo;
    std::vector<double> checkpoint_expected;
    double first_half_pseudo = 0.0;
    double second_half_pseudo = 0.0;

    std::uint64_t in_event_steps = 0;
    std::uint64_t lemma3_failures = 0;
    double max_abs_logit_sum = 0.0;
    std::uint64_t increment_violations = 0;
    double final_theta_star = 0.0;
};

struct RunMetadata {
    std::size_t k = 0;
    std::uint64_t n = 0;
    std::string rate;
    double eta_first = 0.0;
    bool non_theorem_regime = false;
    double delta = 0.0;
    double log_term = 0.0;
    std::uint64_t stride = 1;
    std::string rng{kRngAlgorithmId};
    std::string log_base{kLogBase};
};

struct Trajectory {
    std::vector<StepRecord> steps;
    std::vector<Snapshot> snapshots;
    std::vector<double> final_theta;
    bool final_g_event = false;
    double cum_pseudo_regret = 0.0;
    double cum_expected_regret = 0.0;
    std::uint64_t seed = 0;
    RunMetadata metadata;
    RunSummary summary;

    /// flags[j] = G_{j+1} for j = 0..n, the last entry describing θ_{n+1}.
    std::vector<char> g_flags() const {
        std::vector<char> f;
        f.reserve(steps.size() + 1);
        for (const auto& s : steps) f.push_back(s.g_event ? 1 : 0);
        f.push_back(final_g_event ? 1 : 0);
        return f;
    }
};

/// Per-round quantities handed to observers; spans alias engine buffers.
struct StepView {
    StepRecord record;
    std::span<const double> theta;      // θ_t, before the update
    std::span<const double> pi;         // π_t
};

namespace detail {

/// Streaming summary; every field of RunSummary is computed here.
class SummaryBuilder {
public:
    SummaryBuilder(std::uint64_t n, std::vector<std::uint64_t> checkpoints, const AnalysisParams& params)
        : n_(n), checkpoints_(std::move(checkpoints)), params_(params) {
        s_.min_min_logit = std::numeric_limits<double>::infinity();
        s_.min_pair_margin = std::numeric_limits<double>::infinity();
        s_.tau = n;
    }

    void on_step(const StepView& v) {
        const StepRecord& r = v.record;
        s_.min_min_logit = std::min(s_.min_min_logit, r.min_logit);
        s_.min_pair_margin = std::min(s_.min_pair_margin, r.pair_margin);
        // G_t false at t >= 2 means the stop fired at t - 1.
        if (!r.g_event && r.t >= 2 && !tau_fixed_) {
            s_.tau = r.t - 1;
            tau_fixed_ = true;
        }
        if (r.g_event) {
            ++s_.in_event_steps;
            if (!lemma3_evaluate(r.pi_star, r.theta_star, params_).pass()) ++s_.lemma3_failures;
        }
        observe_sum(v.theta);
        if (has_prev_ && std::abs(r.theta_star - prev_theta_star_) > prev_eta_ + kExactTolerance)
            ++s_.increment_violations;
        prev_theta_star_ = r.theta_star;
        prev_eta_ = r.eta;
        has_prev_ = true;

        if (2 * r.t <= n_)
            s_.first_half_pseudo += r.realized_gap;
        else
            s_.second_half_pseudo += r.realized_gap;
        while (next_cp_ < checkpoints_.size() && checkpoints_[next_cp_] == r.t) {
            s_.checkpoint_pseudo.push_back(r.cum_pseudo_regret);
            s_.checkpoint_expected.push_back(r.cum_expected_regret);
            ++next_cp_;
        }
        s_.final_pseudo_regret = r.cum_pseudo_regret;
        s_.final_expected_regret = r.cum_expected_regret;
    }

    void on_finish(std::span<const double> final_theta, double final_theta_star) {
        observe_sum(final_theta);
        if (has_prev_ && std::abs(final_theta_star - prev_theta_star_) > prev_eta_ + kExactTolerance)
            ++s_.increment_violations;
        s_.final_theta_star = final_theta_star;
    }

    RunSummary take(std::uint64_t run_index, std::uint64_t seed) {
        s_.run_index = run_index;
        s_.seed = seed;
        return std::move(s_);
    }

private:
    void observe_sum(std::span<const double> theta) {
        double sum = 0.0;
        for (double x : theta) sum += x;
        s_.max_abs_logit_sum = std::max(s_.max_abs_logit_sum, std::abs(sum));
    }

    std::uint64_t n_;
    std::vector<std::uint64_t> checkpoints_;
    AnalysisParams params_;
    RunSummary s_;
    std::size_t next_cp_ = 0;
    bool tau_fixed_ = false;
    bool has_prev_ = false;
    double prev_theta_star_ = 0.0;
    double prev_eta_ = 0.0;
};

}  // namespace detail

struct EpisodeSetup {
    GapProfile gaps;
    AnalysisParams params;
    std::vector<std::uint64_t> checkpoints;
    RunMetadata metadata;
};

inline EpisodeSetup prepare_episode(const BanditInstance& instance, const LearningRateSpec& rate,
                                    std::uint64_t n, const RecordingOptions& recording) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    if (n < instance.k()) throw Error(ErrorCode::InvalidArgument, "horizon must be at least the arm count");
    EpisodeSetup s;
    s.gaps = gap_profile(instance);
    s.params = make_analysis_params(s.gaps, n, recording.delta);
    s.checkpoints = resolve_checkpoints(recording, n);
    s.metadata.k = instance.k();
    s.metadata.n = n;
    s.metadata.rate = rate.describe();
    s.metadata.eta_first = resolve_rate(rate, 1, s.gaps, n);
    s.metadata.non_theorem_regime =
        rate.is_schedule() || s.metadata.eta_first > theorem_learning_rate(s.gaps, n, instance.k());
    s.metadata.delta = s.params.delta;
    s.metadata.log_term = s.params.log_term;
    s.metadata.stride = resolve_stride(recording, n);
    return s;
}

/// Runs n rounds of softmax policy gradient, calling observer.on_step for
/// every round and observer.on_finish(θ_{n+1}, θ*_{n+1}, G_{n+1}) at the end.
template <class Observer>
void simulate(const BanditInstance& instance, const LearningRateSpec& rate, std::uint64_t n,
              std::uint64_t seed, const EpisodeSetup& setup, Observer& observer) {
    const GapProfile& gaps = setup.gaps;
    const AnalysisParams& params = setup.params;
    const std::size_t k = instance.k();

    AgentState agent = init_agent(k, rate, RateContext{gaps, n});
    RandomStream rng(seed);
    std::vector<RewardDist> dists;
    for (std::size_t a = 0; a < k; ++a) dists.push_back(instance.dist(a));

    const bool fixed_rate = !rate.is_schedule();
    const double fixed_eta = fixed_rate ? agent.current_rate() : 0.0;

    std::vector<double> pi(k);
    double cum_expected = 0.0;
    double cum_pseudo = 0.0;
    for (std::uint64_t t = 1; t <= n; ++t) {
        softmax_into(agent.theta, pi);
        StepView v;
        StepRecord& r = v.record;
        r.t = t;
        r.eta = fixed_rate ? fixed_eta : agent.current_rate();
        r.pi_star = pi_star(pi, gaps);
        r.theta_star = theta_star(agent.theta, gaps);
        r.inst_regret = instantaneous_regret(pi, gaps);
        r.min_logit = min_logit(agent.theta);
        r.pair_margin = pair_margin(agent.theta, gaps);
        r.g_event = g_event_from(r.min_logit, r.pair_margin, params);

        r.action = sample_action(std::span<const double>(pi), rng.uniform());
        r.reward = sample_reward(dists[r.action], rng);
        r.realized_gap = gaps.delta_by_arm[r.action];
        cum_expected += r.inst_regret;
        cum_pseudo += r.realized_gap;
        r.cum_expected_regret = cum_expected;
        r.cum_pseudo_regret = cum_pseudo;

        v.theta = agent.theta;
        v.pi = pi;
        observer.on_step(v);

        apply_pg_update(agent.theta, pi, r.action, r.reward, r.eta);
        ++agent.round;
    }
    observer.on_finish(std::span<const double>(agent.theta), theta_star(agent.theta, gaps),
                       g_event(agent.theta, gaps, params));
}

namespace detail {

class TrajectoryObserver {
public:
    TrajectoryObserver(Trajectory& traj, const EpisodeSetup& setup, bool snapshots)
        : traj_(traj), summary_(setup.metadata.n, setup.checkpoints, setup.params),
          stride_(setup.metadata.stride), snapshots_(snapshots) {
        traj_.steps.reserve(setup.metadata.n);
    }

    void on_step(const StepView& v) {
        traj_.steps.push_back(v.record);
        if (snapshots_ && (v.record.t - 1) % stride_ == 0)
            traj_.snapshots.push_back({v.record.t, {v.theta.begin(), v.theta.end()}});
        summary_.on_step(v);
    }

    void on_finish(std::span<const double> theta, double theta_star_value, bool g) {
        traj_.final_theta.assign(theta.begin(), theta.end());
        traj_.final_g_event = g;
        summary_.on_finish(theta, theta_star_value);
    }

    detail::SummaryBuilder& summary() { return summary_; }

private:
    Trajectory& traj_;
    SummaryBuilder summary_;
    std::uint64_t stride_;
    bool snapshots_;
};

class SummaryObserver {
public:
    explicit SummaryObserver(const EpisodeSetup& setup)
        : summary_(setup.metadata.n, setup.checkpoints, setup.params) {}

    void on_step(const StepView& v) { summary_.on_step(v); }
    void on_finish(std::span<const double> theta, double theta_star_value, bool) {
        summary_.on_finish(theta, theta_star_value);
    }
    detail::SummaryBuilder& summary() { return summary_; }

private:
    SummaryBuilder summary_;
};

}  // namespace detail

inline Trajectory run_episode(const BanditInstance& instance, const LearningRateSpec& rate, std::uint64_t n,
                              std::uint64_t seed, const RecordingOptions& recording = {},
                              std::uint64_t run_index = 0) {
    const EpisodeSetup setup = prepare_episode(instance, rate, n, recording);
    Trajectory traj;
    traj.seed = seed;
    traj.metadata = setup.metadata;
    detail::TrajectoryObserver obs(traj, setup, recording.snapshots);
    simulate(instance, rate, n, seed, setup, obs);
    traj.summary = obs.summary().take(run_index, seed);
    traj.cum_pseudo_regret = traj.summary.final_pseudo_regret;
    traj.cum_expected_regret = traj.summary.final_expected_regret;
    return traj;
}

inline RunSummary run_summary(const BanditInstance& instance, const LearningRateSpec& rate, std::uint64_t n,
                              std::uint64_t seed, const EpisodeSetup& setup, std::uint64_t run_index) {
    detail::SummaryObserver obs(setup);
    simulate(instance, rate, n, seed, setup, obs);
    return obs.summary().take(run_index, seed);
}

// ------------------------------------------------------------------ batches

struct Distribution {
    double mean = 0.0;
    double stddev = 0.0;
    double median = 0.0;
    double p95 = 0.0;
};

struct CheckpointStats {
    std::uint64_t t = 0;
    Distribution pseudo;
    Distribution expected;
};

struct BatchAggregate {
    std::vector<CheckpointStats> checkpoints;
    double mean_first_half_pseudo = 0.0;
    double mean_second_half_pseudo = 0.0;
    std::uint64_t runs_second_half_smaller = 0;
    std::uint64_t lemma3_failures = 0;
    std::uint64_t in_event_steps = 0;
    std::uint64_t increment_violations = 0;
    double max_abs_logit_sum = 0.0;
};

struct BatchResult {
    std::vector<RunSummary> runs;
    BatchAggregate aggregate;
    RunMetadata metadata;
    std::uint64_t base_seed = 0;
    std::vector<std::uint64_t> checkpoints;
    AnalysisParams params;
    std::size_t k_star = 0;
};

/// Linear-interpolation quantile of an already sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline Distribution describe(std::vector<double> values) {
    Distribution d;
    if (values.empty()) return d;
    const double m = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / m;
    double ss = 0.0;
    for (double v : values) ss += (v - d.mean) * (v - d.mean);
    d.stddev = values.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    std::sort(values.begin(), values.end());
    d.median = sorted_quantile(values, 0.5);
    d.p95 = sorted_quantile(values, 0.95);
    return d;
}

inline BatchAggregate aggregate_runs(std::span<const RunSummary> runs, std::span<const std::uint64_t> checkpoints) {
    BatchAggregate agg;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        std::vector<double> pseudo, expected;
        pseudo.reserve(runs.size());
        expected.reserve(runs.size());
        for (const auto& r : runs) {
            pseudo.push_back(r.checkpoint_pseudo.at(c));
            expected.push_back(r.checkpoint_expected.at(c));
        }
        agg.checkpoints.push_back({checkpoints[c], describe(std::move(pseudo)), describe(std::move(expected))});
    }
    if (!runs.empty()) {
        const double m = static_cast<double>(runs.size());
        for (const auto& r : runs) {
            agg.mean_first_half_pseudo += r.first_half_pseudo / m;
            agg.mean_second_half_pseudo += r.second_half_pseudo / m;
            if (r.second_half_pseudo < r.first_half_pseudo) ++agg.runs_second_half_smaller;
            agg.lemma3_failures += r.lemma3_failures;
            agg.in_event_steps += r.in_event_steps;
            agg.increment_violations += r.increment_violations;
            agg.max_abs_logit_sum = std::max(agg.max_abs_logit_sum, r.max_abs_logit_sum);
        }
    }
    return agg;
}

/// 0 means: PG_BANDIT_THREADS if set and positive, else hardware concurrency.
inline unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PG_BANDIT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline BatchResult run_batch(const BanditInstance& instance, const LearningRateSpec& rate, std::uint64_t n,
                             std::uint64_t base_seed, std::uint64_t m, const RecordingOptions& recording = {},
                             unsigned threads = 0) {
    if (m == 0) throw Error(ErrorCode::InvalidArgument, "run count must be at least 1");
    const EpisodeSetup setup = prepare_episode(instance, rate, n, recording);

    BatchResult batch;
    batch.runs.resize(m);
    batch.metadata = setup.metadata;
    batch.base_seed = base_seed;
    batch.checkpoints = setup.checkpoints;
    batch.params = setup.params;
    batch.k_star = setup.gaps.k_star;

    std::atomic<std::uint64_t> next{0};
    std::mutex error_mutex;
    std::optional<std::pair<std::uint64_t, std::string>> first_error;

    auto worker = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= m) return;
            try {
                batch.runs[i] = run_summary(instance, rate, n, derive_seed(base_seed, i), setup, i);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (!first_error || i < first_error->first) first_error.emplace(i, e.what());
            }
        }
    };

    const unsigned nthreads = static_cast<unsigned>(
        std::min<std::uint64_t>(resolve_thread_count(threads), m));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(nthreads);
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    }
    if (first_error)
        throw Error(ErrorCode::InvalidArgument,
                    "run " + std::to_string(first_error->first) + ": " + first_error->second);

    batch.aggregate = aggregate_runs(batch.runs, batch.checkpoints);
    return batch;
}

}  // namespace pgbandit
