#pragma once
/*
Verification suite: every checkable quantity of the analysis, evaluated on
fuzzed states and on a fresh batch. Used by `pg_bandit_cli verify` and by
the acceptance tests.

Deterministic checks must hold exactly (or to 1e-12 / the stated
tolerance). Statistical checks use fixed seeds and pre-registered bands, so
their outcome is reproducible.
*/

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pgbandit/agent.hpp"
#include "pgbandit/bandit.hpp"
#include "pgbandit/diagnostics.hpp"
#include "pgbandit/events.hpp"
#include "pgbandit/report.hpp"
#include "pgbandit/rng.hpp"
#include "pgbandit/sim.hpp"

namespace pgbandit {

// ------------------------------------------------------------- generators

namespace fuzz {

inline std::size_t uniform_index(RandomStream& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

inline double log_uniform(RandomStream& rng, double lo, double hi) {
    return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

struct Problem {
    BanditInstance instance;
    GapProfile gaps;
    std::uint64_t n;
    AnalysisParams params;
};

/// Random Bernoulli instance with 2..max_k arms, 1..k-1 tied optimal arms,
/// and a horizon n in [k, 10^6]. Means are multiples of 1/64 so ties are exact.
inline Problem random_problem(RandomStream& rng, std::size_t max_k = 8) {
    const std::size_t k = uniform_index(rng, 2, max_k);
    const std::size_t k_star = uniform_index(rng, 1, k - 1);
    const int top = static_cast<int>(uniform_index(rng, 8, 64));
    std::vector<double> mu(k);
    for (std::size_t a = 0; a < k; ++a) {
        if (a < k_star) {
            mu[a] = top / 64.0;
        } else {
            const int below = static_cast<int>(uniform_index(rng, 0, static_cast<std::size_t>(top - 1)));
            mu[a] = below / 64.0;
        }
    }
    // Shuffle so user order differs from sorted order.
    for (std::size_t i = k - 1; i > 0; --i) std::swap(mu[i], mu[uniform_index(rng, 0, i)]);
    BanditInstance inst(mu, RewardFamily::Bernoulli);
    GapProfile gaps = gap_profile(inst);
    const auto n = static_cast<std::uint64_t>(std::max<double>(static_cast<double>(k), log_uniform(rng, 2.0, 1e6)));
    const AnalysisParams params = make_analysis_params(gaps, n);
    return {std::move(inst), std::move(gaps), n, params};
}

inline std::vector<double> random_logits(RandomStream& rng, std::size_t k, double scale) {
    std::vector<double> theta(k);
    for (auto& x : theta) x = scale * (2.0 * rng.uniform() - 1.0);
    return theta;
}

inline void centre(std::vector<double>& theta) {
    double mean = 0.0;
    for (double x : theta) mean += x;
    mean /= static_cast<double>(theta.size());
    for (double& x : theta) x -= mean;
}

/// Zero-sum logits inside the good event, mixing interior points with
/// states at the edges (margin near -1, minimum logit near -L, large θ*).
inline std::vector<double> random_in_event_state(RandomStream& rng, const GapProfile& gaps,
                                                 const AnalysisParams& p) {
    const std::size_t k = gaps.k();
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<double> theta(k);
        const double mode = rng.uniform();
        if (mode < 0.5) {
            theta = random_logits(rng, k, log_uniform(rng, 1e-3, p.log_term));
        } else if (mode < 0.75) {
            // Suboptimal logits near the floor, optimal ones carry the mass.
            for (std::size_t a = 0; a < k; ++a)
                theta[a] = gaps.is_optimal(a) ? rng.uniform() * p.log_term
                                              : -p.log_term * (1.0 - 0.05 * rng.uniform());
        } else {
            theta = random_logits(rng, k, log_uniform(rng, 1e-2, 3.0));
        }
        double max_sub = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < k; ++a)
            if (!gaps.is_optimal(a)) max_sub = std::max(max_sub, theta[a]);
        const bool tight = rng.uniform() < 0.3;
        for (std::size_t a = 0; a < k; ++a) {
            if (!gaps.is_optimal(a)) continue;
            const double floor = max_sub - 1.0 + (tight ? 1e-9 : 0.0);
            if (theta[a] < floor) theta[a] = tight ? floor : floor + rng.uniform() * (max_sub + 1.0 - floor);
        }
        centre(theta);
        if (g_event(theta, gaps, p)) return theta;
    }
    throw Error(ErrorCode::InvalidArgument, "could not sample an in-event state");
}

}  // namespace fuzz

// ------------------------------------------------------------------ checks

struct IdentityStats {
    std::uint64_t states = 0;
    double max_identity_error = 0.0;
    std::uint64_t second_moment_violations = 0;
};

/// E[D] by enumeration vs η π* R, and E[D²] ≤ η² π*(1-π*), on random states.
inline IdentityStats check_one_step_identities(std::uint64_t states, std::uint64_t seed) {
    RandomStream rng(seed);
    IdentityStats s;
    for (std::uint64_t i = 0; i < states; ++i) {
        const auto prob = fuzz::random_problem(rng);
        const auto theta = [&] {
            auto t = fuzz::random_logits(rng, prob.gaps.k(), fuzz::log_uniform(rng, 1e-3, 10.0));
            fuzz::centre(t);
            return t;
        }();
        const double eta = fuzz::log_uniform(rng, 1e-6, 0.5);
        const DriftReport r = one_step_drift(prob.instance, theta, eta, prob.gaps, prob.params);
        s.max_identity_error =
            std::max(s.max_identity_error, std::abs(r.expected_increment - r.closed_form_increment));
        if (!r.second_moment_ok) ++s.second_moment_violations;
        ++s.states;
    }
    return s;
}

struct DriftStats {
    std::uint64_t states = 0;
    std::uint64_t failures = 0;          // E[Δψ] < η R / 2 - 1e-12
    std::uint64_t psi_prime_failures = 0;  // E[Δψ] < η ψ' π* R / 2 - 1e-12
    // E[Δψ] / (η R / 2) over states where η R / 2 ≥ 1e-9, so rounding cannot dominate.
    double min_ratio = std::numeric_limits<double>::infinity();
};

/// Potential drift on random in-event states at the theorem learning rate.
inline DriftStats check_drift_inequality(std::uint64_t states, std::uint64_t seed) {
    RandomStream rng(seed);
    DriftStats s;
    for (std::uint64_t i = 0; i < states; ++i) {
        const auto prob = fuzz::random_problem(rng);
        const auto theta = fuzz::random_in_event_state(rng, prob.gaps, prob.params);
        const double eta = theorem_learning_rate(prob.gaps, prob.n, prob.gaps.k());
        const DriftReport r = one_step_drift(prob.instance, theta, eta, prob.gaps, prob.params);
        if (!r.regret_drift_ok) ++s.failures;
        if (!r.drift_ok) ++s.psi_prime_failures;
        if (r.regret_lower_bound >= 1e-9)
            s.min_ratio = std::min(s.min_ratio, r.expected_psi_increment / r.regret_lower_bound);
        ++s.states;
    }
    return s;
}

struct Lemma3Stats {
    std::uint64_t states = 0;
    std::uint64_t failures = 0;
    double min_slack = std::numeric_limits<double>::infinity();  // bound - 1/π*
};

inline Lemma3Stats check_lemma3_fuzz(std::uint64_t states, std::uint64_t seed) {
    RandomStream rng(seed);
    Lemma3Stats s;
    for (std::uint64_t i = 0; i < states; ++i) {
        const auto prob = fuzz::random_problem(rng);
        const auto theta = fuzz::random_in_event_state(rng, prob.gaps, prob.params);
        const CheckRecord r = lemma3_check(theta, prob.gaps, prob.params);
        if (!r.pass()) ++s.failures;
        s.min_slack = std::min(s.min_slack, r.bound - r.inv_pi_star);
        ++s.states;
    }
    return s;
}

struct PsiStats {
    std::uint64_t points = 0;
    double max_rel_error = 0.0;        // central difference vs ψ'
    std::uint64_t concavity_failures = 0;  // ψ'' < -ψ'
};

/// Finite-difference consistency of ψ and ψ' (h = 1e-5) and ψ'' ≥ -ψ' on a grid over [-k*, k L].
inline PsiStats check_psi_consistency(const AnalysisParams& p, std::uint64_t points = 1000) {
    PsiStats s;
    const double lo = -static_cast<double>(p.k_star);
    const double hi = static_cast<double>(p.k) * p.log_term;
    const double h = 1e-5;
    const double h2 = 1e-3;
    for (std::uint64_t i = 0; i < points; ++i) {
        const double u = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const double fd = (psi_increment(u, h, p) - psi_increment(u, -h, p)) / (2.0 * h);
        const double exact = psi_prime(u, p);
        s.max_rel_error = std::max(s.max_rel_error, std::abs(fd - exact) / std::abs(exact));
        const double second = (psi_increment(u, h2, p) + psi_increment(u, -h2, p)) / (h2 * h2);
        if (second < -exact - 1e-6 * exact) ++s.concavity_failures;
        ++s.points;
    }
    return s;
}

// ------------------------------------------------------------------- suite

struct VerifyOptions {
    std::uint64_t fuzz_states = 10000;
    std::uint64_t lemma3_fuzz_states = 100000;
    std::uint64_t fuzz_seed = 0x5EED;
    std::uint64_t determinism_runs = 64;
    unsigned threads = 0;
};

inline std::vector<CheckRow> run_verify_suite(const BanditInstance& instance, std::uint64_t n, std::uint64_t m,
                                              std::uint64_t base_seed, const RecordingOptions& recording,
                                              const VerifyOptions& opts = {}) {
    std::vector<CheckRow> rows;
    auto add = [&](std::string name, bool deterministic, double value, double threshold, bool pass) {
        rows.push_back({std::move(name), deterministic, value, threshold, pass});
    };
    const LearningRateSpec rate = LearningRateSpec::theorem_auto();
    const BatchResult batch = run_batch(instance, rate, n, base_seed, m, recording, opts.threads);
    const auto& agg = batch.aggregate;

    add("conservation_max_abs_sum", true, agg.max_abs_logit_sum, 1e-9, agg.max_abs_logit_sum <= 1e-9);
    add("theta_star_increment_violations", true, static_cast<double>(agg.increment_violations), 0,
        agg.increment_violations == 0);
    add("lemma3_batch_failures", true, static_cast<double>(agg.lemma3_failures), 0, agg.lemma3_failures == 0);

    const IdentityStats ids = check_one_step_identities(opts.fuzz_states, opts.fuzz_seed);
    add("one_step_mean_identity_max_error", true, ids.max_identity_error, kExactTolerance,
        ids.max_identity_error <= kExactTolerance);
    add("one_step_second_moment_violations", true, static_cast<double>(ids.second_moment_violations), 0,
        ids.second_moment_violations == 0);

    const DriftStats drift = check_drift_inequality(opts.fuzz_states, opts.fuzz_seed + 1);
    add("drift_regret_failures", true, static_cast<double>(drift.failures), 0, drift.failures == 0);
    add("drift_psi_prime_failures", true, static_cast<double>(drift.psi_prime_failures), 0,
        drift.psi_prime_failures == 0);

    const Lemma3Stats l3 = check_lemma3_fuzz(opts.lemma3_fuzz_states, opts.fuzz_seed + 2);
    add("lemma3_fuzz_failures", true, static_cast<double>(l3.failures), 0, l3.failures == 0);

    const PsiStats ps = check_psi_consistency(batch.params);
    add("psi_finite_difference_max_rel_error", true, ps.max_rel_error, 1e-6, ps.max_rel_error <= 1e-6);
    add("psi_concavity_failures", true, static_cast<double>(ps.concavity_failures), 0, ps.concavity_failures == 0);

    const std::uint64_t det_runs = std::min<std::uint64_t>(opts.determinism_runs, m);
    const auto serial = batch_csv_string(run_batch(instance, rate, n, base_seed, det_runs, recording, 1));
    const auto parallel = batch_csv_string(run_batch(instance, rate, n, base_seed, det_runs, recording, 4));
    add("serial_parallel_identical", true, serial == parallel ? 1.0 : 0.0, 1.0, serial == parallel);

    for (EventKind e : {EventKind::MinLogitBreach, EventKind::PairMarginBreach}) {
        const FrequencyEstimate f = event_frequency(batch, e);
        add(std::string(to_string(e)) + "_wilson_lo", false, f.interval.lo, f.ceiling, f.pass);
    }

    const BatchSummary summary = summarize_batch(batch);
    const double shape_limit = 10.0 * summary.bounds.refined_bound_shape;
    add("mean_regret_below_10x_bound_shape", false, summary.bounds.empirical_mean_regret, shape_limit,
        summary.bounds.empirical_mean_regret < shape_limit);
    add("fraction_second_half_smaller", false, summary.fraction_second_half_smaller, 0.95,
        summary.fraction_second_half_smaller >= 0.95);
    return rows;
}

inline bool all_pass(const std::vector<CheckRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

}  // namespace pgbandit
