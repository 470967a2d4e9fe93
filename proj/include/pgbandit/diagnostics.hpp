#pragma once
/*
Checks for the quantities that drive the regret analysis of softmax policy
gradient.

Notation (user arm order, optimal set O = {a : Δ_a = 0}, k* = |O|):
    π*  = Σ_{a∈O} π_a            optimal mass
    θ*  = Σ_{a∈O} θ_a            optimal logit sum
    L   = ln(n/δ)                recurring log term, δ = 1/(k² n) by default
    G   = {min_c θ_c ≥ -L  and  θ_b ≥ θ_a - 1 for all b∈O, a∉O}
    ψ(u)  = 9 k L ln((u/k* + 1 + L) / (1 + L))
    ψ'(u) = 9 k L / (u + k* + k* L)

On G the optimal mass obeys 1/π* ≤ ψ'(θ*) and θ* ∈ [-k*, k L]; with
η ≤ Δmin/4 the potential has expected one-step increase at least
η ψ'(θ*) π* R / 2 ≥ η R / 2, where R = <π, Δ>.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pgbandit/agent.hpp"
#include "pgbandit/bandit.hpp"
#include "pgbandit/error.hpp"

namespace pgbandit {

inline constexpr double kExactTolerance = 1e-12;

struct AnalysisParams {
    std::uint64_t n = 0;
    double delta = 0.0;
    std::size_t k = 0;
    std::size_t k_star = 0;
    double log_term = 0.0;
};

inline double default_delta(std::size_t k, std::uint64_t n) {
    const double kd = static_cast<double>(k);
    return 1.0 / (kd * kd * static_cast<double>(n));
}

inline AnalysisParams make_analysis_params(const GapProfile& gaps, std::uint64_t n,
                                           std::optional<double> delta = std::nullopt) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    AnalysisParams p;
    p.n = n;
    p.k = gaps.k();
    p.k_star = gaps.k_star;
    p.delta = delta.value_or(default_delta(p.k, n));
    if (!(p.delta > 0.0 && p.delta < 1.0))
        throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,1)");
    p.log_term = std::log(static_cast<double>(n) / p.delta);
    if (!(p.log_term > 0.0)) throw Error(ErrorCode::InvalidArgument, "ln(n/delta) must be positive");
    return p;
}

inline void require_same_k(std::span<const double> v, const GapProfile& gaps) {
    if (v.size() != gaps.k())
        throw Error(ErrorCode::DimensionMismatch, "vector length differs from arm count");
}

inline double optimal_sum(std::span<const double> v, const GapProfile& gaps) {
    require_same_k(v, gaps);
    double s = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a)
        if (gaps.is_optimal(a)) s += v[a];
    return s;
}

inline double theta_star(std::span<const double> theta, const GapProfile& gaps) {
    return optimal_sum(theta, gaps);
}

inline double pi_star(std::span<const double> pi, const GapProfile& gaps) {
    return optimal_sum(pi, gaps);
}

inline bool check_conservation(std::span<const double> theta, double tolerance) {
    double s = 0.0;
    for (double x : theta) s += x;
    return std::abs(s) <= tolerance;
}

inline double min_logit(std::span<const double> theta) {
    return *std::min_element(theta.begin(), theta.end());
}

/// min over optimal b and suboptimal a of θ_b - θ_a.
inline double pair_margin(std::span<const double> theta, const GapProfile& gaps) {
    require_same_k(theta, gaps);
    double min_opt = std::numeric_limits<double>::infinity();
    double max_sub = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < theta.size(); ++a) {
        if (gaps.is_optimal(a))
            min_opt = std::min(min_opt, theta[a]);
        else
            max_sub = std::max(max_sub, theta[a]);
    }
    return min_opt - max_sub;
}

inline bool g_event_from(double min_logit_value, double pair_margin_value, const AnalysisParams& params) {
    return min_logit_value >= -params.log_term && pair_margin_value >= -1.0;
}

inline bool g_event(std::span<const double> theta, const GapProfile& gaps, const AnalysisParams& params) {
    return g_event_from(min_logit(theta), pair_margin(theta, gaps), params);
}

// ---------------------------------------------------------------- potential

inline double psi_pole(const AnalysisParams& p) {
    const double ks = static_cast<double>(p.k_star);
    return -ks * (1.0 + p.log_term);
}

inline double psi(double u, const AnalysisParams& p) {
    if (!(u > psi_pole(p))) throw Error(ErrorCode::DomainError, "psi argument below the log pole");
    const double ks = static_cast<double>(p.k_star);
    const double scale = 9.0 * static_cast<double>(p.k) * p.log_term;
    return scale * std::log1p(u / (ks * (1.0 + p.log_term)));
}

inline double psi_prime(double u, const AnalysisParams& p) {
    if (!(u > psi_pole(p))) throw Error(ErrorCode::DomainError, "psi_prime argument at or below the pole");
    const double ks = static_cast<double>(p.k_star);
    return 9.0 * static_cast<double>(p.k) * p.log_term / (u + ks + ks * p.log_term);
}

/// ψ(u + d) - ψ(u) without the cancellation of subtracting two large values.
inline double psi_increment(double u, double d, const AnalysisParams& p) {
    if (!(u > psi_pole(p)) || !(u + d > psi_pole(p)))
        throw Error(ErrorCode::DomainError, "psi argument below the log pole");
    const double ks = static_cast<double>(p.k_star);
    const double scale = 9.0 * static_cast<double>(p.k) * p.log_term;
    return scale * std::log1p(d / (u + ks + ks * p.log_term));
}

// ------------------------------------------------------------ optimal mass

struct CheckRecord {
    double theta_star = 0.0;
    double pi_star = 0.0;
    double inv_pi_star = 0.0;
    double bound = 0.0;            // 9 k L / (θ* + k* + k* L)
    double theta_star_lo = 0.0;    // -k*
    double theta_star_hi = 0.0;    // k L
    bool theta_star_in_range = false;
    bool bound_holds = false;

    bool pass() const { return theta_star_in_range && bound_holds; }
};

inline CheckRecord lemma3_evaluate(double pi_star_value, double theta_star_value, const AnalysisParams& p) {
    CheckRecord r;
    r.theta_star = theta_star_value;
    r.pi_star = pi_star_value;
    r.inv_pi_star = 1.0 / pi_star_value;
    r.theta_star_lo = -static_cast<double>(p.k_star);
    r.theta_star_hi = static_cast<double>(p.k) * p.log_term;
    r.theta_star_in_range = theta_star_value >= r.theta_star_lo - kExactTolerance &&
                            theta_star_value <= r.theta_star_hi + kExactTolerance;
    if (theta_star_value > psi_pole(p)) {
        r.bound = psi_prime(theta_star_value, p);
        r.bound_holds = r.inv_pi_star <= r.bound;
    }
    return r;
}

/// Bound on 1/π* for an in-event state; throws PreconditionViolated off the event.
inline CheckRecord lemma3_check(std::span<const double> theta, const GapProfile& gaps, const AnalysisParams& p) {
    if (!g_event(theta, gaps, p))
        throw Error(ErrorCode::PreconditionViolated, "state lies outside the good event");
    const PolicyVector pi = softmax(theta);
    return lemma3_evaluate(pi_star(pi.view(), gaps), theta_star(theta, gaps), p);
}

// ------------------------------------------------------------------- drift

struct DriftReport {
    double pi_star = 0.0;
    double theta_star = 0.0;
    double inst_regret = 0.0;
    double eta = 0.0;

    double expected_increment = 0.0;       // E[D], by enumeration
    double closed_form_increment = 0.0;    // η π* R
    double second_moment = 0.0;            // E[D²], by enumeration
    double second_moment_bound = 0.0;      // η² π* (1 - π*)

    double psi_before = 0.0;
    double psi_expected_after = 0.0;
    double expected_psi_increment = 0.0;   // E[ψ(θ*')] - ψ(θ*), accumulated via log1p
    double drift_lower_bound = 0.0;        // η ψ'(θ*) π* R / 2
    double regret_lower_bound = 0.0;       // η R / 2

    bool in_event = false;
    bool rate_condition = false;           // η ≤ Δmin / 4

    bool identity_ok = false;
    bool second_moment_ok = false;
    // Only meaningful when in_event && rate_condition.
    bool drift_ok = false;
    bool regret_drift_ok = false;

    bool drift_applicable() const { return in_event && rate_condition; }
    bool pass() const {
        return identity_ok && second_moment_ok && (!drift_applicable() || (drift_ok && regret_drift_ok));
    }
};

/// Exact one-step moments of D = θ*_{t+1} - θ*_t by enumerating every
/// (action, reward) outcome of a finite-support instance.
inline DriftReport one_step_drift(const BanditInstance& instance, std::span<const double> theta, double eta,
                                  const GapProfile& gaps, const AnalysisParams& params) {
    if (instance.family() == RewardFamily::ClippedUniform)
        throw Error(ErrorCode::UnsupportedDistribution, "drift enumeration needs finite-support rewards");
    require_same_k(theta, gaps);
    if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");

    DriftReport r;
    r.eta = eta;
    const PolicyVector pi = softmax(theta);
    r.pi_star = pi_star(pi.view(), gaps);
    r.theta_star = theta_star(theta, gaps);
    r.inst_regret = instantaneous_regret(pi, gaps);
    r.in_event = g_event(theta, gaps, params);
    r.rate_condition = eta <= gaps.delta_min / 4.0;

    const bool psi_defined = r.theta_star > psi_pole(params) + static_cast<double>(gaps.k()) * eta;
    if (psi_defined) r.psi_before = psi(r.theta_star, params);

    std::vector<double> next(theta.begin(), theta.end());
    for (std::size_t action = 0; action < gaps.k(); ++action) {
        for (const auto& [y, py] : instance.dist(action).support()) {
            const double prob = pi[action] * py;
            std::copy(theta.begin(), theta.end(), next.begin());
            apply_pg_update(next, pi.view(), action, y, eta);
            double d = 0.0;
            for (std::size_t a = 0; a < gaps.k(); ++a)
                if (gaps.is_optimal(a)) d += next[a] - theta[a];
            r.expected_increment += prob * d;
            r.second_moment += prob * d * d;
            if (psi_defined) r.expected_psi_increment += prob * psi_increment(r.theta_star, d, params);
        }
    }

    r.closed_form_increment = eta * r.pi_star * r.inst_regret;
    r.second_moment_bound = eta * eta * r.pi_star * (1.0 - r.pi_star);
    r.identity_ok = std::abs(r.expected_increment - r.closed_form_increment) <= kExactTolerance;
    r.second_moment_ok = r.second_moment <= r.second_moment_bound + kExactTolerance;

    if (psi_defined) {
        r.psi_expected_after = r.psi_before + r.expected_psi_increment;
        r.drift_lower_bound = eta * psi_prime(r.theta_star, params) * r.pi_star * r.inst_regret / 2.0;
        r.regret_lower_bound = eta * r.inst_regret / 2.0;
        r.drift_ok = r.expected_psi_increment >= r.drift_lower_bound - kExactTolerance;
        r.regret_drift_ok = r.expected_psi_increment >= r.regret_lower_bound - kExactTolerance;
    }
    return r;
}

// ----------------------------------------------------------- stopping time

/// τ = min(n, first t with G_{t+1} false); flags[j] holds G_{j+1}.
inline std::uint64_t stopping_time(std::span<const char> flags, std::uint64_t n) {
    if (flags.size() < n) throw Error(ErrorCode::MissingFlags, "need a good-event flag for every round");
    for (std::uint64_t t = 1; t < n; ++t)
        if (!flags[t]) return t;
    return n;
}

// ------------------------------------------------------------ proportions

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

inline constexpr double kZ95 = 1.959963984540054;

inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95) {
    if (trials == 0) throw Error(ErrorCode::InvalidArgument, "empty sample");
    const double m = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / m;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / m;
    const double centre = (p + z2 / (2.0 * m)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m)) / denom;
    const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

}  // namespace pgbandit
