#pragma once
/*
Softmax policy gradient with a (possibly scheduled) learning rate.

Per round t the agent holds logits θ_t (θ_1 = 0), plays A_t ~ softmax(θ_t),
observes Y_t in [0,1] and updates every arm a by

    θ_{t+1,a} = θ_{t,a} + η_t (1{A_t = a} - π_{t,a}) Y_t.

π_t is recomputed from θ_t every round. The logits are never re-centred:
the update conserves Σ_a θ_a exactly in real arithmetic, and the
diagnostics check that the floating-point drift stays small.

All logarithms are natural logarithms.
*/

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pgbandit/bandit.hpp"
#include "pgbandit/error.hpp"

namespace pgbandit {

inline constexpr std::string_view kLogBase = "natural";

/// Largest rate admitted by the main regret theorem: Δmin² / (120 Δmax ln(n k)).
inline double theorem_learning_rate(const GapProfile& gaps, std::uint64_t n, std::size_t k) {
    const double nk = static_cast<double>(n) * static_cast<double>(k);
    if (!(nk > 1.0)) throw Error(ErrorCode::InvalidArgument, "theorem rate needs n*k > 1");
    return gaps.delta_min * gaps.delta_min / (120.0 * gaps.delta_max * std::log(nk));
}

/// Rate under which a single optimal/suboptimal logit margin stays above -1
/// with probability 1 - δ: Δmin² / (40 Δmax ln(n²/δ)).
inline double lemma2_learning_rate(const GapProfile& gaps, std::uint64_t n, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,1)");
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 2");
    const double nd = static_cast<double>(n);
    return gaps.delta_min * gaps.delta_min / (40.0 * gaps.delta_max * std::log(nd * nd / delta));
}

struct ConstantRate {
    double eta;
};

struct TheoremAutoRate {};

struct RateBreakpoint {
    std::uint64_t round;
    double eta;
};

/// Piecewise-constant, nondecreasing schedule; the first breakpoint must be round 1.
struct ScheduleRate {
    std::vector<RateBreakpoint> breakpoints;
};

class LearningRateSpec {
public:
    using Kind = std::variant<ConstantRate, TheoremAutoRate, ScheduleRate>;

    static LearningRateSpec constant(double eta) {
        if (!(eta > 0.0) || !std::isfinite(eta))
            throw Error(ErrorCode::InvalidArgument, "learning rate must be positive and finite");
        return LearningRateSpec(ConstantRate{eta});
    }

    static LearningRateSpec theorem_auto() { return LearningRateSpec(TheoremAutoRate{}); }

    static LearningRateSpec schedule(std::vector<RateBreakpoint> breakpoints) {
        if (breakpoints.empty() || breakpoints.front().round != 1)
            throw Error(ErrorCode::InvalidArgument, "schedule must start at round 1");
        for (std::size_t i = 0; i < breakpoints.size(); ++i) {
            const auto& bp = breakpoints[i];
            if (!(bp.eta > 0.0) || !std::isfinite(bp.eta))
                throw Error(ErrorCode::InvalidArgument, "schedule rates must be positive and finite");
            if (i > 0) {
                if (bp.round <= breakpoints[i - 1].round)
                    throw Error(ErrorCode::InvalidArgument, "schedule rounds must strictly increase");
                if (bp.eta < breakpoints[i - 1].eta)
                    throw Error(ErrorCode::InvalidArgument, "schedule rates must be nondecreasing");
            }
        }
        return LearningRateSpec(ScheduleRate{std::move(breakpoints)});
    }

    const Kind& kind() const { return kind_; }
    bool is_constant() const { return std::holds_alternative<ConstantRate>(kind_); }
    bool is_theorem_auto() const { return std::holds_alternative<TheoremAutoRate>(kind_); }
    bool is_schedule() const { return std::holds_alternative<ScheduleRate>(kind_); }

    std::string describe() const {
        if (const auto* c = std::get_if<ConstantRate>(&kind_)) return "constant(" + std::to_string(c->eta) + ")";
        if (is_theorem_auto()) return "theorem_auto";
        std::string s = "schedule[";
        for (const auto& bp : std::get<ScheduleRate>(kind_).breakpoints)
            s += "(" + std::to_string(bp.round) + "," + std::to_string(bp.eta) + ")";
        return s + "]";
    }

private:
    explicit LearningRateSpec(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

/// What theorem_auto needs to resolve.
struct RateContext {
    GapProfile gaps;
    std::uint64_t horizon;
};

inline double resolve_rate(const LearningRateSpec& spec, std::uint64_t round,
                           const RateContext* context = nullptr) {
    return std::visit(
        [&](const auto& kind) -> double {
            using T = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<T, ConstantRate>) {
                return kind.eta;
            } else if constexpr (std::is_same_v<T, TheoremAutoRate>) {
                if (context == nullptr)
                    throw Error(ErrorCode::InvalidArgument, "theorem_auto rate needs gaps and horizon");
                return theorem_learning_rate(context->gaps, context->horizon, context->gaps.k());
            } else {
                double eta = kind.breakpoints.front().eta;
                for (const auto& bp : kind.breakpoints) {
                    if (bp.round > round) break;
                    eta = bp.eta;
                }
                return eta;
            }
        },
        spec.kind());
}

inline double resolve_rate(const LearningRateSpec& spec, std::uint64_t round,
                           const GapProfile& gaps, std::uint64_t horizon) {
    const RateContext ctx{gaps, horizon};
    return resolve_rate(spec, round, &ctx);
}

/// Logits, the current round and the rate specification. θ starts at zero, round at 1.
struct AgentState {
    std::vector<double> theta;
    std::uint64_t round = 1;
    LearningRateSpec rate = LearningRateSpec::theorem_auto();
    std::optional<RateContext> context;

    std::size_t k() const { return theta.size(); }

    double current_rate() const {
        return resolve_rate(rate, round, context ? &*context : nullptr);
    }
};

inline AgentState init_agent(std::size_t k, LearningRateSpec rate,
                             std::optional<RateContext> context = std::nullopt) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least two arms");
    if (rate.is_theorem_auto() && !context)
        throw Error(ErrorCode::InvalidArgument, "theorem_auto rate needs gaps and horizon");
    AgentState s;
    s.theta.assign(k, 0.0);
    s.rate = std::move(rate);
    s.context = std::move(context);
    return s;
}

/// In-place update with a caller-supplied policy π = softmax(θ) and rate η.
inline void apply_pg_update(std::span<double> theta, std::span<const double> pi,
                            std::size_t action, double reward, double eta) {
    const double step = eta * reward;
    for (std::size_t a = 0; a < theta.size(); ++a) {
        const double indicator = (a == action) ? 1.0 : 0.0;
        theta[a] += step * (indicator - pi[a]);
    }
}

inline void validate_step(std::size_t k, std::size_t action, double reward) {
    if (action >= k) throw Error(ErrorCode::InvalidArgument, "action out of range");
    if (!(reward >= 0.0 && reward <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "reward must lie in [0,1]");
}

inline AgentState pg_update(AgentState state, std::size_t action, double reward) {
    validate_step(state.k(), action, reward);
    const double eta = state.current_rate();
    const PolicyVector pi = softmax(state.theta);
    apply_pg_update(state.theta, pi.view(), action, reward, eta);
    ++state.round;
    return state;
}

}  // namespace pgbandit
