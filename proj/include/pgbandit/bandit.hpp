#pragma once
/*
Stochastic k-armed bandit instances, gap structure and softmax policies.

Arms are indexed 0..k-1 in the user's order throughout the C++ API. The
gap structure is computed in descending-mean ("sorted") order and carries
the permutation back to user order; every per-arm vector in GapProfile is
also available in user order so that diagnostics can consume logits in the
order the agent keeps them.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgbandit/error.hpp"
#include "pgbandit/rng.hpp"

namespace pgbandit {

enum class RewardFamily { Bernoulli, PointMass, ClippedUniform };

constexpr std::string_view to_string(RewardFamily family) {
    switch (family) {
        case RewardFamily::Bernoulli: return "bernoulli";
        case RewardFamily::PointMass: return "point_mass";
        case RewardFamily::ClippedUniform: return "clipped_uniform";
    }
    return "unknown";
}

inline RewardFamily parse_reward_family(std::string_view name) {
    if (name == "bernoulli") return RewardFamily::Bernoulli;
    if (name == "point_mass") return RewardFamily::PointMass;
    if (name == "clipped_uniform") return RewardFamily::ClippedUniform;
    throw Error(ErrorCode::InvalidArgument, "unknown reward distribution '" + std::string(name) + "'");
}

/// Reward law of one arm. Every family has support in [0,1] and mean exactly `mean`.
///
/// ClippedUniform draws uniformly on [mean - w, mean + w] with
/// w = min(half_width, mean, 1 - mean), so the interval never leaves [0,1]
/// and the mean is preserved.
struct RewardDist {
    RewardFamily family = RewardFamily::Bernoulli;
    double mean = 0.0;
    double half_width = 0.0;

    double effective_half_width() const {
        return std::min({half_width, mean, 1.0 - mean});
    }

    bool has_finite_support() const { return family != RewardFamily::ClippedUniform; }

    /// (value, probability) pairs; only for finite-support families.
    std::vector<std::pair<double, double>> support() const {
        switch (family) {
            case RewardFamily::PointMass:
                return {{mean, 1.0}};
            case RewardFamily::Bernoulli: {
                std::vector<std::pair<double, double>> out;
                if (mean < 1.0) out.emplace_back(0.0, 1.0 - mean);
                if (mean > 0.0) out.emplace_back(1.0, mean);
                return out;
            }
            case RewardFamily::ClippedUniform:
                break;
        }
        throw Error(ErrorCode::UnsupportedDistribution,
                    "clipped_uniform rewards have no finite support");
    }
};

class BanditInstance {
public:
    BanditInstance(std::vector<double> means, RewardFamily family = RewardFamily::Bernoulli,
                   double half_width = 0.0)
        : means_(std::move(means)), family_(family), half_width_(half_width) {
        if (means_.size() < 2)
            throw Error(ErrorCode::InvalidArgument, "a bandit needs at least two arms");
        for (double mu : means_) {
            if (!(mu >= 0.0 && mu <= 1.0))
                throw Error(ErrorCode::InvalidArgument, "arm means must lie in [0,1]");
        }
        if (family_ == RewardFamily::ClippedUniform && !(half_width_ >= 0.0))
            throw Error(ErrorCode::InvalidArgument, "half_width must be nonnegative");
        const auto [lo, hi] = std::minmax_element(means_.begin(), means_.end());
        if (*lo == *hi)
            throw Error(ErrorCode::AllArmsOptimal, "at least one arm must be strictly suboptimal");
    }

    std::size_t k() const { return means_.size(); }
    const std::vector<double>& means() const { return means_; }
    double mean(std::size_t arm) const { return means_.at(arm); }
    RewardFamily family() const { return family_; }
    double half_width() const { return half_width_; }

    RewardDist dist(std::size_t arm) const { return {family_, means_.at(arm), half_width_}; }

private:
    std::vector<double> means_;
    RewardFamily family_;
    double half_width_;
};

/// Gap structure Δ_a = μ_1 - μ_a. `delta` is in sorted order, `delta_by_arm`
/// and `optimal` in user order; sort_perm[i] is the user arm at sorted rank i.
struct GapProfile {
    std::vector<std::size_t> sort_perm;
    std::vector<double> delta;
    std::vector<double> delta_by_arm;
    std::vector<char> optimal;
    std::size_t k_star = 0;
    double delta_min = 0.0;
    double delta_max = 0.0;

    std::size_t k() const { return delta.size(); }
    bool is_optimal(std::size_t arm) const { return optimal[arm] != 0; }
};

// Ties count as optimal only on exact equality with the maximum mean.
inline GapProfile gap_profile(const BanditInstance& instance) {
    const auto& mu = instance.means();
    const std::size_t k = mu.size();
    GapProfile g;
    g.sort_perm.resize(k);
    std::iota(g.sort_perm.begin(), g.sort_perm.end(), std::size_t{0});
    std::stable_sort(g.sort_perm.begin(), g.sort_perm.end(),
                     [&](std::size_t a, std::size_t b) { return mu[a] > mu[b]; });
    const double best = mu[g.sort_perm.front()];
    if (best == mu[g.sort_perm.back()])
        throw Error(ErrorCode::AllArmsOptimal, "at least one arm must be strictly suboptimal");

    g.delta.resize(k);
    g.delta_by_arm.resize(k);
    g.optimal.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t arm = g.sort_perm[i];
        const double d = best - mu[arm];
        g.delta[i] = d;
        g.delta_by_arm[arm] = d;
        if (mu[arm] == best) {
            g.optimal[arm] = 1;
            ++g.k_star;
        }
    }
    g.delta_min = g.delta[g.k_star];
    g.delta_max = g.delta.back();
    return g;
}

class PolicyVector {
public:
    PolicyVector() = default;

    /// Validating constructor for externally supplied probabilities.
    static PolicyVector checked(std::vector<double> probs) {
        if (probs.empty()) throw Error(ErrorCode::InvalidPolicy, "empty policy");
        double sum = 0.0;
        for (double p : probs) {
            if (!(p > 0.0) || !std::isfinite(p))
                throw Error(ErrorCode::InvalidPolicy, "policy entries must be strictly positive");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw Error(ErrorCode::InvalidPolicy, "policy entries must sum to 1");
        return PolicyVector(std::move(probs));
    }

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t a) const { return probs_[a]; }
    const std::vector<double>& probs() const { return probs_; }
    std::span<const double> view() const { return probs_; }

private:
    explicit PolicyVector(std::vector<double> probs) : probs_(std::move(probs)) {}
    friend PolicyVector softmax(std::span<const double>);

    std::vector<double> probs_;
};

/// Max-stabilized softmax written into `out` (resized to theta.size()).
inline void softmax_into(std::span<const double> theta, std::vector<double>& out) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : theta) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteLogit, "logits must be finite");
        m = std::max(m, x);
    }
    out.resize(theta.size());
    double z = 0.0;
    for (std::size_t a = 0; a < theta.size(); ++a) {
        out[a] = std::exp(theta[a] - m);
        z += out[a];
    }
    for (double& p : out) p /= z;
}

inline PolicyVector softmax(std::span<const double> theta) {
    PolicyVector pi;
    softmax_into(theta, pi.probs_);
    return pi;
}

/// Inverse-CDF draw over the stored order from a single uniform.
inline std::size_t sample_action(std::span<const double> probs, double u) {
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        if (probs[a] <= 0.0) continue;
        cum += probs[a];
        last_positive = a;
        if (u < cum) return a;
    }
    return last_positive;  // u landed in the rounding slack above the cumulative sum
}

inline std::size_t sample_action(const PolicyVector& policy, RandomStream& rng) {
    return sample_action(policy.view(), rng.uniform());
}

inline double sample_reward(const RewardDist& dist, RandomStream& rng) {
    switch (dist.family) {
        case RewardFamily::PointMass:
            return dist.mean;
        case RewardFamily::Bernoulli:
            return rng.uniform() < dist.mean ? 1.0 : 0.0;
        case RewardFamily::ClippedUniform: {
            const double w = dist.effective_half_width();
            const double y = dist.mean - w + 2.0 * w * rng.uniform();
            return std::clamp(y, 0.0, 1.0);
        }
    }
    return dist.mean;
}

inline double sample_reward(const BanditInstance& instance, std::size_t action, RandomStream& rng) {
    if (action >= instance.k()) throw Error(ErrorCode::InvalidArgument, "action out of range");
    return sample_reward(instance.dist(action), rng);
}

/// R = <π, Δ> with both in user order.
inline double instantaneous_regret(std::span<const double> probs, const GapProfile& gaps) {
    if (probs.size() != gaps.k())
        throw Error(ErrorCode::DimensionMismatch, "policy and gap profile differ in arm count");
    double r = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) r += probs[a] * gaps.delta_by_arm[a];
    return r;
}

inline double instantaneous_regret(const PolicyVector& policy, const GapProfile& gaps) {
    return instantaneous_regret(policy.view(), gaps);
}

}  // namespace pgbandit
