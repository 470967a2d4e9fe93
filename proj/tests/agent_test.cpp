#include "pgbandit/agent.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "pgbandit/diagnostics.hpp"

namespace {

using namespace pgbandit;

GapProfile equal_half_gaps() { return gap_profile(BanditInstance({0.9, 0.4})); }

TEST(InitAgent, ZeroLogits)
{
	const auto s = init_agent(3, LearningRateSpec::constant(0.1));
	EXPECT_EQ(s.theta, (std::vector<double>{0.0, 0.0, 0.0}));
	EXPECT_EQ(s.round, 1u);
}

TEST(InitAgent, ConstantRateEveryRound)
{
	auto s = init_agent(2, LearningRateSpec::constant(0.01));
	for (int i = 0; i < 10; ++i) {
		EXPECT_EQ(s.current_rate(), 0.01);
		s = pg_update(std::move(s), 0, 1.0);
	}
}

TEST(InitAgent, RejectsSingleArm)
{
	EXPECT_THROW(init_agent(1, LearningRateSpec::constant(0.1)), Error);
}

TEST(InitAgent, TheoremAutoNeedsContext)
{
	EXPECT_THROW(init_agent(2, LearningRateSpec::theorem_auto()), Error);
}

TEST(PgUpdate, TwoArmStep)
{
	auto s = init_agent(2, LearningRateSpec::constant(0.1));
	s = pg_update(std::move(s), 0, 1.0);
	EXPECT_NEAR(s.theta[0], 0.05, 1e-16);
	EXPECT_NEAR(s.theta[1], -0.05, 1e-16);
	EXPECT_EQ(s.round, 2u);
}

TEST(PgUpdate, ThreeArmHalfReward)
{
	auto s = init_agent(3, LearningRateSpec::constant(0.3));
	s = pg_update(std::move(s), 1, 0.5);
	EXPECT_NEAR(s.theta[0], -0.05, 1e-16);
	EXPECT_NEAR(s.theta[1], 0.10, 1e-16);
	EXPECT_NEAR(s.theta[2], -0.05, 1e-16);
	EXPECT_NEAR(s.theta[0] + s.theta[1] + s.theta[2], 0.0, 1e-16);
}

TEST(PgUpdate, ZeroRewardIsNoOp)
{
	auto s = init_agent(4, LearningRateSpec::constant(0.2));
	s.theta = {0.3, -0.1, 0.5, -0.7};
	const auto before = s.theta;
	s = pg_update(std::move(s), 2, 0.0);
	EXPECT_EQ(s.theta, before);
}

TEST(PgUpdate, RejectsBadInputs)
{
	auto s = init_agent(2, LearningRateSpec::constant(0.1));
	EXPECT_THROW(pg_update(s, 2, 0.5), Error);
	EXPECT_THROW(pg_update(s, 0, 1.5), Error);
	EXPECT_THROW(pg_update(s, 0, -0.1), Error);
}

// Conservation drift |Σθ| ≤ n k 2^-50 and increments bounded by η Y.
TEST(PgUpdate, ConservationAndBoundedIncrements)
{
	RandomStream rng(17);
	const std::size_t k = 6;
	const double eta = 0.05;
	auto s = init_agent(k, LearningRateSpec::constant(eta));
	const int steps = 20000;
	for (int t = 0; t < steps; ++t) {
		const auto action = static_cast<std::size_t>(rng.uniform() * k);
		const double y = rng.uniform();
		const auto before = s.theta;
		s = pg_update(std::move(s), action, y);
		for (std::size_t a = 0; a < k; ++a)
			ASSERT_LE(std::abs(s.theta[a] - before[a]), eta * y + 1e-17);
	}
	const double sum = std::accumulate(s.theta.begin(), s.theta.end(), 0.0);
	EXPECT_LE(std::abs(sum), steps * static_cast<double>(k) * std::ldexp(1.0, -50));
}

// Relabelling arms commutes with the update.
TEST(PgUpdate, PermutationEquivariant)
{
	RandomStream rng(23);
	for (int trial = 0; trial < 500; ++trial) {
		std::vector<double> theta(5);
		for (auto& x : theta)
			x = 4.0 * rng.uniform() - 2.0;
		const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
		std::vector<double> permuted(5);
		for (std::size_t i = 0; i < 5; ++i)
			permuted[i] = theta[perm[i]];
		const std::size_t action_index = static_cast<std::size_t>(rng.uniform() * 5);
		const double y = rng.uniform();

		auto a = init_agent(5, LearningRateSpec::constant(0.2));
		a.theta = theta;
		a = pg_update(std::move(a), perm[action_index], y);
		auto b = init_agent(5, LearningRateSpec::constant(0.2));
		b.theta = permuted;
		b = pg_update(std::move(b), action_index, y);
		for (std::size_t i = 0; i < 5; ++i)
			ASSERT_NEAR(b.theta[i], a.theta[perm[i]], 1e-15);
	}
}

// 0.25 / (120 * 0.5 * ln 2000), 40-digit reference.
TEST(TheoremRate, Value)
{
	EXPECT_NEAR(theorem_learning_rate(equal_half_gaps(), 1000, 2), 5.481805205164661718e-4, 1e-18);
}

TEST(TheoremRate, Scaling)
{
	const auto a = gap_profile(BanditInstance({0.9, 0.7, 0.5}));  // Δmin 0.2, Δmax 0.4
	const auto b = gap_profile(BanditInstance({0.9, 0.7, 0.1}));  // Δmin 0.2, Δmax 0.8
	EXPECT_NEAR(theorem_learning_rate(b, 5000, 3), theorem_learning_rate(a, 5000, 3) / 2.0, 1e-18);

	for (double d : {0.1, 0.3, 0.7}) {
		const auto g = gap_profile(BanditInstance({1.0, 1.0 - d}));
		EXPECT_NEAR(theorem_learning_rate(g, 1000, 2), d / (120.0 * std::log(2000.0)), 1e-17);
	}
}

TEST(TheoremRate, RejectsDegenerateHorizon)
{
	EXPECT_THROW(theorem_learning_rate(equal_half_gaps(), 0, 1), Error);
}

// 0.25 / (20 ln(4e9)), 40-digit reference.
TEST(Lemma2Rate, Value)
{
	EXPECT_NEAR(lemma2_learning_rate(equal_half_gaps(), 1000, 1.0 / (4.0 * 1000.0)), 5.653662889727335141e-4, 1e-18);
}

TEST(Lemma2Rate, Monotone)
{
	const auto g = equal_half_gaps();
	EXPECT_GT(lemma2_learning_rate(g, 1000, 0.01), lemma2_learning_rate(g, 2000, 0.01));
	EXPECT_LT(lemma2_learning_rate(g, 1000, 0.01), lemma2_learning_rate(g, 1000, 0.1));
	EXPECT_THROW(lemma2_learning_rate(g, 1000, 0.0), Error);
	EXPECT_THROW(lemma2_learning_rate(g, 1000, 1.0), Error);
}

// With δ = 1/(k² n) and n ≥ k the theorem rate satisfies the lemma-2 condition.
TEST(Lemma2Rate, DominatesTheoremRate)
{
	for (std::size_t k : {2, 3, 5, 10, 50}) {
		std::vector<double> mu(k, 0.2);
		mu[0] = 0.9;
		const auto g = gap_profile(BanditInstance(mu));
		for (std::uint64_t n : {std::uint64_t(k), std::uint64_t(100), std::uint64_t(100000)}) {
			if (n < k)
				continue;
			const double delta = default_delta(k, n);
			EXPECT_GE(lemma2_learning_rate(g, n, delta), theorem_learning_rate(g, n, k)) << k << " " << n;
		}
	}
}

TEST(ResolveRate, Constant)
{
	EXPECT_EQ(resolve_rate(LearningRateSpec::constant(0.01), 500), 0.01);
}

TEST(ResolveRate, ScheduleBreakpoints)
{
	const auto spec = LearningRateSpec::schedule({{1, 1e-4}, {5000, 1e-3}});
	EXPECT_EQ(resolve_rate(spec, 1), 1e-4);
	EXPECT_EQ(resolve_rate(spec, 4999), 1e-4);
	EXPECT_EQ(resolve_rate(spec, 5000), 1e-3);
	EXPECT_EQ(resolve_rate(spec, 90000), 1e-3);
}

TEST(ResolveRate, ScheduleValidation)
{
	EXPECT_THROW(LearningRateSpec::schedule({}), Error);
	EXPECT_THROW(LearningRateSpec::schedule({{2, 1e-3}}), Error);
	EXPECT_THROW(LearningRateSpec::schedule({{1, 1e-3}, {10, 1e-4}}), Error);
	EXPECT_THROW(LearningRateSpec::schedule({{1, 1e-3}, {1, 1e-2}}), Error);
	EXPECT_THROW(LearningRateSpec::constant(0.0), Error);
	EXPECT_THROW(LearningRateSpec::constant(-1.0), Error);
}

TEST(ResolveRate, TheoremAuto)
{
	EXPECT_NEAR(resolve_rate(LearningRateSpec::theorem_auto(), 1, equal_half_gaps(), 1000), 5.481805205164661718e-4,
	            1e-18);
	EXPECT_THROW(resolve_rate(LearningRateSpec::theorem_auto(), 1), Error);
}

}  // namespace
