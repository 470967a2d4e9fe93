#include "pgbandit/bandit.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"

namespace {

using namespace pgbandit;

TEST(GapProfile, TiedOptimalArms)
{
	const auto g = gap_profile(BanditInstance({0.9, 0.9, 0.4, 0.1}));
	EXPECT_EQ(g.k_star, 2u);
	const std::vector<double> expected{0.0, 0.0, 0.5, 0.8};
	for (std::size_t i = 0; i < 4; ++i)
		EXPECT_NEAR(g.delta[i], expected[i], 1e-15);
	EXPECT_NEAR(g.delta_min, 0.5, 1e-15);
	EXPECT_NEAR(g.delta_max, 0.8, 1e-15);
}

TEST(GapProfile, UnsortedMeans)
{
	const auto g = gap_profile(BanditInstance({0.4, 0.9}));
	EXPECT_EQ(g.sort_perm, (std::vector<std::size_t>{1, 0}));
	EXPECT_EQ(g.k_star, 1u);
	EXPECT_DOUBLE_EQ(g.delta_min, 0.5);
	EXPECT_DOUBLE_EQ(g.delta_max, 0.5);
	EXPECT_TRUE(g.is_optimal(1));
	EXPECT_FALSE(g.is_optimal(0));
	EXPECT_DOUBLE_EQ(g.delta_by_arm[0], 0.5);
}

TEST(GapProfile, AllArmsOptimalRejected)
{
	try {
		BanditInstance({0.5, 0.5});
		FAIL() << "expected AllArmsOptimal";
	} catch (const Error& e) {
		EXPECT_EQ(e.code(), ErrorCode::AllArmsOptimal);
	}
}

TEST(GapProfile, InvalidMeansRejected)
{
	EXPECT_THROW(BanditInstance({0.5, 1.2}), Error);
	EXPECT_THROW(BanditInstance({0.5}), Error);
}

// Permuting μ leaves k*, Δmin, Δmax and sorted Δ unchanged.
TEST(GapProfile, PermutationInvariant)
{
	RandomStream rng(11);
	for (int trial = 0; trial < 200; ++trial) {
		std::vector<double> mu(5);
		for (auto& x : mu)
			x = std::floor(rng.uniform() * 8.0) / 8.0;
		if (*std::max_element(mu.begin(), mu.end()) == *std::min_element(mu.begin(), mu.end()))
			continue;
		const auto base = gap_profile(BanditInstance(mu));
		std::vector<double> shuffled = mu;
		for (std::size_t i = shuffled.size() - 1; i > 0; --i)
			std::swap(shuffled[i], shuffled[static_cast<std::size_t>(rng.uniform() * (i + 1))]);
		const auto other = gap_profile(BanditInstance(shuffled));
		EXPECT_EQ(base.k_star, other.k_star);
		EXPECT_EQ(base.delta, other.delta);
		EXPECT_EQ(base.delta_min, other.delta_min);
		EXPECT_EQ(base.delta_max, other.delta_max);
	}
}

TEST(Softmax, Symmetric)
{
	const auto pi = softmax(std::vector<double>{0.0, 0.0});
	EXPECT_DOUBLE_EQ(pi[0], 0.5);
	EXPECT_DOUBLE_EQ(pi[1], 0.5);
}

TEST(Softmax, ShiftedEqualLogits)
{
	const auto pi = softmax(std::vector<double>{5.0, 5.0, 5.0});
	for (std::size_t a = 0; a < 3; ++a)
		EXPECT_NEAR(pi[a], 1.0 / 3.0, 1e-15);
}

// e/(e+1) evaluated with 40-digit arithmetic (mpmath).
TEST(Softmax, TwoArmValue)
{
	const auto pi = softmax(std::vector<double>{1.0, 0.0});
	EXPECT_NEAR(pi[0], 0.7310585786300048792, 1e-15);
	EXPECT_NEAR(pi[1], 0.2689414213699951207, 1e-15);
}

TEST(Softmax, RejectsNonFinite)
{
	try {
		softmax(std::vector<double>{0.0, NAN});
		FAIL();
	} catch (const Error& e) {
		EXPECT_EQ(e.code(), ErrorCode::NonFiniteLogit);
	}
	EXPECT_THROW(softmax(std::vector<double>{INFINITY, 0.0}), Error);
}

TEST(Softmax, LargeLogitsDoNotOverflow)
{
	const auto pi = softmax(std::vector<double>{1000.0, 999.0});
	EXPECT_NEAR(pi[0], 0.7310585786300048792, 1e-15);
}

// Sum-to-one, positivity and shift invariance on random logits. Shifts are
// small integers and logits dyadic so that θ + c is exact; the result is
// then bitwise identical.
TEST(Softmax, Properties)
{
	RandomStream rng(3);
	for (int trial = 0; trial < 2000; ++trial) {
		const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform() * 9);
		std::vector<double> theta(k);
		for (auto& x : theta)
			x = std::ldexp(std::floor((rng.uniform() - 0.5) * 4096.0), -8);
		const auto pi = softmax(theta);
		double sum = 0.0;
		for (std::size_t a = 0; a < k; ++a) {
			ASSERT_GT(pi[a], 0.0);
			sum += pi[a];
		}
		ASSERT_NEAR(sum, 1.0, 1e-12);

		const double c = std::floor((rng.uniform() - 0.5) * 64.0);
		std::vector<double> shifted = theta;
		for (auto& x : shifted)
			x += c;
		ASSERT_EQ(softmax(shifted).probs(), pi.probs());
	}
}

TEST(PolicyVector, CheckedRejectsZeroEntries)
{
	EXPECT_THROW(PolicyVector::checked({1.0, 0.0}), Error);
	EXPECT_THROW(PolicyVector::checked({0.5, 0.6}), Error);
	EXPECT_NO_THROW(PolicyVector::checked({0.999999, 1e-6}));
}

TEST(SampleAction, InverseCdf)
{
	const auto pi = PolicyVector::checked({0.999999, 1e-6});
	EXPECT_EQ(sample_action(pi.view(), 0.0), 0u);
	EXPECT_EQ(sample_action(pi.view(), 0.9999989), 0u);
	EXPECT_EQ(sample_action(pi.view(), 0.9999995), 1u);
	// Rounding slack above the cumulative sum falls on the last positive arm.
	EXPECT_EQ(sample_action(std::vector<double>{0.5, 0.5 - 1e-16}, 0.99999999999999999), 1u);
}

// 4-sigma binomial band: sqrt(0.25 * 0.75 / 1e6) * 4 = 0.00173 < 0.002.
TEST(SampleAction, UniformFrequencies)
{
	const auto pi = PolicyVector::checked({0.25, 0.25, 0.25, 0.25});
	RandomStream rng(2024);
	std::array<int, 4> counts{};
	const int draws = 1000000;
	for (int i = 0; i < draws; ++i)
		++counts[sample_action(pi, rng)];
	for (int c : counts)
		EXPECT_NEAR(static_cast<double>(c) / draws, 0.25, 0.002);
}

TEST(SampleAction, DeterministicForSeed)
{
	const auto pi = PolicyVector::checked({0.2, 0.3, 0.5});
	RandomStream a(99), b(99);
	for (int i = 0; i < 1000; ++i)
		ASSERT_EQ(sample_action(pi, a), sample_action(pi, b));
}

TEST(SampleReward, PointMass)
{
	const BanditInstance inst({0.7, 0.2}, RewardFamily::PointMass);
	RandomStream rng(1);
	for (int i = 0; i < 100; ++i)
		ASSERT_EQ(sample_reward(inst, 0, rng), 0.7);
}

// 4-sigma: 4 * sqrt(0.09 / 1e5) = 0.0038.
TEST(SampleReward, BernoulliMean)
{
	const BanditInstance inst({0.9, 0.2});
	RandomStream rng(5);
	double sum = 0.0;
	const int draws = 100000;
	for (int i = 0; i < draws; ++i) {
		const double y = sample_reward(inst, 0, rng);
		ASSERT_TRUE(y == 0.0 || y == 1.0);
		sum += y;
	}
	EXPECT_NEAR(sum / draws, 0.9, 0.004);
}

// Uniform[0,1]: 4 * sqrt((1/12) / 1e5) = 0.0037.
TEST(SampleReward, ClippedUniformMean)
{
	const BanditInstance inst({0.5, 0.2}, RewardFamily::ClippedUniform, 0.5);
	RandomStream rng(6);
	double sum = 0.0;
	const int draws = 100000;
	for (int i = 0; i < draws; ++i) {
		const double y = sample_reward(inst, 0, rng);
		ASSERT_GE(y, 0.0);
		ASSERT_LE(y, 1.0);
		sum += y;
	}
	EXPECT_NEAR(sum / draws, 0.5, 0.004);
}

TEST(SampleReward, ClippedUniformKeepsMeanNearBoundary)
{
	const BanditInstance inst({0.9, 0.2}, RewardFamily::ClippedUniform, 0.5);
	EXPECT_DOUBLE_EQ(inst.dist(0).effective_half_width(), 1.0 - 0.9);
	RandomStream rng(8);
	double sum = 0.0;
	for (int i = 0; i < 100000; ++i)
		sum += sample_reward(inst, 0, rng);
	EXPECT_NEAR(sum / 100000, 0.9, 0.002);
}

TEST(InstantaneousRegret, DotProduct)
{
	const auto two = gap_profile(BanditInstance({1.0, 0.5}));
	EXPECT_DOUBLE_EQ(instantaneous_regret(PolicyVector::checked({0.5, 0.5}), two), 0.25);

	const auto three = gap_profile(BanditInstance({0.9, 0.4, 0.1}));
	EXPECT_NEAR(instantaneous_regret(PolicyVector::checked({0.2, 0.3, 0.5}), three), 0.55, 1e-15);
}

TEST(InstantaneousRegret, ZeroOnOptimalSupport)
{
	const auto g = gap_profile(BanditInstance({0.9, 0.9, 0.1}));
	EXPECT_EQ(instantaneous_regret(std::vector<double>{0.3, 0.7, 0.0}, g), 0.0);
}

TEST(InstantaneousRegret, MonotoneInSuboptimalMass)
{
	const auto g = gap_profile(BanditInstance({0.9, 0.4, 0.1}));
	double prev = -1.0;
	for (int i = 0; i <= 10; ++i) {
		const double moved = 0.05 * i;
		const double r = instantaneous_regret(std::vector<double>{0.6 - moved, 0.2 + moved, 0.2}, g);
		EXPECT_GT(r, prev);
		prev = r;
	}
}

TEST(InstantaneousRegret, DimensionMismatch)
{
	const auto g = gap_profile(BanditInstance({0.9, 0.4, 0.1}));
	try {
		instantaneous_regret(std::vector<double>{0.5, 0.5}, g);
		FAIL();
	} catch (const Error& e) {
		EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
	}
}

}  // namespace
