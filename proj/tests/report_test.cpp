#include "pgbandit/report.hpp"

#include <cstdlib>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

namespace {

using namespace pgbandit;

double as_real(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

std::string first_non_comment_line(const std::string& text)
{
	std::istringstream is(text);
	std::string line;
	while (std::getline(is, line))
		if (line.rfind("#", 0) != 0)
			return line;
	return {};
}

TEST(Csv, ExactHeaders)
{
	const BanditInstance inst({0.9, 0.4});
	const auto traj = run_episode(inst, LearningRateSpec::constant(0.05), 100, 1);
	std::ostringstream t;
	write_trajectory_csv(t, traj);
	EXPECT_EQ(first_non_comment_line(t.str()),
	          "t,action,reward,pi_star,theta_star,inst_regret,cum_expected_regret,cum_pseudo_regret,min_logit,"
	          "pair_margin,g_event");

	const auto batch = run_batch(inst, LearningRateSpec::constant(0.05), 100, 1, 3);
	std::ostringstream b;
	write_batch_csv(b, batch);
	EXPECT_EQ(first_non_comment_line(b.str()),
	          "run_index,seed,final_pseudo_regret,final_expected_regret,min_min_logit,min_pair_margin,tau");

	std::ostringstream v;
	write_verify_csv(v, {{"x", true, 1.0, 2.0, true}}, {});
	EXPECT_EQ(v.str(), "check_name,kind,value,threshold,pass\nx,deterministic,1,2,1\n");
}

TEST(Csv, MetadataBlock)
{
	const BanditInstance inst({0.9, 0.4, 0.1});
	const auto traj = run_episode(inst, LearningRateSpec::theorem_auto(), 300, 1);
	std::ostringstream os;
	write_trajectory_csv(os, traj);
	std::istringstream is(os.str());
	const auto table = read_csv(is);
	auto find = [&](const std::string& key) {
		for (const auto& [k, v] : table.metadata)
			if (k == key)
				return v;
		return std::string("<missing>");
	};
	EXPECT_EQ(find("rng"), "xoshiro256**/splitmix64-seeded");
	EXPECT_EQ(find("log_base"), "natural");
	EXPECT_EQ(find("k"), "3");
	EXPECT_EQ(find("n"), "300");
	EXPECT_EQ(find("regime"), "theorem regime");
	EXPECT_EQ(as_real(find("delta")), 1.0 / 2700.0);
	EXPECT_EQ(as_real(find("eta")), theorem_learning_rate(gap_profile(inst), 300, 3));
	EXPECT_NE(find("artifact_version"), "<missing>");
}

TEST(Csv, ByteIdenticalAcrossRuns)
{
	const BanditInstance inst({0.9, 0.6, 0.3});
	auto render = [&] {
		const auto batch = run_batch(inst, LearningRateSpec::constant(0.05), 2000, 5, 16, {}, 4);
		std::ostringstream os;
		write_batch_csv(os, batch);
		write_summary_csv(os, batch, summarize_batch(batch));
		write_curve_csv(os, batch);
		return os.str();
	};
	EXPECT_EQ(render(), render());
}

// Re-reading the trajectory file reproduces the run summary exactly.
TEST(Csv, TrajectoryRoundTrip)
{
	const BanditInstance inst({0.8, 0.5, 0.2});
	const auto traj = run_episode(inst, LearningRateSpec::constant(0.2), 3000, 31);
	std::ostringstream os;
	write_trajectory_csv(os, traj);
	std::istringstream is(os.str());
	const auto table = read_csv(is);
	ASSERT_EQ(table.rows.size(), 3000u);
	const auto& last = table.rows.back();
	EXPECT_EQ(as_real(last[table.column("cum_pseudo_regret")]), traj.summary.final_pseudo_regret);
	EXPECT_EQ(as_real(last[table.column("cum_expected_regret")]), traj.summary.final_expected_regret);

	double min_margin = 1e300;
	std::uint64_t tau = 0;
	for (const auto& row : table.rows) {
		min_margin = std::min(min_margin, as_real(row[table.column("pair_margin")]));
		if (tau == 0 && row[table.column("g_event")] == "0")
			tau = std::stoull(row[table.column("t")]) - 1;
		const auto action = std::stoul(row[table.column("action")]);
		EXPECT_GE(action, 1u);
		EXPECT_LE(action, 3u);
	}
	EXPECT_EQ(min_margin, traj.summary.min_pair_margin);
	if (tau == 0)
		tau = 3000;
	EXPECT_EQ(tau, traj.summary.tau);
}

TEST(Csv, BatchRowMatchesEpisode)
{
	const BanditInstance inst({0.8, 0.5, 0.2});
	const auto rate = LearningRateSpec::constant(0.2);
	const auto batch = run_batch(inst, rate, 3000, 8, 3);
	std::istringstream is(batch_csv_string(batch));
	const auto table = read_csv(is);
	ASSERT_EQ(table.rows.size(), 3u);
	for (std::size_t i = 0; i < 3; ++i) {
		const auto traj = run_episode(inst, rate, 3000, derive_seed(8, i), {}, i);
		std::ostringstream os;
		write_trajectory_csv(os, traj);
		std::istringstream ts(os.str());
		const auto trows = read_csv(ts);
		const auto& row = table.rows[i];
		EXPECT_EQ(std::stoull(row[table.column("seed")]), derive_seed(8, i));
		EXPECT_EQ(as_real(row[table.column("final_pseudo_regret")]),
		          as_real(trows.rows.back()[trows.column("cum_pseudo_regret")]));
		EXPECT_EQ(as_real(row[table.column("final_expected_regret")]),
		          as_real(trows.rows.back()[trows.column("cum_expected_regret")]));
	}
}

TEST(Csv, SnapshotsIncludeFinalLogits)
{
	const BanditInstance inst({0.9, 0.4});
	const auto traj = run_episode(inst, LearningRateSpec::constant(0.05), 5000, 2);
	std::ostringstream os;
	write_snapshots_csv(os, traj);
	std::istringstream is(os.str());
	const auto table = read_csv(is);
	ASSERT_EQ(table.rows.size(), 1001u);
	EXPECT_EQ(table.rows.back()[0], "5001");
	EXPECT_EQ(as_real(table.rows.back()[1]), traj.final_theta[0]);
}

TEST(Summary, BoundRatios)
{
	const auto b = compare_bounds(10.0, 2, 10000, 0.01);
	EXPECT_NEAR(b.refined_bound_shape, 2.0 * std::log(10000.0) * std::log(2.0) / 0.01, 1e-9);
	EXPECT_NEAR(b.coarse_bound_shape, 4.0 * std::log(10000.0) / 0.01, 1e-9);
	EXPECT_NEAR(b.coarse_ratio, 10.0 / b.coarse_bound_shape, 1e-18);
}

TEST(Summary, Fields)
{
	const BanditInstance inst({0.9, 0.4});
	const auto batch = run_batch(inst, LearningRateSpec::theorem_auto(), 10000, 4, 20);
	const auto s = summarize_batch(batch);
	ASSERT_EQ(s.events.size(), 3u);
	EXPECT_EQ(s.aggregate.checkpoints.size(), 3u);
	EXPECT_GT(s.sublinearity_indicator, 0.0);
	EXPECT_LT(s.sublinearity_indicator, 1.0);
	EXPECT_GE(s.fraction_second_half_smaller, 0.0);
	EXPECT_LE(s.fraction_second_half_smaller, 1.0);
	std::ostringstream os;
	write_summary_csv(os, batch, s);
	std::istringstream is(os.str());
	const auto table = read_csv(is);
	EXPECT_EQ(table.header, (std::vector<std::string>{"metric", "value"}));
	bool found = false;
	for (const auto& row : table.rows)
		if (row[0] == "pseudo_regret_mean@10000") {
			found = true;
			EXPECT_EQ(as_real(row[1]), s.aggregate.checkpoints.back().pseudo.mean);
		}
	EXPECT_TRUE(found);
}

TEST(FmtReal, ShortestRoundTrip)
{
	EXPECT_EQ(fmt_real(0.1), "0.1");
	EXPECT_EQ(fmt_real(1.0), "1");
	for (double x : {1.0 / 3.0, 5.481805205164661718e-4, -2.5e-300})
		EXPECT_EQ(as_real(fmt_real(x)), x);
}

}  // namespace
