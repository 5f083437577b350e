#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ionize3d/observables.hpp"

using namespace ionize3d;
using std::numbers::pi;

namespace {

const double kAlpha = -1.0 / (4.0 * pi);

FourierAlpha driven() { return FourierAlpha::from_positive(3.0, kAlpha - 0.1, {cplx{0.05, 0.0}}); }

ChargeTrajectory stationary(double h, double T)
{
	return solve_charge_bound_state(FourierAlpha::constant(kAlpha, 1.0), BoundState(kAlpha), TimeGrid::covering(h, T));
}

} // namespace

TEST(Survival, StartsAtOne)
{
	auto tr = solve_charge_bound_state(driven(), BoundState(kAlpha), TimeGrid::covering(1e-3, 1.0));
	auto s = survival(tr, BoundState(kAlpha));
	EXPECT_LT(std::abs(s.theta[0] - 1.0), 1e-15);
	for (std::size_t j = 0; j < s.theta.size(); ++j)
		EXPECT_LT(std::abs(s.theta[j] - s.z1_part[j] - s.charge_part[j]), 1e-15);
}

TEST(Survival, StationaryPhase)
{
	auto tr = stationary(1e-3, 20.0);
	auto s = survival(tr, BoundState(kAlpha));
	for (std::size_t j = 0; j < s.theta.size(); j += 997) {
		const double t = tr.grid.t(j);
		EXPECT_LT(std::abs(std::abs(s.theta[j]) - 1.0), 1e-3) << t;
		EXPECT_LT(std::abs(s.theta[j] - std::exp(cplx{0.0, t})), 1e-3) << t;
	}
	EXPECT_FALSE(s.unitarity_flag);
}

TEST(Survival, BoundedByOne)
{
	auto tr = solve_charge_bound_state(driven(), BoundState(kAlpha), TimeGrid::covering(2e-3, 40.0));
	auto s = survival(tr, BoundState(kAlpha));
	EXPECT_LE(s.max_abs, 1.0 + 5e-3);
}

TEST(Survival, RefinementContracts)
{
	std::vector<cplx> at;
	for (double h : {4e-3, 2e-3, 1e-3}) {
		auto tr = solve_charge_bound_state(driven(), BoundState(kAlpha), TimeGrid::covering(h, 4.0));
		at.push_back(survival(tr, BoundState(kAlpha)).theta.back());
	}
	const double d1 = std::abs(at[0] - at[1]), d2 = std::abs(at[1] - at[2]);
	EXPECT_LT(d2, d1 / 1.5);
}

TEST(Wavefunction, InitialStateAtZeroTime)
{
	auto tr = stationary(1e-3, 1.0);
	for (double r : {0.1, 0.7, 2.5})
		EXPECT_LT(std::abs(wavefunction_at(tr, free_part(BoundState(kAlpha)), r, 0) - bound_state_eval(BoundState(kAlpha), r)),
		          1e-15);
}

TEST(Wavefunction, StationaryModulus)
{
	auto tr = stationary(1e-3, 5.0);
	const BoundState st(kAlpha);
	for (std::size_t j : {std::size_t{500}, std::size_t{2000}, std::size_t{5000}})
		for (double r : {0.05, 0.5, 1.5, 3.0}) {
			const cplx psi = wavefunction_at(tr, free_part(st), r, j);
			const double phi = bound_state_eval(st, r);
			EXPECT_LT(std::abs(std::abs(psi) - phi), 2e-3 * phi) << "t=" << tr.grid.t(j) << " r=" << r;
			EXPECT_LT(std::abs(psi - std::exp(cplx{0.0, tr.grid.t(j)}) * phi), 2e-3 * phi);
		}
}

TEST(Wavefunction, ChargeAtSmallRadius)
{
	auto tr = solve_charge_bound_state(driven(), BoundState(kAlpha), TimeGrid::covering(1e-3, 3.0));
	const auto free = free_part(BoundState(kAlpha));
	const std::size_t j = 2500;
	const double d2 = std::abs(4.0 * pi * wavefunction_scaled(tr, free, 1e-2, j) - tr.q[j]);
	const double d3 = std::abs(4.0 * pi * wavefunction_scaled(tr, free, 1e-3, j) - tr.q[j]);
	EXPECT_LT(d2, 50.0 * 1e-2);
	EXPECT_LT(d3, 50.0 * 1e-3);
	EXPECT_LT(d3, d2 / 4.0);
	EXPECT_LT(std::abs(wavefunction_scaled(tr, free, 0.0, j) - tr.q[j] / (4.0 * pi)), 1e-15);
}

TEST(Wavefunction, NearAndFarSplitAgree)
{
	// the same radius evaluated with two different near-zone lengths
	auto tr = solve_charge_bound_state(driven(), BoundState(kAlpha), TimeGrid::covering(1e-3, 6.0));
	std::vector<std::size_t> idx{3000, 6000};
	ChargeField a(tr, 0.6, idx), b(tr, 1.5, idx);
	auto ua = a.scaled_at(0.6), ub = b.scaled_at(0.6);
	for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_LT(std::abs(ua[i] - ub[i]), 1e-12 * (1.0 + std::abs(ub[i])));
}

TEST(Wavefunction, RejectsNonPositiveRadius)
{
	auto tr = stationary(1e-2, 1.0);
	EXPECT_THROW(wavefunction_at(tr, free_part(BoundState(kAlpha)), 0.0, 5), Error);
}

TEST(BallProbability, InitialValues)
{
	// 4 pi int_0^R r^2 phi^2 = 1 - e^{-2 beta R}; 30-digit values in tests/reference
	auto tr = stationary(1e-3, 1.0);
	BallOptions o;
	o.stride = 1000;
	auto b05 = ball_probability(tr, free_part(BoundState(kAlpha)), 0.5, o);
	auto b2 = ball_probability(tr, free_part(BoundState(kAlpha)), 2.0, o);
	EXPECT_NEAR(b05.prob[0], 0.63212055882855767840, 1e-13);
	EXPECT_NEAR(b2.prob[0], 0.98168436111126581971, 1e-13);
}

TEST(BallProbability, StationaryIsConstant)
{
	auto tr = stationary(1e-3, 10.0);
	BallOptions o;
	o.stride = 1000;
	auto b = ball_probability(tr, free_part(BoundState(kAlpha)), 1.0, o);
	for (double p : b.prob) EXPECT_NEAR(p, 1.0 - std::exp(-2.0), 2e-3);
	for (double c : b.time_average) EXPECT_NEAR(c, 1.0 - std::exp(-2.0), 2e-3);
}

TEST(BallProbability, NormConservedInLargeBall)
{
	auto tr = solve_charge_bound_state(driven(), BoundState(kAlpha), TimeGrid::covering(1e-3, 1.0));
	BallOptions o;
	o.stride = 500;
	auto b = ball_probability(tr, free_part(BoundState(kAlpha)), 20.0, o);
	for (double p : b.prob) {
		EXPECT_LE(p, 1.0 + 2e-3);
		EXPECT_GT(p, 1.0 - 2e-3);
	}
}

TEST(BallProbability, GaussianWithRepulsiveCouplingSpreads)
{
	GaussianState gs{1.0};
	const auto g = TimeGrid::covering(1e-2, 20.0);
	auto forcing = sample_forcing_general(gs.profile(), g);
	auto tr = solve_charge(FourierAlpha::constant(0.05, 1.0), forcing, g);
	BallOptions o;
	o.stride = 50;
	auto b = ball_probability(tr, free_part(gs), 2.0, o);
	// 4 pi int_0^2 r^2 |Psi_0|^2 for a unit Gaussian = erf(2) - (4/sqrt(pi)) e^{-4}
	EXPECT_NEAR(b.prob[0], std::erf(2.0) - 4.0 / std::sqrt(pi) * std::exp(-4.0), 1e-12);
	for (std::size_t i = 2; i < b.time_average.size(); ++i) EXPECT_LT(b.time_average[i], b.time_average[i - 1]);
}

TEST(BallProbability, RejectsBadArguments)
{
	auto tr = stationary(1e-2, 1.0);
	EXPECT_THROW(ball_probability(tr, free_part(BoundState(kAlpha)), 0.0), Error);
	BallOptions o;
	o.stride = 0;
	EXPECT_THROW(ball_probability(tr, free_part(BoundState(kAlpha)), 1.0, o), Error);
}

TEST(DecayFit, ExactPowerLaw)
{
	std::vector<double> t, v;
	for (int i = 0; i <= 400; ++i) {
		t.push_back(10.0 + 0.5 * i);
		v.push_back(3.0 * std::pow(t.back(), -1.5));
	}
	auto f = decay_fit(t, v, 50.0, 180.0);
	EXPECT_NEAR(f.exponent, -1.5, 1e-6);
	EXPECT_NEAR(f.amplitude, 3.0, 1e-6);
	EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
	EXPECT_LT(f.exponential_share, 1e-3);
}

TEST(DecayFit, ExponentialRemainderFadesWithWindow)
{
	std::vector<double> t, v;
	for (int i = 1; i <= 4000; ++i) {
		t.push_back(0.05 * i);
		v.push_back(std::pow(t.back(), -1.5) + 0.5 * std::exp(-t.back()));
	}
	double prev = 1e9;
	for (double t1 : {2.0, 5.0, 10.0, 20.0}) {
		auto f = decay_fit(t, v, t1, 4.0 * t1);
		const double gap = std::abs(f.exponent + 1.5);
		EXPECT_LT(gap, prev);
		prev = gap;
	}
	EXPECT_LT(prev, 1e-6);
	auto f = decay_fit(t, v, 2.0, 20.0);
	EXPECT_NEAR(f.composite_B, 1.0, 0.05);
}

TEST(DecayFit, NoisyWindowRejected)
{
	std::mt19937 rng(1);
	std::uniform_real_distribution<double> u(0.1, 10.0);
	std::vector<double> t, v;
	for (int i = 0; i < 100; ++i) {
		t.push_back(50.0 + i);
		v.push_back(u(rng));
	}
	try {
		decay_fit(t, v, 50.0, 150.0);
		FAIL();
	} catch (const Error& e) {
		EXPECT_EQ(e.code(), ErrorCode::WindowTooNoisy);
	}
}

TEST(DecayFit, RejectsShortOrNonPositiveWindows)
{
	std::vector<double> t{1, 2, 3}, v{1, 1, 1};
	EXPECT_THROW(decay_fit(t, v, 1.0, 3.0), Error);
	std::vector<double> t2, v2;
	for (int i = 1; i <= 40; ++i) {
		t2.push_back(i);
		v2.push_back(i == 20 ? 0.0 : 1.0 / i);
	}
	EXPECT_THROW(decay_fit(t2, v2, 1.0, 40.0), Error);
}
