#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ionize3d/free_dynamics.hpp"
#include "ionize3d/quadrature.hpp"

using namespace ionize3d;
using std::numbers::pi;

namespace {

const double kAlpha = -1.0 / (4.0 * pi);

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

template <class F>
cplx laplace_numeric(F&& f, cplx p)
{
	return quad::half_line([&](double t) { return std::exp(-p * t) * f(t); }, 1e-13).value;
}

} // namespace

TEST(BoundState, RejectsNonNegativeCoupling)
{
	EXPECT_THROW(BoundState(0.0), Error);
	EXPECT_THROW(BoundState(0.3), Error);
}

TEST(BoundState, EvalExamples)
{
	BoundState s(kAlpha);
	EXPECT_NEAR(bound_state_eval(s, 1.0), std::sqrt(1.0 / (2.0 * pi)) * std::exp(-1.0), 1e-15);
	EXPECT_NEAR(bound_state_eval(s, 1.0), 0.146762, 1e-6);
	double prev = bound_state_eval(s, 0.5);
	for (double r = 1.0; r < 60.0; r += 1.0) {
		double v = bound_state_eval(s, r);
		EXPECT_LT(v, prev);
		prev = v;
	}
	EXPECT_LT(bound_state_eval(s, 60.0), 1e-20);
	EXPECT_THROW(bound_state_eval(s, 0.0), Error);
}

TEST(BoundState, NormalizedByQuadrature)
{
	for (double a : {kAlpha, -1.0 / pi, -0.013}) {
		BoundState s(a);
		auto f = [&](double r) {
			if (r == 0.0) return cplx{4.0 * pi * 2.0 * -a, 0.0};
			return cplx{4.0 * pi * std::pow(r * bound_state_eval(s, r), 2), 0.0};
		};
		auto res = quad::half_line(f, 1e-14);
		EXPECT_NEAR(res.value.real(), 1.0, 1e-10) << a;
	}
}

TEST(BoundState, Charge)
{
	EXPECT_NEAR(bound_state_charge(BoundState(kAlpha)), std::sqrt(8.0 * pi), 1e-14);
	EXPECT_NEAR(bound_state_charge(BoundState(kAlpha)), 5.013257, 1e-6);
	EXPECT_NEAR(bound_state_charge(BoundState(-1.0 / pi)), 4.0 * pi * std::sqrt(2.0 / pi), 1e-13);
	EXPECT_NEAR(bound_state_charge(BoundState(-1.0 / pi)), 10.0265, 1e-4);
	for (double a : {-0.01, -0.2, -3.0})
		EXPECT_NEAR(bound_state_charge(BoundState(a)) / std::sqrt(-a), 4.0 * pi * std::sqrt(2.0), 1e-12);
}

TEST(FreeKernel, OriginAndModulus)
{
	const cplx expect = std::pow(4.0 * pi, -1.5) * std::polar(1.0, -0.75 * pi);
	EXPECT_LT(rel(free_kernel(1.0, 0.0), expect), 1e-15);
	for (double t : {0.01, 1.0, 30.0})
		for (double r : {0.0, 0.5, 7.0})
			EXPECT_NEAR(std::abs(free_kernel(t, r)), std::pow(4.0 * pi * t, -1.5), 1e-14 * std::pow(4.0 * pi * t, -1.5));
	EXPECT_THROW(free_kernel(0.0, 1.0), Error);
}

TEST(FreeKernel, PropagatesGaussian)
{
	// (U0(t) G)(0) = 4 pi int r^2 K(t, r) G(r) dr against the exact Gaussian spreading
	GaussianState g{1.0};
	for (double t : {0.3, 1.0}) {
		auto f = [&](double r) { return 4.0 * pi * r * r * free_kernel(t, r) * g.value(r); };
		cplx num = quad::gauss_composite<20>(f, 0.0, 14.0, 400);
		EXPECT_LT(std::abs(num - g.evolved(0.0, t)), 1e-8) << t;
	}
}

TEST(Forcing, MatchesFrozenQuadrature)
{
	// contour-rotated mpmath quadrature, alpha = -1/(4 pi)
	const std::pair<double, cplx> ref[] = {
		{0.1, {0.20003016696494972534, -0.43602682431981325639}},
		{1.0, {-0.0066407195972711213047, -0.067270641823165770878}},
		{10.0, {-0.0020832580810516215101, -0.0027837272703317087469}},
		{100.0, {-0.000078355056636197956566, -0.00008074029701899427705}},
	};
	BoundState s(kAlpha);
	for (const auto& [t, v] : ref) EXPECT_LT(rel(forcing_amplitude(s, t), v), 1e-12) << t;
}

TEST(Forcing, MatchesRotatedQuadratureAcrossScales)
{
	for (double a : {kAlpha, -0.3}) {
		BoundState s(a);
		for (double t : {1e-4, 0.1, 0.7, 3.0, 20.0, 400.0}) {
			auto q = forcing_amplitude_quadrature(s, t);
			EXPECT_LT(rel(forcing_amplitude(s, t), q.value), 1e-9) << a << " " << t;
		}
	}
}

TEST(Forcing, ContinuousAtAsymptoticSwitch)
{
	BoundState s(kAlpha);
	const double t_switch = 49.0; // |beta sqrt(i t)| = 7 for beta = 1
	EXPECT_LT(rel(forcing_amplitude(s, t_switch * (1 - 1e-15)), forcing_amplitude(s, t_switch * (1 + 1e-15))), 1e-13);
	EXPECT_LT(rel(forcing_amplitude(s, t_switch * 1.01), forcing_amplitude_quadrature(s, t_switch * 1.01).value), 1e-10);
}

TEST(Forcing, SingularAndRegularParts)
{
	BoundState s(kAlpha);
	for (double t : {1e-6, 1e-3, 0.5, 150.0})
		EXPECT_LT(std::abs(forcing_singular_coeff(s) / std::sqrt(t) + forcing_regular(s, t) - forcing_amplitude(s, t)),
		          1e-12 * std::abs(forcing_amplitude(s, t)));
	EXPECT_NEAR(std::abs(forcing_regular(s, 0.0) + s.beta() * s.amplitude()), 0.0, 1e-15);
	EXPECT_THROW(forcing_amplitude(s, 0.0), Error);
}

TEST(Forcing, LongTimeDecayIsThreeHalves)
{
	BoundState s(kAlpha);
	double c2 = std::abs(forcing_amplitude(s, 1e2)) * std::pow(1e2, 1.5);
	double c3 = std::abs(forcing_amplitude(s, 1e3)) * std::pow(1e3, 1.5);
	double c4 = std::abs(forcing_amplitude(s, 1e4)) * std::pow(1e4, 1.5);
	EXPECT_LT(std::abs(c4 - c3), std::abs(c3 - c2));
	EXPECT_LT(std::abs(c4 - c3) / c4, 2e-3);
	// against the rotated quadrature at the far end
	EXPECT_LT(rel(forcing_amplitude(s, 1e4), forcing_amplitude_quadrature(s, 1e4).value), 1e-8);
}

TEST(VolterraRhs, MatchesFrozenErfc)
{
	const std::pair<double, cplx> ref[] = {
		{0.0, {5.0132565492620010048, 0.0}},
		{0.3, {3.0844257673510363374, -1.0907773932042431155}},
		{2.0, {1.5277608828538605697, -1.0438549556257255169}},
		{40.0, {0.32002400454446324811, -0.3121366608924624985}},
	};
	BoundState s(kAlpha);
	for (const auto& [t, v] : ref) EXPECT_LT(rel(volterra_rhs(s, t), v), 1e-13) << t;
	EXPECT_NEAR(volterra_rhs(s, 0.0).real(), bound_state_charge(s), 1e-14);
}

TEST(VolterraRhs, IsAbelConvolutionOfForcing)
{
	// 4 sqrt(pi i) int_0^t F(tau) (t - tau)^{-1/2} dtau, the t^{-1/2} part exactly
	BoundState s(kAlpha);
	const cplx c = 4.0 * std::sqrt(pi) * std::polar(1.0, 0.25 * pi);
	for (double t : {0.3, 2.0, 9.0}) {
		// u = sqrt(t - tau) removes the kernel singularity
		auto f = [&](double u) { return 2.0 * forcing_regular(s, t - u * u); };
		cplx conv = quad::finite(f, 0.0, std::sqrt(t), 1e-14).value + pi * forcing_singular_coeff(s);
		EXPECT_LT(rel(c * conv, volterra_rhs(s, t)), 1e-10) << t;
	}
}

TEST(FTilde, MatchesFrozenClosedForm)
{
	const std::pair<cplx, cplx> ref[] = {
		{{0.5, 0.0}, {4.0106052394096008039, -2.0053026197048004019}},
		{{1.0, 0.0}, {2.5066282746310005024, -1.0382794271800315522}},
		{{2.0, 0.0}, {1.5039769647786003014, -0.50132565492620010048}},
		{{1.0, 2.0}, {0.49005619462686441107, -1.2603181884243722036}},
	};
	for (const auto& [p, v] : ref) EXPECT_LT(rel(f_tilde(p, kAlpha), v), 1e-14);
	EXPECT_THROW(f_tilde(0.0, kAlpha), Error);
}

TEST(FTilde, SimplifiedEqualsStatedForm)
{
	std::mt19937 rng(3);
	std::uniform_real_distribution<double> re(0.2, 3.0), im(-4.0, 4.0);
	for (int i = 0; i < 20; ++i) {
		cplx p{re(rng), im(rng)};
		for (double a : {kAlpha, -0.05})
			EXPECT_LT(rel(f_tilde(p, a), f_tilde_unsimplified(p, a)), 1e-12);
	}
}

TEST(FTilde, LaplaceOfTimeDomainRhs)
{
	BoundState s(kAlpha);
	std::mt19937 rng(5);
	std::uniform_real_distribution<double> re(0.2, 3.0), im(-3.0, 3.0);
	std::vector<cplx> ps{{0.5, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
	for (int i = 0; i < 20; ++i) ps.emplace_back(re(rng), im(rng));
	for (cplx p : ps) {
		cplx num = laplace_numeric([&](double t) { return volterra_rhs(s, t); }, p);
		EXPECT_LT(rel(num, f_tilde(p, kAlpha)), 1e-6) << p;
	}
}

TEST(FTilde, DecaysAlongRealAxis)
{
	double prev = std::abs(f_tilde(1.0, kAlpha));
	for (double p = 10.0; p < 1e7; p *= 10.0) {
		double v = std::abs(f_tilde(p, kAlpha));
		EXPECT_LT(v, prev);
		prev = v;
	}
	EXPECT_LT(prev, 1e-5);
}

TEST(OverlapZ1, NormalizedAndBounded)
{
	BoundState s(kAlpha);
	EXPECT_LT(std::abs(overlap_Z1(s, 0.0) - 1.0), 1e-15);
	for (double t = 0.0; t < 2000.0; t = t * 1.3 + 0.01) EXPECT_LE(std::abs(overlap_Z1(s, t)), 1.0 + 1e-14) << t;
}

TEST(OverlapZ1, MatchesFrozenAndRuntimeQuadrature)
{
	const std::pair<double, cplx> ref[] = {
		{0.5, {0.19945535574887703553, -0.26152110702003978189}},
		{5.0, {-0.012391328429873976764, -0.04069089685034254492}},
		{50.0, {-0.0010561180502830671982, -0.0011905894352560009739}},
	};
	BoundState s(kAlpha);
	for (const auto& [t, v] : ref) EXPECT_LT(rel(overlap_Z1(s, t), v), 1e-12) << t;
	for (double t : {0.0, 0.01, 0.3, 4.0, 35.0, 36.0, 37.0, 300.0})
		EXPECT_LT(std::abs(overlap_Z1(s, t) - overlap_Z1_quadrature(s, t).value), 1e-10) << t;
}

TEST(OverlapZ1, ThreeHalvesEnvelope)
{
	BoundState s(kAlpha);
	double lo = 1e300, hi = 0.0;
	for (double t = 10.0; t <= 1000.0; t *= 1.1) {
		double c = std::abs(overlap_Z1(s, t)) * std::pow(t, 1.5);
		lo = std::min(lo, c);
		hi = std::max(hi, c);
	}
	EXPECT_LT(hi / lo, 1.5);
	EXPECT_LT(hi, 1.0);
}

TEST(Z2Tilde, ClosesSurvivalIdentityForStationaryState)
{
	// theta~ = Z1~ + Z2~ q~ with theta = e^{i t}, q = sqrt(8 pi) e^{i t}
	BoundState s(kAlpha);
	for (cplx p : {cplx{1.0, 0.0}, cplx{2.0, 0.5}, cplx{0.6, -1.0}}) {
		cplx z1 = laplace_numeric([&](double t) { return overlap_Z1(s, t); }, p);
		cplx qt = std::sqrt(8.0 * pi) / (p - cplx{0.0, 1.0});
		cplx theta = 1.0 / (p - cplx{0.0, 1.0});
		EXPECT_LT(rel(z1 + z2_tilde(p, kAlpha) * qt, theta), 1e-8) << p;
	}
}

TEST(Z2Tilde, NonvanishingAndDecaying)
{
	for (double re = 0.0; re <= 2.0; re += 0.1)
		for (double im = -5.0; im <= 5.0; im += 0.25) {
			if (re == 0.0 && im == 0.0) continue;
			double v = std::abs(z2_tilde(cplx{re, im}, kAlpha));
			EXPECT_GT(v, 1e-3);
			EXPECT_TRUE(std::isfinite(v));
		}
	const double amp = std::sqrt(2.0 / (4.0 * pi));
	EXPECT_NEAR(std::abs(z2_tilde(1e10, kAlpha)) * std::sqrt(1e10) / amp, 1.0, 1e-4);
}

TEST(FreeEvolvedBoundState, MatchesFrozenQuadrature)
{
	const std::tuple<double, double, cplx> ref[] = {
		{1.0, 1.0, {0.0050621317609743289664, -0.064158557782018174654}},
		{0.3, 2.0, {-0.0026248385291614288276, -0.0088472784437144340388}},
		{3.0, 0.5, {-0.028948194107128972074, 0.092725180390003512395}},
	};
	BoundState s(kAlpha);
	for (const auto& [r, t, v] : ref) EXPECT_LT(rel(free_evolved_bound_state_scaled(s, r, t), v), 1e-12);
}

TEST(FreeEvolvedBoundState, Limits)
{
	BoundState s(kAlpha);
	// small t: back to r phi(r)
	for (double r : {0.5, 2.0}) EXPECT_LT(std::abs(free_evolved_bound_state(s, r, 1e-9) - bound_state_eval(s, r)), 1e-4);
	// small r: value at the origin is the forcing
	for (double t : {0.2, 3.0}) EXPECT_LT(rel(free_evolved_bound_state(s, 1e-6, t), forcing_amplitude(s, t)), 1e-5);
}

TEST(ForcingGeneral, GaussianAgainstClosedForm)
{
	GaussianState g{0.8};
	auto prof = g.profile();
	for (double t : {0.05, 1.0, 4.0}) EXPECT_LT(std::abs(forcing_general(prof, t) - g.evolved(0.0, t)), 1e-8) << t;
	EXPECT_LT(std::abs(forcing_general(prof, 1e-7) - g.value(0.0)), 1e-5);
	EXPECT_EQ(forcing_general(prof, 0.0), cplx(g.value(0.0), 0.0));
}

TEST(ForcingGeneral, GaussianIsNormalized)
{
	GaussianState g{1.7};
	auto f = [&](double r) { return cplx{4.0 * pi * r * r * g.value(r) * g.value(r), 0.0}; };
	EXPECT_NEAR(quad::half_line(f).value.real(), 1.0, 1e-12);
}
