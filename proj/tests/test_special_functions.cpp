#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "ionize3d/branch.hpp"
#include "ionize3d/faddeeva.hpp"

using ionize3d::cplx;
namespace fd = ionize3d::faddeeva;

namespace {

struct WCase {
	cplx z;
	cplx w;
};

// 30-digit mpmath values of exp(-z^2) erfc(-iz), tests/reference/make_reference.py
const WCase kFaddeeva[] = {
	{{0.5, 0.5}, {0.53315670791217491377, 0.23048823138445840871}},
	{{2.0, 1.0}, {0.1402395813662779437, 0.22221344017989910261}},
	{{-3.0, 0.2}, {0.015626770455552116737, -0.19966856321866610402}},
	{{1.0, -0.5}, {0.1555411424543310759, 1.1378372157816863777}},
	{{0.0, 9.0}, {0.062307724037774684147, 0.0}},
	{{10.0, 3.0}, {0.015721778699152371856, 0.051919876088306162618}},
	{{-4.5, 6.5}, {0.058801316013335495989, -0.040069916975316837262}},
	{{0.1, -0.1}, {1.1111214508575118788, 0.13432898444395126921}},
	{{7.9, 0.05}, {0.0004633080772864635307, 0.071999886722985501519}},
};

} // namespace

TEST(Faddeeva, MatchesReferenceValues)
{
	for (const auto& c : kFaddeeva) {
		cplx got = fd::w(c.z);
		EXPECT_LT(std::abs(got - c.w), 1e-13 * std::abs(c.w)) << "z = " << c.z;
	}
}

TEST(Faddeeva, ErfcxOfZeroIsOne) { EXPECT_NEAR(std::abs(fd::erfcx(0.0) - 1.0), 0.0, 1e-15); }

TEST(Faddeeva, RealAxisErfcxMatchesStd)
{
	for (double x : {0.0, 0.3, 1.0, 2.5, 5.0, 12.0}) {
		double ref = std::exp(x * x) * std::erfc(x);
		EXPECT_NEAR(fd::erfcx(x).real(), ref, 1e-14 * ref) << x;
		EXPECT_NEAR(fd::erfcx(x).imag(), 0.0, 1e-15);
	}
}

TEST(Faddeeva, ContinuousAcrossExpansionSwitch)
{
	// |z| = 8 separates the rational expansion from the continued fraction
	for (double ang = 0.05; ang < 3.1; ang += 0.3) {
		cplx in = std::polar(8.0 - 1e-14, ang), out = std::polar(8.0 + 1e-14, ang);
		EXPECT_LT(std::abs(fd::w(in) - fd::w(out)), 1e-13 * std::abs(fd::w(in)));
	}
}

TEST(Faddeeva, SymmetryConjugate)
{
	// w(-conj z) = conj w(z)
	std::mt19937 rng(7);
	std::uniform_real_distribution<double> u(-6.0, 6.0);
	for (int i = 0; i < 50; ++i) {
		cplx z{u(rng), std::abs(u(rng))};
		EXPECT_LT(std::abs(fd::w(-std::conj(z)) - std::conj(fd::w(z))), 1e-14 * std::abs(fd::w(z)));
	}
}

TEST(SqrtBranch, Examples)
{
	using ionize3d::sqrt_branch;
	EXPECT_EQ(sqrt_branch(1.0), cplx(1.0, 0.0));
	EXPECT_LT(std::abs(sqrt_branch(-1.0) - cplx(0.0, 1.0)), 1e-16);
	EXPECT_LT(std::abs(sqrt_branch(cplx(-1.0, -0.0)) - cplx(0.0, 1.0)), 1e-16);
	EXPECT_LT(std::abs(sqrt_branch(cplx(0.0, -1.0)) - cplx(1.0, -1.0) / std::sqrt(2.0)), 2e-16);
}

TEST(SqrtBranch, SquaresBackAndConjugates)
{
	using ionize3d::sqrt_branch;
	std::mt19937 rng(11);
	std::uniform_real_distribution<double> u(-10.0, 10.0);
	for (int i = 0; i < 1000; ++i) {
		cplx z{u(rng), u(rng)};
		cplx s = sqrt_branch(z);
		EXPECT_LT(std::abs(s * s - z), 1e-15 * std::abs(z) * 4);
		EXPECT_GE(s.real(), 0.0);
		EXPECT_LT(std::abs(sqrt_branch(std::conj(z)) - std::conj(s)), 1e-15 * std::abs(s) * 4);
	}
}

TEST(SqrtBranch, JumpOnlyAcrossNegativeAxis)
{
	using ionize3d::sqrt_branch;
	const double d = 1e-12;
	EXPECT_GT(std::abs(sqrt_branch(cplx(-2.0, d)) - sqrt_branch(cplx(-2.0, -d))), 1.0);
	EXPECT_LT(std::abs(sqrt_branch(cplx(2.0, d)) - sqrt_branch(cplx(2.0, -d))), 1e-11);
	EXPECT_LT(std::abs(sqrt_branch(cplx(d, 2.0)) - sqrt_branch(cplx(-d, 2.0))), 1e-11);
}
