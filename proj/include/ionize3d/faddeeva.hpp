#ifndef IONIZE3D_FADDEEVA_HPP
#define IONIZE3D_FADDEEVA_HPP

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "error.hpp"

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) and the scaled complementary
// error function erfcx(z) = exp(z^2) erfc(z) = w(iz).
//
// Upper half plane: Weideman's rational expansion (40 terms) inside |z| < 8,
// Laplace continued fraction outside. Lower half plane by reflection
// w(z) = 2 exp(-z^2) - w(-z). Relative accuracy is ~1e-15 in the upper half
// plane.

namespace ionize3d::faddeeva {

namespace detail {

inline constexpr int weideman_terms = 40;

struct WeidemanTable {
	std::array<double, weideman_terms> coeff{}; // highest degree first
	double L = 0.0;
};

inline const WeidemanTable& weideman_table()
{
	static const WeidemanTable table = [] {
		constexpr int N = weideman_terms;
		constexpr int M = 2 * N;
		constexpr int M2 = 2 * M;
		WeidemanTable t;
		t.L = std::sqrt(N / std::numbers::sqrt2);
		std::array<double, M2> f{};
		// f[0] = 0, f[1 + (k + M - 1)] for k = -M+1 .. M-1
		for (int k = -M + 1; k <= M - 1; ++k) {
			double theta = k * std::numbers::pi / M;
			double x = t.L * std::tan(0.5 * theta);
			f[static_cast<std::size_t>(k + M)] = std::exp(-x * x) * (t.L * t.L + x * x);
		}
		std::array<double, M2> shifted{};
		for (int i = 0; i < M2; ++i) shifted[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>((i + M) % M2)];
		std::array<double, N> a{};
		for (int m = 1; m <= N; ++m) {
			long double acc = 0.0L;
			for (int i = 0; i < M2; ++i) {
				long double ang = -2.0L * std::numbers::pi_v<long double> * m * i / M2;
				acc += shifted[static_cast<std::size_t>(i)] * std::cos(ang);
			}
			a[static_cast<std::size_t>(m - 1)] = static_cast<double>(acc / M2);
		}
		for (int i = 0; i < N; ++i) t.coeff[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(N - 1 - i)];
		return t;
	}();
	return table;
}

inline cplx w_weideman(cplx z) noexcept
{
	const auto& tab = weideman_table();
	const cplx iz{-z.imag(), z.real()};
	const cplx den = tab.L - iz;
	const cplx Z = (tab.L + iz) / den;
	cplx p = tab.coeff[0];
	for (std::size_t i = 1; i < tab.coeff.size(); ++i) p = p * Z + tab.coeff[i];
	return 2.0 * p / (den * den) + (1.0 / std::sqrt(std::numbers::pi)) / den;
}

inline cplx w_continued_fraction(cplx z) noexcept
{
	constexpr int terms = 40;
	cplx r = 0.0;
	for (int k = terms; k >= 1; --k) r = (0.5 * k) / (z - r);
	return cplx{0.0, 1.0 / std::sqrt(std::numbers::pi)} / (z - r);
}

inline cplx w_upper(cplx z) noexcept
{
	if (std::abs(z) >= 8.0) return w_continued_fraction(z);
	return w_weideman(z);
}

} // namespace detail

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
inline cplx w(cplx z) noexcept
{
	if (z.imag() >= 0.0) return detail::w_upper(z);
	return 2.0 * std::exp(-z * z) - detail::w_upper(-z);
}

/// erfcx(z) = exp(z^2) erfc(z).
inline cplx erfcx(cplx z) noexcept { return w(cplx{-z.imag(), z.real()}); }

/// erfc(z); only use where exp(-z^2) is representable.
inline cplx erfc(cplx z) noexcept { return std::exp(-z * z) * erfcx(z); }

} // namespace ionize3d::faddeeva

#endif // IONIZE3D_FADDEEVA_HPP
