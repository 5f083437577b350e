#ifndef IONIZE3D_BRANCH_HPP
#define IONIZE3D_BRANCH_HPP

#include <cmath>
#include <complex>
#include <numbers>

#include "error.hpp"

namespace ionize3d {

/// Square root with the cut on the negative real axis:
/// sqrt(rho e^{i theta}) = sqrt(rho) e^{i theta/2}, theta in (-pi, pi].
///
/// Every fractional power in the library goes through this function, so the
/// mode system, the Laplace-domain closed forms and the time-domain kernels
/// all agree on the sheet.
inline cplx sqrt_branch(cplx z) noexcept
{
	double re = z.real();
	double im = z.imag();
	if (im == 0.0) {
		// covers -0.0 imaginary parts: theta = +pi on the cut
		if (re >= 0.0) return {std::sqrt(re), 0.0};
		return {0.0, std::sqrt(-re)};
	}
	double rho = std::abs(z);
	double theta = std::atan2(im, re);
	double m = std::sqrt(rho);
	return {m * std::cos(0.5 * theta), m * std::sin(0.5 * theta)};
}

/// z^{3/2} on the same sheet.
inline cplx pow_three_halves(cplx z) noexcept { return z * sqrt_branch(z); }

/// e^{i pi/4} = sqrt(i).
inline const cplx& sqrt_i() noexcept
{
	static const cplx v{std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0};
	return v;
}

/// e^{-i pi/4} = sqrt(-i).
inline const cplx& sqrt_minus_i() noexcept
{
	static const cplx v{std::numbers::sqrt2 / 2.0, -std::numbers::sqrt2 / 2.0};
	return v;
}

} // namespace ionize3d

#endif // IONIZE3D_BRANCH_HPP
