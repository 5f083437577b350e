#ifndef IONIZE3D_FREE_DYNAMICS_HPP
#define IONIZE3D_FREE_DYNAMICS_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "branch.hpp"
#include "error.hpp"
#include "faddeeva.hpp"
#include "quadrature.hpp"
#include "time_grid.hpp"

// Free propagator and bound-state quantities, units hbar = 1, 2m = 1 (H0 = -Laplacian).
//
// beta = 4 pi |alpha| is the bound-state decay rate; the bound state energy is
// -beta^2 and its Fourier transform is 4 pi sqrt(2|alpha|) / (k^2 + beta^2).
// Most time-domain quantities reduce to erfcx at x = beta sqrt(i t).

namespace ionize3d {

class BoundState {
public:
	explicit BoundState(double alpha)
		: alpha_(alpha)
	{
		if (!(alpha < 0.0) || !std::isfinite(alpha))
			throw Error(ErrorCode::DomainError, "bound state needs alpha < 0");
	}

	double alpha() const noexcept { return alpha_; }
	double beta() const noexcept { return 4.0 * std::numbers::pi * -alpha_; }
	/// sqrt(2|alpha|), the normalization of e^{-beta r}/r.
	double amplitude() const noexcept { return std::sqrt(-2.0 * alpha_); }
	double energy() const noexcept { return -beta() * beta(); }

private:
	double alpha_;
};

enum class SeriesKind { Forcing, OverlapZ1, Survival, Charge };

inline std::string series_kind_name(SeriesKind k)
{
	switch (k) {
	case SeriesKind::Forcing: return "Forcing";
	case SeriesKind::OverlapZ1: return "OverlapZ1";
	case SeriesKind::Survival: return "Survival";
	case SeriesKind::Charge: return "Charge";
	}
	return "Unknown";
}

/// Complex samples on a uniform grid. For Forcing the samples hold the
/// regular part only; the full signal is singular_coeff / sqrt(t) + values[j].
struct ComplexAmplitudeSeries {
	TimeGrid grid;
	std::vector<cplx> values;
	SeriesKind kind = SeriesKind::Forcing;
	cplx singular_coeff{0.0, 0.0};

	cplx full(std::size_t j) const
	{
		if (j == 0 || singular_coeff == cplx{}) return values[j];
		return singular_coeff / std::sqrt(grid.t(j)) + values[j];
	}
};

inline double bound_state_eval(const BoundState& s, double r)
{
	if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "bound state is singular at r = 0");
	return s.amplitude() * std::exp(-s.beta() * r) / r;
}

inline double bound_state_charge(const BoundState& s) { return 4.0 * std::numbers::pi * s.amplitude(); }

/// (4 pi i t)^{-3/2} e^{i r^2 / 4t}.
inline cplx free_kernel(double t, double r)
{
	if (!(t > 0.0)) throw Error(ErrorCode::DomainError, "free kernel needs t > 0");
	const cplx z{0.0, 4.0 * std::numbers::pi * t};
	return std::exp(cplx{0.0, r * r / (4.0 * t)}) / pow_three_halves(z);
}

namespace detail {

inline cplx beta_sqrt_it(const BoundState& s, double t) { return s.beta() * std::sqrt(t) * sqrt_i(); }

// sum_{m>=1} (-1)^m (2m-1)!! / (2x^2)^m, stopped at the smallest term
inline cplx erfcx_tail_series(cplx x, std::vector<cplx>* terms = nullptr)
{
	const cplx inv = 1.0 / (2.0 * x * x);
	cplx term = 1.0, sum = 0.0;
	double last = std::numeric_limits<double>::infinity();
	for (int m = 1; m < 60; ++m) {
		term *= -static_cast<double>(2 * m - 1) * inv;
		double a = std::abs(term);
		if (a > last) break;
		last = a;
		sum += term;
		if (terms) terms->push_back(term);
		if (a < 1e-17 * std::abs(sum)) break;
	}
	return sum;
}

inline constexpr double forcing_asymptotic_radius = 7.0;
inline constexpr double z1_asymptotic_radius = 6.0;

} // namespace detail

/// Coefficient a of the a t^{-1/2} leading term of the forcing.
inline cplx forcing_singular_coeff(const BoundState& s)
{
	return std::sqrt(2.0 * -s.alpha() / std::numbers::pi) * sqrt_minus_i();
}

/// (U0(t) phi)(0).
inline cplx forcing_amplitude(const BoundState& s, double t)
{
	if (!(t > 0.0)) throw Error(ErrorCode::DomainError, "forcing needs t > 0");
	const cplx x = detail::beta_sqrt_it(s, t);
	const cplx lead = forcing_singular_coeff(s) / std::sqrt(t);
	if (std::abs(x) < detail::forcing_asymptotic_radius)
		return lead - s.beta() * s.amplitude() * faddeeva::erfcx(x);
	return -lead * detail::erfcx_tail_series(x);
}

/// forcing minus its t^{-1/2} term; finite at t = 0.
inline cplx forcing_regular(const BoundState& s, double t)
{
	if (t < 0.0) throw Error(ErrorCode::DomainError, "forcing needs t >= 0");
	const cplx x = detail::beta_sqrt_it(s, t);
	if (std::abs(x) < detail::forcing_asymptotic_radius) return -s.beta() * s.amplitude() * faddeeva::erfcx(x);
	return forcing_amplitude(s, t) - forcing_singular_coeff(s) / std::sqrt(t);
}

/// Contour-rotated quadrature of the forcing (k = e^{-i pi/4} u).
inline quad::Result forcing_amplitude_quadrature(const BoundState& s, double t, double tol = 1e-13)
{
	if (!(t > 0.0)) throw Error(ErrorCode::DomainError, "forcing needs t > 0");
	const double b2 = s.beta() * s.beta();
	auto f = [&](double u) { return cplx{u * u * std::exp(-u * u * t), 0.0} / cplx{b2, -u * u}; };
	auto r = quad::half_line(f, tol);
	const cplx pref = 2.0 * s.amplitude() / std::numbers::pi * std::polar(1.0, -0.75 * std::numbers::pi);
	return {pref * r.value, std::abs(pref) * r.error};
}

/// Right-hand side of the charge equation, 4 sqrt(pi i) (t^{-1/2} * forcing)(t), in closed form.
inline cplx volterra_rhs(const BoundState& s, double t)
{
	if (t < 0.0) throw Error(ErrorCode::DomainError, "rhs needs t >= 0");
	return bound_state_charge(s) * faddeeva::erfcx(detail::beta_sqrt_it(s, t));
}

/// r (U0(t) phi)(r); at t = 0 this is r phi(r).
inline cplx free_evolved_bound_state_scaled(const BoundState& s, double r, double t)
{
	if (r < 0.0) throw Error(ErrorCode::DomainError, "negative radius");
	if (t == 0.0) return s.amplitude() * std::exp(-s.beta() * r);
	if (t < 0.0) throw Error(ErrorCode::DomainError, "negative time");
	const cplx sit = std::sqrt(t) * sqrt_i();
	const cplx bx = s.beta() * sit;
	const cplx rx = r / (2.0 * sit);
	const cplx phase = std::exp(cplx{0.0, r * r / (4.0 * t)});
	return 0.5 * s.amplitude() * phase * (faddeeva::erfcx(bx - rx) - faddeeva::erfcx(bx + rx));
}

/// (U0(t) phi)(r) for r > 0.
inline cplx free_evolved_bound_state(const BoundState& s, double r, double t)
{
	if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "free evolution evaluated at r = 0; use forcing_amplitude");
	return free_evolved_bound_state_scaled(s, r, t) / r;
}

/// Z1(t) = (phi, e^{-i H0 t} phi).
inline cplx overlap_Z1(const BoundState& s, double t)
{
	if (t < 0.0) throw Error(ErrorCode::DomainError, "overlap needs t >= 0");
	const cplx x = detail::beta_sqrt_it(s, t);
	if (std::abs(x) < detail::z1_asymptotic_radius)
		return (1.0 + 2.0 * x * x) * faddeeva::erfcx(x) - 2.0 * x / std::sqrt(std::numbers::pi);
	// (1/sqrt(pi)) sum_m c_m x^{-2m-1}, rewritten on the erfcx tail terms
	std::vector<cplx> terms;
	detail::erfcx_tail_series(x, &terms);
	cplx acc = 0.0;
	for (std::size_t m = 1; m <= terms.size(); ++m) acc += 2.0 * static_cast<double>(m) * terms[m - 1];
	return -acc / (std::sqrt(std::numbers::pi) * x);
}

/// Z1 by momentum-space quadrature along the rotated ray.
inline quad::Result overlap_Z1_quadrature(const BoundState& s, double t, double tol = 1e-13)
{
	if (t < 0.0) throw Error(ErrorCode::DomainError, "overlap needs t >= 0");
	const double b2 = s.beta() * s.beta();
	auto f = [&](double u) {
		cplx d{b2, -u * u};
		return cplx{u * u * std::exp(-u * u * t), 0.0} / (d * d);
	};
	auto r = quad::half_line(f, tol);
	const cplx pref = 16.0 * -s.alpha() * std::polar(1.0, -0.75 * std::numbers::pi);
	quad::Result out{pref * r.value, std::abs(pref) * r.error};
	if (!std::isfinite(out.error) || out.error > 1e-6 * (1.0 + std::abs(out.value)))
		throw Error(ErrorCode::QuadratureNonConvergence, "Z1 quadrature error estimate " + std::to_string(out.error));
	return out;
}

/// Laplace transform of the charge-equation right-hand side.
inline cplx f_tilde(cplx p, double alpha0_init)
{
	if (p == cplx{}) throw Error(ErrorCode::DomainError, "f_tilde has a branch point at p = 0");
	BoundState st(alpha0_init);
	const cplx s = sqrt_branch(cplx{0.0, -1.0} * p);
	const double b = st.beta();
	// (4 pi a + s)/((4 pi a)^2 + ip) = -1/(beta + s): the pole at ip = -beta^2
	// cancels, only the branch point p = 0 is left
	return cplx{0.0, -4.0 * std::numbers::pi * st.amplitude()} / (s * (s + b));
}

/// The unsimplified rational form; singular where ip = -(4 pi alpha)^2 up to cancellation.
inline cplx f_tilde_unsimplified(cplx p, double alpha0_init)
{
	if (p == cplx{}) throw Error(ErrorCode::DomainError, "f_tilde has a branch point at p = 0");
	BoundState st(alpha0_init);
	const cplx ip = cplx{0.0, 1.0} * p;
	const cplx s = sqrt_branch(-ip);
	const double a4 = 4.0 * std::numbers::pi * alpha0_init;
	const cplx den = a4 * a4 + ip;
	if (std::abs(den) < 1e-14 * (a4 * a4)) throw Error(ErrorCode::DomainError, "removable singularity of the unsimplified form");
	return cplx{0.0, 4.0 * std::numbers::pi} * st.amplitude() / s * (a4 + s) / den;
}

/// Laplace transform of the survival kernel Z2, the factor multiplying q~ in theta~.
inline cplx z2_tilde(cplx p, double alpha0_init)
{
	BoundState st(alpha0_init);
	const cplx s = sqrt_branch(cplx{0.0, -1.0} * p);
	return st.amplitude() / (st.beta() + s);
}

/// Forcing samples on a grid for the bound-state initial datum.
inline ComplexAmplitudeSeries sample_forcing(const BoundState& s, const TimeGrid& grid)
{
	ComplexAmplitudeSeries out{grid, std::vector<cplx>(grid.size()), SeriesKind::Forcing, forcing_singular_coeff(s)};
	for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] = forcing_regular(s, grid.t(j));
	return out;
}

/// Samples of volterra_rhs on a grid.
inline std::vector<cplx> sample_volterra_rhs(const BoundState& s, const TimeGrid& grid)
{
	std::vector<cplx> out(grid.size());
	for (std::size_t j = 0; j < grid.size(); ++j) out[j] = volterra_rhs(s, grid.t(j));
	return out;
}

inline ComplexAmplitudeSeries sample_overlap_Z1(const BoundState& s, const TimeGrid& grid)
{
	ComplexAmplitudeSeries out{grid, std::vector<cplx>(grid.size()), SeriesKind::OverlapZ1, {}};
	for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] = overlap_Z1(s, grid.t(j));
	return out;
}

// ---- general radial initial data ----

/// Radial momentum profile psi^(k) (3D Fourier transform, radial), negligible beyond k_max.
struct RadialProfile {
	std::function<cplx(double)> psi_hat;
	double k_max = 20.0;
	cplx value_at_origin{}; // Psi(0), used for t = 0
};

/// Normalized Gaussian Psi(x) = N exp(-|x|^2/(2 sigma^2)).
struct GaussianState {
	double sigma = 1.0;

	double norm() const { return std::pow(std::numbers::pi * sigma * sigma, -0.75); }
	double value(double r) const { return norm() * std::exp(-r * r / (2.0 * sigma * sigma)); }
	double psi_hat(double k) const
	{
		return norm() * std::pow(2.0 * std::numbers::pi * sigma * sigma, 1.5) * std::exp(-0.5 * sigma * sigma * k * k);
	}
	/// exact free evolution (U0(t) Psi)(r)
	cplx evolved(double r, double t) const
	{
		const cplx w = cplx{sigma * sigma, 2.0 * t};
		return norm() * pow_three_halves(sigma * sigma / w) * std::exp(-r * r / (2.0 * w));
	}
	RadialProfile profile() const
	{
		GaussianState g = *this;
		return {[g](double k) { return cplx{g.psi_hat(k), 0.0}; }, 12.0 / sigma, cplx{norm(), 0.0}};
	}
};

/// (U0(t) Psi)(0) = (2 pi^2)^{-1} int_0^inf k^2 e^{-i k^2 t} psi^(k) dk.
inline cplx forcing_general(const RadialProfile& prof, double t)
{
	if (t < 0.0) throw Error(ErrorCode::DomainError, "forcing needs t >= 0");
	if (t == 0.0) return prof.value_at_origin;
	// panels short enough that the phase k^2 t moves by at most ~1 rad per panel
	const double kmax = prof.k_max;
	const auto panels = static_cast<std::size_t>(std::ceil(std::max(8.0, kmax * kmax * t)));
	auto f = [&](double k) { return k * k * std::exp(cplx{0.0, -k * k * t}) * prof.psi_hat(k); };
	const cplx coarse = quad::gauss_composite<20>(f, 0.0, kmax, panels);
	const cplx fine = quad::gauss_composite<20>(f, 0.0, kmax, 2 * panels);
	if (std::abs(fine - coarse) > 1e-9 * (1.0 + std::abs(fine)))
		throw Error(ErrorCode::QuadratureNonConvergence, "radial forcing quadrature did not settle");
	return fine / (2.0 * std::numbers::pi * std::numbers::pi);
}

inline ComplexAmplitudeSeries sample_forcing_general(const RadialProfile& prof, const TimeGrid& grid)
{
	ComplexAmplitudeSeries out{grid, std::vector<cplx>(grid.size()), SeriesKind::Forcing, {}};
	for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] = forcing_general(prof, grid.t(j));
	return out;
}

} // namespace ionize3d

#endif // IONIZE3D_FREE_DYNAMICS_HPP
