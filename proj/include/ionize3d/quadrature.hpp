#ifndef IONIZE3D_QUADRATURE_HPP
#define IONIZE3D_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "error.hpp"

// Thin complex wrappers around Boost quadrature. Real and imaginary parts are
// integrated separately, which keeps us on the well-tested real code paths.

namespace ionize3d::quad {

struct Result {
	cplx value;
	double error; // absolute estimate
};

/// int_0^inf f(u) du for f decaying at least like u^{-2}.
template <class F>
Result half_line(F&& f, double tol = 1e-12)
{
	boost::math::quadrature::exp_sinh<double> integrator;
	double err_re = 0.0, err_im = 0.0, l1 = 0.0;
	double re = integrator.integrate([&](double u) { return f(u).real(); }, tol, &err_re, &l1);
	double im = integrator.integrate([&](double u) { return f(u).imag(); }, tol, &err_im, &l1);
	return {cplx{re, im}, std::hypot(err_re, err_im)};
}

/// int_a^b f(u) du with endpoint singularities allowed.
template <class F>
Result finite(F&& f, double a, double b, double tol = 1e-12)
{
	boost::math::quadrature::tanh_sinh<double> integrator;
	double err_re = 0.0, err_im = 0.0, l1 = 0.0;
	double re = integrator.integrate([&](double u) { return f(u).real(); }, a, b, tol, &err_re, &l1);
	double im = integrator.integrate([&](double u) { return f(u).imag(); }, a, b, tol, &err_im, &l1);
	return {cplx{re, im}, std::hypot(err_re, err_im)};
}

/// Fixed-order Gauss-Legendre on [a, b]; complex or real integrands.
template <int N = 20, class F>
auto gauss_panel(F&& f, double a, double b)
{
	using R = decltype(f(a));
	const auto& x = boost::math::quadrature::gauss<double, N>::abscissa();
	const auto& w = boost::math::quadrature::gauss<double, N>::weights();
	const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
	R acc{};
	if constexpr (N % 2 == 0)
		acc = w[0] * (f(c + hw * x[0]) + f(c - hw * x[0]));
	else
		acc = w[0] * f(c);
	for (std::size_t i = 1; i < x.size(); ++i) acc += w[i] * (f(c + hw * x[i]) + f(c - hw * x[i]));
	return acc * hw;
}

/// Composite Gauss-Legendre with `panels` equal panels.
template <int N = 20, class F>
auto gauss_composite(F&& f, double a, double b, std::size_t panels)
{
	using R = decltype(f(a));
	R acc{};
	const double d = (b - a) / static_cast<double>(panels);
	for (std::size_t i = 0; i < panels; ++i) acc += gauss_panel<N>(f, a + d * i, a + d * (i + 1));
	return acc;
}

} // namespace ionize3d::quad

#endif // IONIZE3D_QUADRATURE_HPP
