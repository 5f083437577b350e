#ifndef IONIZE3D_OBSERVABLES_HPP
#define IONIZE3D_OBSERVABLES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "charge_solver.hpp"
#include "error.hpp"
#include "faddeeva.hpp"
#include "fft.hpp"
#include "free_dynamics.hpp"
#include "parallel.hpp"

// Observables built from a charge trajectory:
//   Psi_t = U0(t) Psi_0 + i int_0^t U0(t - tau; x) q(tau) dtau.
// Radial quantities are carried as u = r Psi, which stays finite at r = 0
// (u(0, t) = q(t) / (4 pi)).

namespace ionize3d {

// ---- survival amplitude ----

struct SurvivalSeries {
	TimeGrid grid{1.0, 2};
	std::vector<cplx> theta;
	std::vector<cplx> z1_part;
	std::vector<cplx> charge_part; ///< i int q(tau) F(t - tau) dtau
	double max_abs = 0.0;
	bool unitarity_flag = false; ///< some |theta| > 1 + 10 tol
};

/// theta(t) = Z1(t) + i int_0^t q(tau) F(t - tau) dtau, F the forcing amplitude.
/// The t^{-1/2} part of F uses the same product weights as the charge solver,
/// the regular part (which starts like sqrt(t)) the trapezoid rule.
inline SurvivalSeries survival(const ChargeTrajectory& traj, const BoundState& st, double tol = 1e-3)
{
	const auto& g = traj.grid;
	const std::size_t N = g.size();
	if (traj.q.size() != N) throw Error(ErrorCode::InvalidArgument, "trajectory and grid disagree");
	SurvivalSeries out;
	out.grid = g;
	out.z1_part.resize(N);
	std::vector<cplx> reg(N);
	for (std::size_t j = 0; j < N; ++j) {
		out.z1_part[j] = overlap_Z1(st, g.t(j));
		reg[j] = forcing_regular(st, g.t(j));
	}
	const auto abel = abel_apply(AbelWeights(g), traj.q);
	auto conv = fft::convolve(traj.q, reg, N);
	const double h = g.step();
	const cplx a = forcing_singular_coeff(st);
	out.charge_part.resize(N);
	out.theta.resize(N);
	for (std::size_t j = 0; j < N; ++j) {
		const cplx trap = j == 0 ? cplx{} : h * (conv[j] - 0.5 * (traj.q[0] * reg[j] + traj.q[j] * reg[0]));
		out.charge_part[j] = cplx{0.0, 1.0} * (a * abel[j] + trap);
		out.theta[j] = out.z1_part[j] + out.charge_part[j];
		out.max_abs = std::max(out.max_abs, std::abs(out.theta[j]));
	}
	out.unitarity_flag = out.max_abs > 1.0 + 10.0 * tol;
	return out;
}

// ---- wavefunction ----

/// r (U0(t) Psi_0)(r): the free part of u.
using FreeScaled = std::function<cplx(double r, double t)>;

inline FreeScaled free_part(const BoundState& st)
{
	return [st](double r, double t) { return free_evolved_bound_state_scaled(st, r, t); };
}

inline FreeScaled free_part(const GaussianState& gs)
{
	return [gs](double r, double t) { return r * gs.evolved(r, t); };
}

/// Charge contribution to u = r Psi on [0, r_max] at a fixed set of grid indices.
///
/// In s = t - tau the kernel is (4 pi i)^{-3/2} s^{-3/2} e^{i a/s}, a = r^2/4.
/// Cells with s < s_far use exact moments of the piecewise-linear charge
/// (erfcx antiderivatives); beyond s_far >= 2 a_max, e^{ia/s} is expanded in
/// powers of a/s and the r-independent moments are FFT convolutions.
class ChargeField {
public:
	static constexpr int taylor_terms = 18;

	ChargeField(const ChargeTrajectory& traj, double r_max, std::vector<std::size_t> indices)
		: traj_(traj)
		, idx_(std::move(indices))
		, r_max_(r_max)
	{
		if (!(r_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
		const std::size_t N = traj.grid.size();
		for (auto j : idx_)
			if (j >= N) throw Error(ErrorCode::InvalidArgument, "time index outside the grid");
		const double h = traj.grid.step();
		const double a_max = r_max * r_max / 4.0;
		n_far_ = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(2.0 * a_max / h)));
		build_far_moments();
	}

	const std::vector<std::size_t>& indices() const { return idx_; }
	double r_max() const { return r_max_; }
	std::size_t near_cells() const { return n_far_; }

	/// Charge part of u(r, t_j) for every stored index.
	std::vector<cplx> scaled_at(double r) const
	{
		if (r < 0.0 || r > r_max_ * (1.0 + 1e-12)) throw Error(ErrorCode::DomainError, "radius outside [0, r_max]");
		const auto& q = traj_.q;
		std::vector<cplx> out(idx_.size());
		if (r == 0.0) {
			for (std::size_t i = 0; i < idx_.size(); ++i) out[i] = q[idx_[i]] / (4.0 * std::numbers::pi);
			return out;
		}
		const double h = traj_.grid.step();
		const double a = r * r / 4.0;
		std::size_t j_max = 0;
		for (auto j : idx_) j_max = std::max(j_max, j);
		const std::size_t cells = std::min(n_far_, j_max);

		// A0 = int s^{-3/2} e^{ia/s}, A1 = int s^{-1/2} e^{ia/s} antiderivatives at cell ends
		const cplx e_ipi4 = std::polar(1.0, std::numbers::pi / 4.0);
		const cplx e_mipi4 = std::conj(e_ipi4);
		const double sa = std::sqrt(a);
		std::vector<cplx> A0(cells + 1), A1(cells + 1);
		A0[0] = 0.0;
		A1[0] = 0.0;
		for (std::size_t c = 1; c <= cells; ++c) {
			const double s = static_cast<double>(c) * h;
			const cplx ph = std::exp(cplx{0.0, a / s});
			const cplx z = e_mipi4 * std::sqrt(a / s);
			A0[c] = std::sqrt(std::numbers::pi) * e_ipi4 / sa * ph * faddeeva::erfcx(z);
			A1[c] = 2.0 * std::sqrt(s) * ph + cplx{0.0, 2.0 * a} * A0[c];
		}
		// weight on the node at the lower / upper end of cell c
		std::vector<cplx> wlo(cells), whi(cells);
		for (std::size_t c = 0; c < cells; ++c) {
			const double slo = static_cast<double>(c) * h, shi = slo + h;
			const cplx M0 = A0[c + 1] - A0[c], M1 = A1[c + 1] - A1[c];
			wlo[c] = (shi * M0 - M1) / h;
			whi[c] = (M1 - slo * M0) / h;
		}
		std::vector<cplx> coef(taylor_terms);
		cplx pw = 1.0;
		for (int m = 0; m < taylor_terms; ++m) {
			coef[static_cast<std::size_t>(m)] = pw;
			pw *= cplx{0.0, a} / static_cast<double>(m + 1);
		}
		const cplx pref = r * cplx{0.0, 1.0} / pow_three_halves(cplx{0.0, 4.0 * std::numbers::pi});
		for (std::size_t i = 0; i < idx_.size(); ++i) {
			const std::size_t j = idx_[i];
			cplx acc = 0.0;
			const std::size_t nc = std::min(cells, j);
			for (std::size_t c = 0; c < nc; ++c) acc += wlo[c] * q[j - c] + whi[c] * q[j - c - 1];
			if (j > n_far_)
				for (int m = 0; m < taylor_terms; ++m)
					acc += coef[static_cast<std::size_t>(m)] * far_[static_cast<std::size_t>(m)][i];
			out[i] = pref * acc;
		}
		return out;
	}

private:
	void build_far_moments()
	{
		const std::size_t N = traj_.grid.size();
		const double h = traj_.grid.step();
		far_.assign(taylor_terms, std::vector<cplx>(idx_.size(), cplx{}));
		std::size_t j_max = 0;
		for (auto j : idx_) j_max = std::max(j_max, j);
		if (j_max <= n_far_) return;
		const std::size_t L = std::min(N, j_max + 1);
		// P[m][c], Q[m][c]: int over cell c of s^{-3/2-m} times the hat of its lower / upper node
		const auto& gx = boost::math::quadrature::gauss<double, 8>::abscissa();
		const auto& gw = boost::math::quadrature::gauss<double, 8>::weights();
		std::vector<std::vector<double>> P(taylor_terms, std::vector<double>(L, 0.0)), Q = P;
		auto add = [&](std::size_t c, double x, double w) {
			// x in [-1, 1] on cell c
			const double s = (static_cast<double>(c) + 0.5 * (1.0 + x)) * h;
			const double lo = 0.5 * (1.0 - x), hi = 0.5 * (1.0 + x);
			double v = 0.5 * h * w / (s * std::sqrt(s));
			for (int m = 0; m < taylor_terms; ++m, v /= s) {
				P[static_cast<std::size_t>(m)][c] += v * lo;
				Q[static_cast<std::size_t>(m)][c] += v * hi;
			}
		};
		for (std::size_t c = n_far_; c + 1 < L; ++c)
			for (std::size_t k = 0; k < gx.size(); ++k) {
				add(c, gx[k], gw[k]);
				if (gx[k] != 0.0) add(c, -gx[k], gw[k]);
			}
		std::vector<cplx> y(traj_.q.begin(), traj_.q.begin() + static_cast<std::ptrdiff_t>(L));
		y[0] = 0.0;
		for (int m = 0; m < taylor_terms; ++m) {
			const auto& Pm = P[static_cast<std::size_t>(m)];
			const auto& Qm = Q[static_cast<std::size_t>(m)];
			std::vector<cplx> ker(L, cplx{});
			for (std::size_t n = n_far_; n < L; ++n) ker[n] = Pm[n] + (n >= n_far_ + 1 ? Qm[n - 1] : 0.0);
			auto conv = fft::convolve(y, ker, L);
			for (std::size_t i = 0; i < idx_.size(); ++i) {
				const std::size_t j = idx_[i];
				if (j <= n_far_) continue;
				// node k = 0 sits at s = t_j and only sees the cell below it
				far_[static_cast<std::size_t>(m)][i] = conv[j] + Qm[j - 1] * traj_.q[0];
			}
		}
	}

	const ChargeTrajectory& traj_;
	std::vector<std::size_t> idx_;
	double r_max_;
	std::size_t n_far_ = 0;
	std::vector<std::vector<cplx>> far_;
};

/// u(r, t_j) = r Psi_t(r).
inline cplx wavefunction_scaled(const ChargeTrajectory& traj, const FreeScaled& free, double r, std::size_t j)
{
	if (j >= traj.grid.size()) throw Error(ErrorCode::InvalidArgument, "time index outside the grid");
	const cplx f = free(r, traj.grid.t(j));
	if (j == 0) return f;
	ChargeField field(traj, std::max(r, 1e-300), {j});
	return f + field.scaled_at(r)[0];
}

/// Psi_t(r) at grid time t_j, r > 0.
inline cplx wavefunction_at(const ChargeTrajectory& traj, const FreeScaled& free, double r, std::size_t j)
{
	if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "wavefunction_at needs r > 0; the charge is q(t)/(4 pi r) there");
	return wavefunction_scaled(traj, free, r, j) / r;
}

// ---- ball probability ----

struct BallSeries {
	double radius = 0.0;
	std::vector<double> t;
	std::vector<double> prob;
	std::vector<double> time_average; ///< (1/t) int_0^t prob, trapezoid over the samples
	int panels = 0;                    ///< radial Gauss-Legendre panels used
	double radial_error = 0.0;         ///< panel-doubling difference at the probe times
};

struct BallOptions {
	std::size_t stride = 500;   ///< sample every stride-th grid point
	int max_panels = 256;
	double radial_tol = 1e-8;
};

namespace detail {

inline std::vector<double> cesaro_mean(const std::vector<double>& t, const std::vector<double>& v)
{
	std::vector<double> out(v.size());
	double acc = 0.0;
	for (std::size_t i = 0; i < v.size(); ++i) {
		if (i > 0) acc += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
		out[i] = t[i] > 0.0 ? acc / t[i] : v[i];
	}
	return out;
}

/// 4 pi int_0^R |u|^2 dr at the stored indices, composite 16-point Gauss-Legendre.
inline std::vector<double> ball_values(const ChargeTrajectory& traj, const FreeScaled& free, double R,
                                       const std::vector<std::size_t>& idx, int panels)
{
	constexpr int G = 16;
	const auto& gx = boost::math::quadrature::gauss<double, G>::abscissa();
	const auto& gw = boost::math::quadrature::gauss<double, G>::weights();
	std::vector<double> nodes, weights;
	const double d = R / panels;
	for (int p = 0; p < panels; ++p) {
		const double mid = d * (p + 0.5);
		for (std::size_t k = 0; k < gx.size(); ++k) {
			nodes.push_back(mid + 0.5 * d * gx[k]);
			weights.push_back(0.5 * d * gw[k]);
			if (gx[k] != 0.0) {
				nodes.push_back(mid - 0.5 * d * gx[k]);
				weights.push_back(0.5 * d * gw[k]);
			}
		}
	}
	ChargeField field(traj, R, idx);
	std::vector<std::vector<double>> part(nodes.size());
	parallel_for(nodes.size(), [&](std::size_t n) {
		auto u = field.scaled_at(nodes[n]);
		part[n].resize(idx.size());
		for (std::size_t i = 0; i < idx.size(); ++i) {
			const double t = traj.grid.t(idx[i]);
			const cplx tot = free(nodes[n], t) + (idx[i] == 0 ? cplx{} : u[i]);
			part[n][i] = weights[n] * std::norm(tot);
		}
	});
	std::vector<double> out(idx.size(), 0.0);
	for (std::size_t n = 0; n < nodes.size(); ++n)
		for (std::size_t i = 0; i < idx.size(); ++i) out[i] += part[n][i];
	for (auto& v : out) v *= 4.0 * std::numbers::pi;
	return out;
}

} // namespace detail

/// ||1(|x| <= R) Psi_t||^2 = 4 pi int_0^R |r Psi_t(r)|^2 dr on every stride-th grid time.
/// The radial panel count doubles until two successive rules agree at the probe times.
inline BallSeries ball_probability(const ChargeTrajectory& traj, const FreeScaled& free, double R, const BallOptions& opt = {})
{
	if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
	if (opt.stride == 0) throw Error(ErrorCode::InvalidArgument, "stride must be positive");
	const std::size_t N = traj.grid.size();
	std::vector<std::size_t> idx;
	for (std::size_t j = 0; j < N; j += opt.stride) idx.push_back(j);
	if (idx.back() != N - 1) idx.push_back(N - 1);

	std::vector<std::size_t> probe{idx[idx.size() / 4], idx[idx.size() / 2], idx.back()};
	int panels = 2;
	auto prev = detail::ball_values(traj, free, R, probe, panels);
	double err = 0.0;
	for (;;) {
		auto next = detail::ball_values(traj, free, R, probe, 2 * panels);
		err = 0.0;
		for (std::size_t i = 0; i < probe.size(); ++i) err = std::max(err, std::abs(next[i] - prev[i]));
		panels *= 2;
		if (err <= opt.radial_tol) break;
		if (panels >= opt.max_panels)
			throw Error(ErrorCode::QuadratureNonConvergence, "radial rule did not settle, difference " + std::to_string(err));
		prev = std::move(next);
	}

	BallSeries out;
	out.radius = R;
	out.panels = panels;
	out.radial_error = err;
	out.prob = detail::ball_values(traj, free, R, idx, panels);
	for (auto j : idx) out.t.push_back(traj.grid.t(j));
	out.time_average = detail::cesaro_mean(out.t, out.prob);
	return out;
}

// ---- decay fits ----

struct DecayFitReport {
	double t1 = 0.0, t2 = 0.0;
	std::size_t points = 0;
	double exponent = 0.0;
	double amplitude = 0.0;
	double r_squared = 0.0;
	double residual_trend = 0.0; ///< mean log residual on the last quarter minus the first quarter
	// composite A t^{-3/2} + C e^{-B t}
	double composite_A = 0.0;
	double composite_C = 0.0;
	double composite_B = 0.0;
	double exponential_share = 0.0; ///< |C e^{-B t1}| / model(t1)
};

/// Least-squares line through (log t, log v) on [t1, t2], plus a composite
/// power-plus-exponential fit for the remainder rate.
inline DecayFitReport decay_fit(const std::vector<double>& t, const std::vector<double>& v, double t1, double t2,
                                double min_r2 = 0.9)
{
	if (t.size() != v.size()) throw Error(ErrorCode::InvalidArgument, "time and value samples differ in length");
	if (!(t1 > 0.0) || !(t2 > t1)) throw Error(ErrorCode::InvalidArgument, "decay window must satisfy 0 < t1 < t2");
	std::vector<double> x, y, tt, vv;
	for (std::size_t i = 0; i < t.size(); ++i) {
		if (t[i] < t1 || t[i] > t2) continue;
		if (!(v[i] > 0.0)) throw Error(ErrorCode::DomainError, "decay fit needs strictly positive samples");
		x.push_back(std::log(t[i]));
		y.push_back(std::log(v[i]));
		tt.push_back(t[i]);
		vv.push_back(v[i]);
	}
	const std::size_t n = x.size();
	if (n < 30) throw Error(ErrorCode::InvalidArgument, "decay window holds fewer than 30 samples");
	DecayFitReport rep;
	rep.t1 = t1;
	rep.t2 = t2;
	rep.points = n;
	double mx = 0.0, my = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		mx += x[i];
		my += y[i];
	}
	mx /= static_cast<double>(n);
	my /= static_cast<double>(n);
	double sxx = 0.0, sxy = 0.0, syy = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		sxx += (x[i] - mx) * (x[i] - mx);
		sxy += (x[i] - mx) * (y[i] - my);
		syy += (y[i] - my) * (y[i] - my);
	}
	rep.exponent = sxy / sxx;
	const double icpt = my - rep.exponent * mx;
	rep.amplitude = std::exp(icpt);
	double ss = 0.0;
	std::vector<double> res(n);
	for (std::size_t i = 0; i < n; ++i) {
		res[i] = y[i] - (icpt + rep.exponent * x[i]);
		ss += res[i] * res[i];
	}
	rep.r_squared = syy > 0.0 ? 1.0 - ss / syy : 1.0;
	const std::size_t qn = std::max<std::size_t>(n / 4, 1);
	double head = 0.0, tail = 0.0;
	for (std::size_t i = 0; i < qn; ++i) {
		head += res[i];
		tail += res[n - 1 - i];
	}
	rep.residual_trend = (tail - head) / static_cast<double>(qn);

	// composite: scan B, solve the 2x2 relative least squares for (A, C)
	double best = std::numeric_limits<double>::infinity();
	for (int k = 0; k <= 400; ++k) {
		const double B = std::pow(10.0, -4.0 + 6.0 * k / 400.0);
		double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			const double f1 = std::pow(tt[i], -1.5) / vv[i], f2 = std::exp(-B * tt[i]) / vv[i];
			a11 += f1 * f1;
			a12 += f1 * f2;
			a22 += f2 * f2;
			b1 += f1;
			b2 += f2;
		}
		const double det = a11 * a22 - a12 * a12;
		if (!(std::abs(det) > 1e-300 * a11 * a22)) continue;
		const double A = (b1 * a22 - b2 * a12) / det, C = (a11 * b2 - a12 * b1) / det;
		double r = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			const double e = (A * std::pow(tt[i], -1.5) + C * std::exp(-B * tt[i])) / vv[i] - 1.0;
			r += e * e;
		}
		if (r < best) {
			best = r;
			rep.composite_A = A;
			rep.composite_B = B;
			rep.composite_C = C;
		}
	}
	const double m1 = rep.composite_A * std::pow(t1, -1.5) + rep.composite_C * std::exp(-rep.composite_B * t1);
	rep.exponential_share = std::abs(m1) > 0.0 ? std::abs(rep.composite_C * std::exp(-rep.composite_B * t1)) / std::abs(m1) : 0.0;

	if (rep.r_squared < min_r2)
		throw Error(ErrorCode::WindowTooNoisy, "log-log fit r^2 = " + std::to_string(rep.r_squared));
	return rep;
}

inline std::vector<double> abs_values(const std::vector<cplx>& z)
{
	std::vector<double> out(z.size());
	for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::abs(z[i]);
	return out;
}

inline std::vector<double> grid_times(const TimeGrid& g)
{
	std::vector<double> out(g.size());
	for (std::size_t j = 0; j < g.size(); ++j) out[j] = g.t(j);
	return out;
}

} // namespace ionize3d

#endif // IONIZE3D_OBSERVABLES_HPP
