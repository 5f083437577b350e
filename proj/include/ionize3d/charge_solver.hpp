#ifndef IONIZE3D_CHARGE_SOLVER_HPP
#define IONIZE3D_CHARGE_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "alpha_model.hpp"
#include "error.hpp"
#include "fft.hpp"
#include "free_dynamics.hpp"
#include "time_grid.hpp"

// Product-trapezoid solver for
//
//   q(t) + 4 sqrt(pi i) int_0^t alpha(tau) q(tau) / sqrt(t - tau) dtau = RHS(t).
//
// The integrand is replaced by its piecewise-linear interpolant and the Abel
// kernel is integrated exactly, so the weights depend on j - k only (apart
// from the k = 0 column). Marching uses a recursive blocked FFT convolution
// (O(N log^2 N)); the direct O(N^2) sum is kept as reference.

namespace ionize3d {

/// 4 sqrt(pi i) = 4 sqrt(pi) e^{i pi/4}.
inline cplx abel_coupling() { return 4.0 * std::sqrt(std::numbers::pi) * sqrt_i(); }

/// Product-integration weights for int_0^{t_j} phi(tau) (t_j - tau)^{-1/2} dtau.
///   w_jk = sqrt(h) ( near(j-k) [k >= 1] + far(j-k-1) [j-k >= 1] )
/// near(a): node closest to t_j of the cell at scaled distance [a, a+1]
/// far(a):  the other node of that cell.
class AbelWeights {
public:
	explicit AbelWeights(const TimeGrid& grid)
		: h_(grid.step())
		, n_(grid.size())
		, interior_(n_)
		, first_(n_)
	{
		for (std::size_t n = 0; n < n_; ++n) {
			first_[n] = n == 0 ? 0.0 : far(static_cast<double>(n - 1));
			interior_[n] = n == 0 ? near(0.0) : near(static_cast<double>(n)) + far(static_cast<double>(n - 1));
		}
	}

	// (a+1) * 2 (sqrt(a+1) - sqrt(a)) - (2/3)((a+1)^{3/2} - a^{3/2}), written without cancellation
	static double near(double a)
	{
		const double ra = std::sqrt(a), rb = std::sqrt(a + 1.0);
		const double d = 1.0 / (ra + rb);
		return (2.0 / 3.0) * d * (1.0 + rb * d);
	}
	// (2/3)((a+1)^{3/2} - a^{3/2}) - a * 2 (sqrt(a+1) - sqrt(a))
	static double far(double a)
	{
		const double ra = std::sqrt(a), rb = std::sqrt(a + 1.0);
		const double d = 1.0 / (ra + rb);
		return (2.0 / 3.0) * d * (1.0 + ra * d);
	}

	double step() const noexcept { return h_; }
	std::size_t size() const noexcept { return n_; }
	double sqrt_h() const noexcept { return std::sqrt(h_); }

	/// Unscaled weight of column k >= 1 at distance n = j - k (n = 0 is the diagonal).
	double interior(std::size_t n) const { return interior_[n]; }
	/// Unscaled weight of column k = 0 in row j.
	double first(std::size_t j) const { return first_[j]; }
	/// Full w_jk including sqrt(h).
	double weight(std::size_t j, std::size_t k) const
	{
		if (k > j || j == 0) return 0.0;
		return sqrt_h() * (k == 0 ? first_[j] : interior_[j - k]);
	}
	double diagonal() const { return sqrt_h() * interior_[0]; }

	const std::vector<double>& interior_table() const noexcept { return interior_; }

private:
	double h_;
	std::size_t n_;
	std::vector<double> interior_;
	std::vector<double> first_;
};

inline AbelWeights abel_weights(const TimeGrid& grid) { return AbelWeights(grid); }

/// (W phi)_j = sum_k w_jk phi_k for all j, via one FFT convolution.
inline std::vector<cplx> abel_apply(const AbelWeights& w, const std::vector<cplx>& phi)
{
	const std::size_t N = w.size();
	if (phi.size() != N) throw Error(ErrorCode::InvalidArgument, "abel_apply: size mismatch");
	std::vector<cplx> y(phi);
	y[0] = 0.0;
	std::vector<cplx> ker(N);
	for (std::size_t n = 0; n < N; ++n) ker[n] = w.interior(n);
	auto out = fft::convolve(y, ker, N);
	const double sh = w.sqrt_h();
	out[0] = 0.0;
	for (std::size_t j = 1; j < N; ++j) out[j] = sh * (out[j] + w.first(j) * phi[0]);
	return out;
}

enum class MarchMethod { Direct, Fft };

inline std::string march_method_name(MarchMethod m) { return m == MarchMethod::Direct ? "direct" : "fft"; }

struct SolveOptions {
	MarchMethod method = MarchMethod::Fft;
	std::size_t base_block = 128; ///< direct sums below this block size
	bool compute_residual = true;
};

struct ChargeTrajectory {
	TimeGrid grid{1.0, 2};
	std::vector<cplx> q;
	std::string scheme = "product-trapezoid";
	int order = 2;
	std::string method = "fft";
	std::string forcing_kind = "bound_state";
	double residual_norm = 0.0; ///< max |defect| of the discrete equation
};

namespace detail {

inline std::vector<double> sample_alpha(const FourierAlpha& alpha, const TimeGrid& grid)
{
	std::vector<double> a(grid.size());
	for (std::size_t j = 0; j < grid.size(); ++j) a[j] = eval_alpha(alpha, grid.t(j));
	return a;
}

struct Marcher {
	const AbelWeights& w;
	const std::vector<double>& a;
	const std::vector<cplx>& rhs;
	std::vector<cplx>& q;
	std::vector<cplx> y;   // alpha q, with y[0] kept out of the Toeplitz part
	std::vector<cplx> acc; // sum_{1 <= k < j} interior(j-k) y_k
	std::size_t base;
	std::map<std::size_t, std::vector<cplx>> kernel_cache;
	cplx c;
	double sh;

	Marcher(const AbelWeights& w_, const std::vector<double>& a_, const std::vector<cplx>& rhs_,
	        std::vector<cplx>& q_, std::size_t base_)
		: w(w_), a(a_), rhs(rhs_), q(q_), y(w_.size()), acc(w_.size()), base(base_), c(abel_coupling()), sh(w_.sqrt_h())
	{
	}

	void finish(std::size_t j)
	{
		if (j == 0) {
			q[0] = rhs[0];
			y[0] = 0.0;
			return;
		}
		const cplx hist = acc[j] + w.first(j) * a[0] * q[0];
		const cplx den = 1.0 + c * w.diagonal() * a[j];
		if (std::abs(den) < 1e-12)
			throw Error(ErrorCode::StepIllConditioned, "step " + std::to_string(j) + " has |1 + c w_jj alpha_j| < 1e-12");
		q[j] = (rhs[j] - c * sh * hist) / den;
		y[j] = a[j] * q[j];
	}

	void direct_block(std::size_t lo, std::size_t hi)
	{
		const std::size_t N = q.size();
		for (std::size_t j = lo; j < hi && j < N; ++j) {
			cplx s = 0.0;
			for (std::size_t k = std::max<std::size_t>(lo, 1); k < j; ++k) s += w.interior(j - k) * y[k];
			acc[j] += s;
			finish(j);
		}
	}

	const std::vector<cplx>& kernel_spectrum(std::size_t S)
	{
		auto& spec = kernel_cache[S];
		if (spec.empty()) {
			spec.assign(2 * S, 0.0);
			const std::size_t N = w.size();
			for (std::size_t n = 1; n < S && n < N; ++n) spec[n] = w.interior(n);
			fft::forward(spec);
		}
		return spec;
	}

	void run(std::size_t lo, std::size_t hi)
	{
		const std::size_t N = q.size();
		if (lo >= N) return;
		if (hi - lo <= base) {
			direct_block(lo, hi);
			return;
		}
		const std::size_t S = hi - lo, mid = lo + S / 2;
		run(lo, mid);
		if (mid < N) {
			// history of y[lo, mid) into acc[mid, hi)
			const auto& K = kernel_spectrum(S);
			std::vector<cplx> buf(2 * S, 0.0);
			for (std::size_t k = lo; k < mid; ++k) buf[k - lo] = k == 0 ? cplx{0.0} : y[k];
			fft::forward(buf);
			for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= K[i];
			fft::inverse(buf);
			for (std::size_t j = mid; j < hi && j < N; ++j) acc[j] += buf[j - lo];
		}
		run(mid, hi);
	}
};

} // namespace detail

/// Max |q_j + c (W alpha q)_j - rhs_j|.
inline double discrete_defect(const AbelWeights& w, const std::vector<double>& a, const std::vector<cplx>& q,
                              const std::vector<cplx>& rhs)
{
	std::vector<cplx> y(q.size());
	for (std::size_t j = 0; j < q.size(); ++j) y[j] = a[j] * q[j];
	auto Wy = abel_apply(w, y);
	const cplx c = abel_coupling();
	double m = 0.0;
	for (std::size_t j = 0; j < q.size(); ++j) m = std::max(m, std::abs(q[j] + c * Wy[j] - rhs[j]));
	return m;
}

/// Core solver for a given right-hand side sampled on the grid.
inline ChargeTrajectory solve_charge_rhs(const FourierAlpha& alpha, const std::vector<cplx>& rhs, const TimeGrid& grid,
                                         const SolveOptions& opt = {})
{
	if (rhs.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "rhs size does not match grid");
	const AbelWeights w(grid);
	const auto a = detail::sample_alpha(alpha, grid);
	ChargeTrajectory tr;
	tr.grid = grid;
	tr.q.assign(grid.size(), 0.0);
	tr.method = march_method_name(opt.method);
	detail::Marcher m(w, a, rhs, tr.q, std::max<std::size_t>(opt.base_block, 2));
	if (opt.method == MarchMethod::Direct) {
		m.direct_block(0, grid.size());
	} else {
		std::size_t top = m.base;
		while (top < grid.size()) top *= 2;
		m.run(0, top);
	}
	if (opt.compute_residual) tr.residual_norm = discrete_defect(w, a, tr.q, rhs);
	return tr;
}

/// RHS = 4 sqrt(pi i) (t^{-1/2} * F)(t) for a sampled forcing; the t^{-1/2}
/// part integrates exactly to pi * singular_coeff.
inline std::vector<cplx> volterra_rhs_from_forcing(const ComplexAmplitudeSeries& f)
{
	const AbelWeights w(f.grid);
	auto out = abel_apply(w, f.values);
	const cplx c = abel_coupling();
	for (auto& v : out) v = c * (v + std::numbers::pi * f.singular_coeff);
	return out;
}

/// Solve with a sampled forcing (general initial data).
inline ChargeTrajectory solve_charge(const FourierAlpha& alpha, const ComplexAmplitudeSeries& forcing, const TimeGrid& grid,
                                     const SolveOptions& opt = {})
{
	if (!(forcing.grid == grid)) throw Error(ErrorCode::InvalidArgument, "forcing must be sampled on the solver grid");
	if (forcing.kind != SeriesKind::Forcing) throw Error(ErrorCode::InvalidArgument, "series is not a forcing");
	auto tr = solve_charge_rhs(alpha, volterra_rhs_from_forcing(forcing), grid, opt);
	tr.forcing_kind = "sampled";
	return tr;
}

/// Solve for the bound state of alpha(0) as initial datum, with the exact right-hand side.
inline ChargeTrajectory solve_charge_bound_state(const FourierAlpha& alpha, const BoundState& init, const TimeGrid& grid,
                                                 const SolveOptions& opt = {})
{
	auto tr = solve_charge_rhs(alpha, sample_volterra_rhs(init, grid), grid, opt);
	tr.forcing_kind = "bound_state";
	return tr;
}

// ---- a-priori growth bound ----

struct AprioriBound {
	double rate = 0.0;     ///< 16 pi^2 (sup|alpha|)^2
	double constant = 0.0; ///< C, fitted on [0, 1/rate]
	bool holds = true;
	double worst_log_margin = 0.0; ///< max_j log|q_j| - log C - rate t_j (<= 0 when the bound holds)
	std::size_t worst_index = 0;
};

inline AprioriBound apriori_bound(const FourierAlpha& alpha, const ChargeTrajectory& tr)
{
	AprioriBound b;
	const double sup = alpha.sup_bound();
	b.rate = 16.0 * std::numbers::pi * std::numbers::pi * sup * sup;
	const double t_fit = b.rate > 0.0 ? 1.0 / b.rate : tr.grid.t_end();
	double C = 0.0;
	for (std::size_t j = 0; j < tr.q.size() && tr.grid.t(j) <= t_fit; ++j) C = std::max(C, std::abs(tr.q[j]));
	b.constant = C;
	if (C == 0.0) {
		for (const auto& v : tr.q)
			if (v != cplx{}) b.holds = false;
		return b;
	}
	double worst = -std::numeric_limits<double>::infinity();
	for (std::size_t j = 0; j < tr.q.size(); ++j) {
		if (tr.q[j] == cplx{}) continue;
		double m = std::log(std::abs(tr.q[j])) - std::log(C) - b.rate * tr.grid.t(j);
		if (m > worst) {
			worst = m;
			b.worst_index = j;
		}
	}
	b.worst_log_margin = worst;
	b.holds = worst <= 1e-12;
	return b;
}

// ---- convergence study ----

struct ConvergenceReport {
	std::vector<double> steps;
	std::vector<cplx> endpoint;     ///< q(T) per grid
	std::vector<double> errors;     ///< max error on the coarse-grid times (oracle) or successive gaps
	std::vector<double> defects;    ///< per-grid residual_norm
	std::vector<double> pair_orders;
	double observed_order = 0.0;    ///< min over consecutive pairs
	bool monotone = true;           ///< false: NonMonotoneRefinement
	bool used_oracle = false;
};

/// `solve` maps a grid to a trajectory; `exact` (optional) is the true q(t).
/// Grids must share T and halve h successively.
inline ConvergenceReport convergence_study(const std::function<ChargeTrajectory(const TimeGrid&)>& solve,
                                           const std::vector<TimeGrid>& grids,
                                           const std::function<cplx(double)>& exact = {})
{
	if (grids.size() < 3) throw Error(ErrorCode::InvalidArgument, "convergence study needs >= 3 grids");
	for (std::size_t i = 1; i < grids.size(); ++i)
		if (std::abs(grids[i].step() * 2.0 - grids[i - 1].step()) > 1e-12 * grids[i - 1].step() ||
		    std::abs(grids[i].t_end() - grids[0].t_end()) > 1e-9 * grids[0].t_end())
			throw Error(ErrorCode::InvalidArgument, "grids must halve h over the same span");
	ConvergenceReport rep;
	rep.used_oracle = static_cast<bool>(exact);
	std::vector<ChargeTrajectory> runs;
	for (const auto& g : grids) {
		runs.push_back(solve(g));
		rep.steps.push_back(g.step());
		rep.endpoint.push_back(runs.back().q.back());
		rep.defects.push_back(runs.back().residual_norm);
	}
	const std::size_t coarse = grids[0].size();
	auto at_coarse = [&](std::size_t run, std::size_t j) {
		std::size_t stride = std::size_t{1} << run;
		return runs[run].q[j * stride];
	};
	if (rep.used_oracle) {
		for (std::size_t r = 0; r < runs.size(); ++r) {
			double e = 0.0;
			for (std::size_t j = 0; j < coarse; ++j) e = std::max(e, std::abs(at_coarse(r, j) - exact(grids[0].t(j))));
			rep.errors.push_back(e);
		}
	} else {
		for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
			double e = 0.0;
			for (std::size_t j = 0; j < coarse; ++j) e = std::max(e, std::abs(at_coarse(r, j) - at_coarse(r + 1, j)));
			rep.errors.push_back(e);
		}
	}
	rep.observed_order = std::numeric_limits<double>::infinity();
	for (std::size_t i = 0; i + 1 < rep.errors.size(); ++i) {
		if (!(rep.errors[i + 1] < rep.errors[i])) rep.monotone = false;
		double o = std::log2(rep.errors[i] / rep.errors[i + 1]);
		rep.pair_orders.push_back(o);
		rep.observed_order = std::min(rep.observed_order, o);
	}
	return rep;
}

// ---- Laplace transform of a trajectory ----

struct LaplaceValue {
	cplx value;
	double tail_bound = 0.0;
};

/// Trapezoid int_0^T e^{-pt} q(t) dt with a tail bound max_{last 10%}|q| e^{-Re p T} / Re p.
inline LaplaceValue laplace_of_trajectory(const ChargeTrajectory& tr, cplx p)
{
	if (!(p.real() > 0.0)) throw Error(ErrorCode::DomainError, "Laplace transform needs Re p > 0");
	const auto& g = tr.grid;
	const std::size_t N = g.size();
	const double h = g.step();
	cplx acc = 0.0;
	const cplx step = std::exp(-p * h);
	cplx e = 1.0;
	for (std::size_t j = 0; j < N; ++j) {
		// recompute the exponential every 1024 steps to stop drift
		if (j % 1024 == 0) e = std::exp(-p * g.t(j));
		double wt = (j == 0 || j + 1 == N) ? 0.5 : 1.0;
		acc += wt * e * tr.q[j];
		e *= step;
	}
	LaplaceValue out{acc * h, 0.0};
	double qmax = 0.0;
	for (std::size_t j = N - std::max<std::size_t>(N / 10, 1); j < N; ++j) qmax = std::max(qmax, std::abs(tr.q[j]));
	out.tail_bound = qmax * std::exp(-p.real() * g.t_end()) / p.real();
	if (out.tail_bound > 0.1 * std::abs(out.value))
		throw Error(ErrorCode::TailDominates, "Laplace truncation bound exceeds 10% of the value");
	return out;
}

} // namespace ionize3d

#endif // IONIZE3D_CHARGE_SOLVER_HPP
