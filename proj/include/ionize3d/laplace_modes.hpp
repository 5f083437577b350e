#ifndef IONIZE3D_LAPLACE_MODES_HPP
#define IONIZE3D_LAPLACE_MODES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alpha_model.hpp"
#include "branch.hpp"
#include "error.hpp"
#include "free_dynamics.hpp"

// Laplace-domain mode system. With q_n(p) = q~(p + i omega n) and
// s_n = sqrt(omega n - i p), row n of the transformed charge equation reads
//
//   (4 pi alpha_0 + s_n) q_n + 4 pi sum_{k != 0} alpha_k q_{n+k} = h_n,
//   h_n = -4 pi i sqrt(2|alpha_init|) / (s_n + beta_init),
//
// which is the same for all signs of alpha_0. Dividing by the row
// denominator gives (I - L(p)) q = g. Indices are truncated to [-M, M].

namespace ionize3d {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

enum class ModeCase { I, II, III };

inline std::string mode_case_name(ModeCase c)
{
	switch (c) {
	case ModeCase::I: return "I";
	case ModeCase::II: return "II";
	default: return "III";
	}
}

inline ModeCase mode_case_of(const FourierAlpha& alpha, double tol = default_resonance_tol)
{
	auto rc = classify_resonance(alpha, tol);
	if (std::holds_alternative<ZeroMean>(rc)) return ModeCase::II;
	if (std::holds_alternative<PositiveMean>(rc)) return ModeCase::III;
	return ModeCase::I;
}

struct ModeTruncation {
	int M = 64;
	ModeCase mode_case = ModeCase::I;

	static ModeTruncation for_model(const FourierAlpha& alpha, int M)
	{
		if (M < alpha.support_radius())
			throw Error(ErrorCode::InvalidArgument, "M must be >= the support radius of alpha");
		return {M, mode_case_of(alpha)};
	}
	std::size_t dim() const { return static_cast<std::size_t>(2 * M + 1); }
	std::size_t index(int n) const { return static_cast<std::size_t>(n + M); }
};

/// s_n = sqrt(omega n - i p). On the cut itself (p on the imaginary axis with
/// omega n + Im p < 0) the value is the limit from Re p > 0, where Laplace
/// transforms live.
inline cplx row_sqrt(double omega_n, cplx p)
{
	const cplx z{omega_n + p.imag(), -p.real()};
	if (z.imag() == 0.0 && z.real() < 0.0) return {0.0, -std::sqrt(-z.real())};
	return sqrt_branch(z);
}

inline cplx source_h(cplx s_n, const BoundState& init)
{
	return cplx{0.0, -4.0 * std::numbers::pi * init.amplitude()} / (s_n + init.beta());
}

/// Row-form pieces shared by all solvers.
struct RowForm {
	ModeTruncation trunc;
	cplx p;
	CVector den; ///< 4 pi alpha_0 + s_n
	CVector s;   ///< s_n
	CVector h;   ///< source
	CMatrix off; ///< 4 pi alpha_{m-n} at (n, m), m != n
	double alpha0 = 0.0;

	CMatrix full() const
	{
		CMatrix A = off;
		for (Eigen::Index i = 0; i < den.size(); ++i) A(i, i) += den(i);
		return A;
	}
};

inline RowForm row_form(const FourierAlpha& alpha, const ModeTruncation& tr, cplx p, const BoundState& init)
{
	RowForm rf;
	rf.trunc = tr;
	rf.p = p;
	rf.alpha0 = alpha.mean();
	const auto D = static_cast<Eigen::Index>(tr.dim());
	rf.den.resize(D);
	rf.s.resize(D);
	rf.h.resize(D);
	rf.off = CMatrix::Zero(D, D);
	const double a4 = 4.0 * std::numbers::pi * rf.alpha0;
	for (int n = -tr.M; n <= tr.M; ++n) {
		const auto i = static_cast<Eigen::Index>(tr.index(n));
		rf.s(i) = row_sqrt(alpha.omega() * n, p);
		rf.den(i) = a4 + rf.s(i);
		rf.h(i) = source_h(rf.s(i), init);
	}
	for (const auto& [k, ak] : alpha.coeffs()) {
		if (k == 0) continue;
		for (int n = -tr.M; n <= tr.M; ++n) {
			int m = n + k;
			if (m < -tr.M || m > tr.M) continue;
			rf.off(static_cast<Eigen::Index>(tr.index(n)), static_cast<Eigen::Index>(tr.index(m))) =
				4.0 * std::numbers::pi * ak;
		}
	}
	return rf;
}

struct LinearSystem {
	CMatrix A; ///< I - L(p)
	CVector rhs; ///< g(p)
	ModeTruncation trunc;
	cplx p;
};

/// A = I - L(p), rhs = g(p).
inline LinearSystem assemble_system(const FourierAlpha& alpha, const ModeTruncation& tr, cplx p, const BoundState& init)
{
	auto rf = row_form(alpha, tr, p, init);
	const double tiny = 1e-14 * (1.0 + std::abs(4.0 * std::numbers::pi * rf.alpha0));
	LinearSystem sys{CMatrix::Identity(rf.den.size(), rf.den.size()), CVector(rf.den.size()), tr, p};
	for (Eigen::Index i = 0; i < rf.den.size(); ++i) {
		if (std::abs(rf.den(i)) < tiny)
			throw Error(ErrorCode::SingularRow,
			            "row denominator vanishes at n=" + std::to_string(static_cast<int>(i) - tr.M));
		sys.A.row(i) += rf.off.row(i) / rf.den(i);
		sys.rhs(i) = rf.h(i) / rf.den(i);
	}
	return sys;
}

struct ModeSolution {
	cplx p;
	ModeTruncation trunc;
	CVector q;
	double residual = 0.0;  ///< max row defect of (I - L) q = g
	double condition = 0.0; ///< 1-norm condition estimate of I - L
	double tail_bound = 0.0;

	cplx at(int n) const
	{
		if (n < -trunc.M || n > trunc.M) return 0.0;
		return q(static_cast<Eigen::Index>(trunc.index(n)));
	}
	cplx q0() const { return at(0); }
};

struct ModeOptions {
	double singular_condition = 1e14;
	bool exact_condition = false; ///< SVD instead of the LU estimate
};

inline double exact_condition_number(const CMatrix& A)
{
	Eigen::JacobiSVD<CMatrix> svd(A);
	const auto& sv = svd.singularValues();
	return sv(0) / sv(sv.size() - 1);
}

/// Dense solve of the truncated system.
inline ModeSolution solve_modes(const FourierAlpha& alpha, const ModeTruncation& tr, cplx p, const BoundState& init,
                                const ModeOptions& opt = {})
{
	auto sys = assemble_system(alpha, tr, p, init);
	Eigen::PartialPivLU<CMatrix> lu(sys.A);
	ModeSolution sol;
	sol.p = p;
	sol.trunc = tr;
	const double rc = lu.rcond();
	sol.condition = opt.exact_condition ? exact_condition_number(sys.A) : (rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity());
	if (!(sol.condition < opt.singular_condition))
		throw Error(ErrorCode::NumericallySingular, "I - L(p) condition estimate " + std::to_string(sol.condition));
	sol.q = lu.solve(sys.rhs);
	// one step of iterative refinement
	CVector r = sys.rhs - sys.A * sol.q;
	sol.q += lu.solve(r);
	r = sys.rhs - sys.A * sol.q;
	sol.residual = r.cwiseAbs().maxCoeff();
	// neglected couplings: alpha_k q_{n+k} with |n+k| > M; bound them by the edge amplitudes
	const int S = std::max(alpha.support_radius(), 1);
	double edge = 0.0, den_min = std::numeric_limits<double>::infinity();
	const double a4 = 4.0 * std::numbers::pi * alpha.mean();
	for (int n = -tr.M; n <= tr.M; ++n) {
		if (std::abs(n) <= tr.M - S) continue;
		edge = std::max(edge, std::abs(sol.at(n)));
		den_min = std::min(den_min, std::abs(a4 + row_sqrt(alpha.omega() * n, p)));
	}
	sol.tail_bound = 4.0 * std::numbers::pi * alpha.ell1_norm() * edge / den_min;
	if (!std::isfinite(sol.q.squaredNorm()))
		throw Error(ErrorCode::NumericallySingular, "non-finite mode solution");
	return sol;
}

// ---- imaginary-axis scan ----

struct ScanPoint {
	double s = 0.0;
	double eps = 0.0;
	double norm = 0.0;     ///< ||q||_2
	double q0_abs = 0.0;
	double probe_abs = 0.0; ///< |q_probe| for the requested probe index
	double condition = 0.0;
	bool singular = false;
};

struct ScanReport {
	std::vector<double> eps_ladder;
	int probe_index = 0;
	std::vector<ScanPoint> points; ///< s-major, eps-minor
	std::vector<double> flagged_s; ///< growth > growth_limit across the ladder
	double max_condition = 0.0;
	double max_growth = 0.0;       ///< max over s of norm(eps_min) / norm(eps_max)
	double max_probe_variation = 0.0; ///< max over s of max/min of |q_probe| across the ladder
	double growth_limit = 10.0;
};

inline ScanReport scan_imaginary_axis(const FourierAlpha& alpha, const ModeTruncation& tr, const std::vector<double>& s_grid,
                                      const std::vector<double>& eps_ladder, const BoundState& init, int probe_index = 0,
                                      const ModeOptions& opt = {})
{
	for (double e : eps_ladder)
		if (!(e > 0.0)) throw Error(ErrorCode::InvalidArgument, "scan offsets must be positive");
	ScanReport rep;
	rep.eps_ladder = eps_ladder;
	rep.probe_index = probe_index;
	for (double s : s_grid) {
		double nmin = std::numeric_limits<double>::infinity(), nmax = 0.0;
		double pmin = std::numeric_limits<double>::infinity(), pmax = 0.0;
		double first = 0.0, last = 0.0;
		for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
			ScanPoint pt;
			pt.s = s;
			pt.eps = eps_ladder[i];
			try {
				auto sol = solve_modes(alpha, tr, cplx{pt.eps, s}, init, opt);
				pt.norm = sol.q.norm();
				pt.q0_abs = std::abs(sol.q0());
				pt.probe_abs = std::abs(sol.at(probe_index));
				pt.condition = sol.condition;
			} catch (const Error& e) {
				if (e.code() != ErrorCode::NumericallySingular && e.code() != ErrorCode::SingularRow) throw;
				pt.singular = true;
				pt.norm = std::numeric_limits<double>::infinity();
				pt.probe_abs = std::numeric_limits<double>::infinity();
				pt.condition = std::numeric_limits<double>::infinity();
			}
			rep.max_condition = std::max(rep.max_condition, pt.condition);
			nmin = std::min(nmin, pt.norm);
			nmax = std::max(nmax, pt.norm);
			pmin = std::min(pmin, pt.probe_abs);
			pmax = std::max(pmax, pt.probe_abs);
			if (i == 0) first = pt.norm;
			last = pt.norm;
			rep.points.push_back(pt);
		}
		const double growth = first > 0.0 ? last / first : std::numeric_limits<double>::infinity();
		rep.max_growth = std::max(rep.max_growth, growth);
		const double var = pmin > 0.0 ? pmax / pmin : std::numeric_limits<double>::infinity();
		rep.max_probe_variation = std::max(rep.max_probe_variation, var);
		if (!(growth <= rep.growth_limit)) rep.flagged_s.push_back(s);
	}
	return rep;
}

// ---- auxiliary decomposition ----

/// q_n = r_n + sum_{j in S} T^{(j)}_n q_j for n outside S, with q_S from a |S| x |S| system.
/// Case I non-resonant: S = {n_bar} (t = T^{(n_bar)}); Case II: S = {0};
/// resonant: S = {0, N} with u = r, v = T^{(N)}, t = T^{(0)}.
struct AuxiliarySolution {
	cplx p;
	ModeTruncation trunc;
	std::vector<int> excluded;
	CVector r;                  ///< zero on S
	std::vector<CVector> T;     ///< one per excluded index, zero on S
	CMatrix small;              ///< |S| x |S| system matrix (row form)
	CVector small_rhs;
	CVector qS;
	cplx F = 0.0; ///< 4 pi sum_{k != 0} alpha_k t_{m+k} (single excluded index m)
	cplx G = 0.0; ///< -4 pi sum_{k != 0} alpha_k r_{m+k}

	CVector reconstruct() const
	{
		CVector q = r;
		for (std::size_t j = 0; j < excluded.size(); ++j) q += T[j] * qS(static_cast<Eigen::Index>(j));
		for (std::size_t j = 0; j < excluded.size(); ++j)
			q(static_cast<Eigen::Index>(trunc.index(excluded[j]))) = qS(static_cast<Eigen::Index>(j));
		return q;
	}
};

inline AuxiliarySolution solve_auxiliary(const FourierAlpha& alpha, const ModeTruncation& tr, cplx p,
                                         const std::vector<int>& excluded, const BoundState& init,
                                         const ModeOptions& opt = {})
{
	if (excluded.empty()) throw Error(ErrorCode::InvalidArgument, "auxiliary system needs an excluded index");
	for (int m : excluded)
		if (m < -tr.M || m > tr.M) throw Error(ErrorCode::InvalidArgument, "excluded index outside truncation");
	auto rf = row_form(alpha, tr, p, init);
	const auto D = static_cast<Eigen::Index>(tr.dim());
	std::vector<bool> in_S(static_cast<std::size_t>(D), false);
	for (int m : excluded) in_S[tr.index(m)] = true;
	std::vector<Eigen::Index> keep;
	for (Eigen::Index i = 0; i < D; ++i)
		if (!in_S[static_cast<std::size_t>(i)]) keep.push_back(i);
	const auto K = static_cast<Eigen::Index>(keep.size());
	const auto nS = static_cast<Eigen::Index>(excluded.size());

	// row-scaled block (I - L) restricted to the complement
	CMatrix B(K, K);
	CVector g(K);
	CMatrix cols(K, nS);
	for (Eigen::Index a = 0; a < K; ++a) {
		const Eigen::Index i = keep[static_cast<std::size_t>(a)];
		const cplx d = rf.den(i);
		for (Eigen::Index b = 0; b < K; ++b) B(a, b) = rf.off(i, keep[static_cast<std::size_t>(b)]) / d;
		B(a, a) += 1.0;
		g(a) = rf.h(i) / d;
		for (Eigen::Index j = 0; j < nS; ++j)
			cols(a, j) = -rf.off(i, static_cast<Eigen::Index>(tr.index(excluded[static_cast<std::size_t>(j)]))) / d;
	}
	Eigen::PartialPivLU<CMatrix> lu(B);
	const double rc = lu.rcond();
	if (!(rc > 1.0 / opt.singular_condition))
		throw Error(ErrorCode::NumericallySingular, "auxiliary block condition estimate " + std::to_string(1.0 / rc));

	AuxiliarySolution aux;
	aux.p = p;
	aux.trunc = tr;
	aux.excluded = excluded;
	aux.r = CVector::Zero(D);
	CVector rr = lu.solve(g);
	for (Eigen::Index a = 0; a < K; ++a) aux.r(keep[static_cast<std::size_t>(a)]) = rr(a);
	for (Eigen::Index j = 0; j < nS; ++j) {
		CVector tj = lu.solve(cols.col(j));
		CVector full = CVector::Zero(D);
		for (Eigen::Index a = 0; a < K; ++a) full(keep[static_cast<std::size_t>(a)]) = tj(a);
		aux.T.push_back(full);
	}

	// rows in S, kept unscaled so a vanishing denominator stays harmless
	aux.small = CMatrix::Zero(nS, nS);
	aux.small_rhs = CVector(nS);
	for (Eigen::Index a = 0; a < nS; ++a) {
		const Eigen::Index i = static_cast<Eigen::Index>(tr.index(excluded[static_cast<std::size_t>(a)]));
		aux.small(a, a) += rf.den(i);
		cplx rhs = rf.h(i);
		for (Eigen::Index m = 0; m < D; ++m) {
			const cplx c = rf.off(i, m);
			if (c == cplx{}) continue;
			if (in_S[static_cast<std::size_t>(m)]) {
				for (Eigen::Index b = 0; b < nS; ++b)
					if (static_cast<Eigen::Index>(tr.index(excluded[static_cast<std::size_t>(b)])) == m) aux.small(a, b) += c;
			} else {
				rhs -= c * aux.r(m);
				for (Eigen::Index b = 0; b < nS; ++b) aux.small(a, b) += c * aux.T[static_cast<std::size_t>(b)](m);
			}
		}
		aux.small_rhs(a) = rhs;
	}
	aux.qS = aux.small.fullPivLu().solve(aux.small_rhs);
	if (nS == 1) {
		const Eigen::Index i = static_cast<Eigen::Index>(tr.index(excluded[0]));
		cplx F = 0.0, G = 0.0;
		for (Eigen::Index m = 0; m < D; ++m) {
			const cplx c = rf.off(i, m);
			if (c == cplx{}) continue;
			F += c * aux.T[0](m);
			G -= c * aux.r(m);
		}
		aux.F = F;
		aux.G = G;
	}
	return aux;
}

// ---- branch coefficients near p = 0 ----

/// G'(p): the sqrt(p)-odd part of q_0 = (G + h_0(s))/(a + s), a = 4 pi alpha_0 + F,
/// evaluated as [Q(s) - Q(-s)] / (2 sqrt p) with F, G from the S = {0} decomposition.
inline cplx g_prime(const FourierAlpha& alpha, const ModeTruncation& tr, cplx p, const BoundState& init)
{
	if (p == cplx{}) throw Error(ErrorCode::DomainError, "use g_prime_at_zero for p = 0");
	auto aux = solve_auxiliary(alpha, tr, p, {0}, init);
	const cplx a = 4.0 * std::numbers::pi * alpha.mean() + aux.F;
	const cplx s = row_sqrt(0.0, p);
	auto Q = [&](cplx ss) { return (aux.G + source_h(ss, init)) / (a + ss); };
	return (Q(s) - Q(-s)) / (2.0 * sqrt_branch(p));
}

/// lim_{p -> 0+} G'(p) = sqrt(-i) [K (1 + a/beta) - G] / a^2 with K = 4 pi i sqrt(2|alpha_init|)/beta.
inline cplx g_prime_at_zero(const FourierAlpha& alpha, const ModeTruncation& tr, const BoundState& init)
{
	auto aux = solve_auxiliary(alpha, tr, cplx{0.0, 0.0}, {0}, init);
	const cplx a = 4.0 * std::numbers::pi * alpha.mean() + aux.F;
	if (std::abs(a) < 1e-14) throw Error(ErrorCode::NumericallySingular, "4 pi alpha_0 + F(0) vanishes");
	const double b = init.beta();
	const cplx K = cplx{0.0, 4.0 * std::numbers::pi * init.amplitude() / b};
	return sqrt_minus_i() * (K * (1.0 + a / b) - aux.G) / (a * a);
}

struct FitWindow {
	double p_min = 1e-6;
	double p_max = 1e-2;
	int count = 40;
};

struct BranchFit {
	int n = 0;
	cplx c = 0.0;
	cplx d = 0.0;
	std::vector<cplx> coeffs;      ///< in basis order
	std::vector<std::string> basis;
	double residual = 0.0;          ///< max |q_n - fit| on the window
	double relative_residual = 0.0; ///< residual / (|c| + |d|)
	FitWindow window;
	double arc_deviation = 0.0;     ///< max relative misfit on the complex arc |p| = p_max/10
	std::optional<cplx> inverse_sqrt_coeff; ///< coefficient of p^{-1/2} when requested
	std::optional<cplx> g_prime_zero;
	std::optional<double> g_prime_gap;     ///< |d - G'(0)| / |d|
};

struct BranchFitOptions {
	FitWindow window;
	bool include_inverse_sqrt = false;
	bool compare_g_prime = true;
	double poor_fit_tol = 1e-6;
	int sqrt_degree = 8; ///< basis p^{k/2}, k = 0..sqrt_degree
};

/// Least-squares fit q_n(p) = c + d sqrt(p) + sum_{k >= 2} e_k p^{k/2} on real p.
/// The higher terms soak up curvature so d is not biased by the window width.
inline BranchFit branch_fit(const FourierAlpha& alpha, const ModeTruncation& tr, int n, const BoundState& init,
                            const BranchFitOptions& opt = {})
{
	const auto& w = opt.window;
	if (!(w.p_min > 0.0) || !(w.p_max > w.p_min) || w.count < 8)
		throw Error(ErrorCode::InvalidArgument, "invalid branch-fit window");
	if (opt.sqrt_degree < 1) throw Error(ErrorCode::InvalidArgument, "branch fit needs the sqrt(p) term");
	std::vector<std::string> names{"1", "sqrt(p)"};
	for (int k = 2; k <= opt.sqrt_degree; ++k)
		names.push_back(k % 2 == 0 ? "p^" + std::to_string(k / 2) : "p^{" + std::to_string(k) + "/2}");
	if (opt.include_inverse_sqrt) names.push_back("p^{-1/2}");
	const auto nb = static_cast<Eigen::Index>(names.size());
	const auto deg = static_cast<Eigen::Index>(opt.sqrt_degree);
	if (w.count < nb + 4) throw Error(ErrorCode::InvalidArgument, "branch-fit window has too few points for the basis");
	auto basis_row = [&](cplx p) {
		const cplx sp = sqrt_branch(p);
		Eigen::RowVectorXcd row(nb);
		cplx pw = 1.0;
		for (Eigen::Index k = 0; k <= deg; ++k, pw *= sp) row(k) = pw;
		if (opt.include_inverse_sqrt) row(deg + 1) = 1.0 / sp;
		return row;
	};
	CMatrix X(w.count, nb);
	CVector y(w.count);
	std::vector<cplx> ps;
	for (int i = 0; i < w.count; ++i) {
		const double lp = std::log(w.p_min) + (std::log(w.p_max) - std::log(w.p_min)) * i / (w.count - 1);
		const cplx p{std::exp(lp), 0.0};
		ps.push_back(p);
		X.row(i) = basis_row(p);
		y(i) = solve_modes(alpha, tr, p, init).at(n);
	}
	Eigen::VectorXd scale = X.colwise().norm().transpose();
	CMatrix Xs = X;
	for (Eigen::Index j = 0; j < nb; ++j) Xs.col(j) /= scale(j);
	CVector beta = Xs.colPivHouseholderQr().solve(y);
	for (Eigen::Index j = 0; j < nb; ++j) beta(j) /= scale(j);

	BranchFit fit;
	fit.n = n;
	fit.window = w;
	fit.basis = names;
	for (Eigen::Index j = 0; j < nb; ++j) fit.coeffs.push_back(beta(j));
	fit.c = beta(0);
	fit.d = beta(1);
	if (opt.include_inverse_sqrt) fit.inverse_sqrt_coeff = beta(deg + 1);
	fit.residual = (X * beta - y).cwiseAbs().maxCoeff();
	const double scale_cd = std::abs(fit.c) + std::abs(fit.d);
	fit.relative_residual = scale_cd > 0.0 ? fit.residual / scale_cd : std::numeric_limits<double>::infinity();

	// complex arc, same representation off the real ray
	const double rho = w.p_max / 10.0;
	for (int i = 0; i < 9; ++i) {
		const double phi = -std::numbers::pi / 3.0 + (2.0 * std::numbers::pi / 3.0) * i / 8.0;
		const cplx p = std::polar(rho, phi);
		const cplx exact = solve_modes(alpha, tr, p, init).at(n);
		const cplx model = (basis_row(p) * beta)(0);
		fit.arc_deviation = std::max(fit.arc_deviation, std::abs(model - exact) / std::max(std::abs(exact), 1e-300));
	}

	if (opt.compare_g_prime && n == 0 && tr.mode_case != ModeCase::III) {
		try {
			const cplx gp = g_prime_at_zero(alpha, tr, init);
			fit.g_prime_zero = gp;
			fit.g_prime_gap = std::abs(fit.d - gp) / std::max(std::abs(fit.d), 1e-300);
		} catch (const Error&) {
			// resonant or non-generic: the S = {0} reduction does not apply
		}
	}
	if (!(fit.relative_residual <= opt.poor_fit_tol))
		throw Error(ErrorCode::PoorFit, "branch fit residual " + std::to_string(fit.relative_residual) + " relative");
	return fit;
}

// ---- positivity of the quadratic form ----

struct PositivityReport {
	int trials = 0;
	int K = 0;
	double min_form = 0.0;         ///< min over random vectors of (T, alpha T) / |T|^2
	double min_eigenvalue = 0.0;   ///< of the Toeplitz form at the final K
	bool nonnegative = true;
	std::optional<std::vector<cplx>> witness; ///< T with (T, alpha T) < 0, if found
	std::optional<double> witness_value;
	double min_alpha_sampled = 0.0;
	std::optional<bool> branch_fit_ok;
};

/// Toeplitz form H_{nk} = alpha_{n-k}, n, k = 1..K, i.e. the period average of alpha |T(t)|^2
/// for T(t) = sum_n T_n e^{-i n omega t}.
inline CMatrix toeplitz_form(const FourierAlpha& alpha, int K)
{
	CMatrix H = CMatrix::Zero(K, K);
	for (int n = 0; n < K; ++n)
		for (int k = 0; k < K; ++k) H(n, k) = alpha.coeff(n - k);
	return H;
}

inline PositivityReport positivity_check(const FourierAlpha& alpha, int trials = 100, int K = 32, unsigned seed = 12345,
                                         const BoundState* init = nullptr, int fit_M = 64)
{
	PositivityReport rep;
	rep.trials = trials;
	rep.K = K;
	double amin = std::numeric_limits<double>::infinity();
	for (int i = 0; i < 4096; ++i) amin = std::min(amin, eval_alpha(alpha, alpha.period() * i / 4096.0));
	rep.min_alpha_sampled = amin;

	std::mt19937_64 rng(seed);
	std::normal_distribution<double> nd(0.0, 1.0);
	CMatrix H = toeplitz_form(alpha, K);
	rep.min_form = std::numeric_limits<double>::infinity();
	for (int t = 0; t < trials; ++t) {
		CVector T(K);
		for (int n = 0; n < K; ++n) T(n) = cplx{nd(rng), nd(rng)};
		const double v = (T.adjoint() * H * T)(0).real() / T.squaredNorm();
		rep.min_form = std::min(rep.min_form, v);
	}
	if (trials == 0) rep.min_form = 0.0;
	const double scale = std::max(alpha.ell1_norm(), 1e-300);

	// witness: lowest eigenvector, growing K until the form turns negative
	int k = K;
	double lam = 0.0;
	CVector vec;
	for (;; k *= 2) {
		Eigen::SelfAdjointEigenSolver<CMatrix> es(toeplitz_form(alpha, k));
		lam = es.eigenvalues()(0);
		vec = es.eigenvectors().col(0);
		if (lam < -1e-12 * scale || k >= 512) break;
	}
	rep.min_eigenvalue = lam;
	rep.K = k;
	if (lam < -1e-12 * scale) {
		rep.witness = std::vector<cplx>(vec.data(), vec.data() + vec.size());
		rep.witness_value = lam;
	}
	rep.nonnegative = rep.min_form >= -1e-12 * scale && !rep.witness;

	if (init) {
		try {
			BranchFitOptions bo;
			bo.compare_g_prime = false;
			branch_fit(alpha, ModeTruncation::for_model(alpha, fit_M), 0, *init, bo);
			rep.branch_fit_ok = true;
		} catch (const Error&) {
			rep.branch_fit_ok = false;
		}
	}
	return rep;
}

} // namespace ionize3d

#endif // IONIZE3D_LAPLACE_MODES_HPP
