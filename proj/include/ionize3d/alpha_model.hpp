#ifndef IONIZE3D_ALPHA_MODEL_HPP
#define IONIZE3D_ALPHA_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"

namespace ionize3d {

/// Periodic coupling alpha(t) = sum_n alpha_n e^{-i n omega t} with finite
/// support. Reality alpha_{-n} = conj(alpha_n) is enforced at construction.
class FourierAlpha {
public:
	FourierAlpha() = default;

	/// Full coefficient map; both n and -n must be present (or absent) and
	/// conjugate to each other within a relative 1e-12.
	FourierAlpha(double omega, std::map<int, cplx> coeffs)
		: omega_(omega)
		, coeffs_(std::move(coeffs))
	{
		if (!(omega_ > 0.0) || !std::isfinite(omega_))
			throw Error(ErrorCode::InvalidArgument, "omega must be positive and finite");
		double scale = 0.0;
		for (const auto& [n, a] : coeffs_) {
			if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
				throw Error(ErrorCode::InvalidArgument, "non-finite coefficient at n=" + std::to_string(n));
			scale = std::max(scale, std::abs(a));
		}
		const double tol = 1e-12 * std::max(scale, 1e-300);
		for (const auto& [n, a] : coeffs_) {
			auto it = coeffs_.find(-n);
			cplx mirror = it == coeffs_.end() ? cplx{0.0} : it->second;
			if (std::abs(a - std::conj(mirror)) > tol)
				throw Error(ErrorCode::InvalidArgument,
				            "reality condition alpha_{-n} = conj(alpha_n) violated at n=" + std::to_string(n));
		}
		// store exactly conjugate-symmetric values
		for (auto& [n, a] : coeffs_) {
			if (n == 0) a = {a.real(), 0.0};
			else if (n < 0) {
				auto it = coeffs_.find(-n);
				a = it == coeffs_.end() ? cplx{0.0} : std::conj(it->second);
			}
		}
		std::erase_if(coeffs_, [](const auto& kv) { return kv.second == cplx{0.0}; });
	}

	/// Builds the model from alpha_0 (real) and alpha_1, alpha_2, ...
	static FourierAlpha from_positive(double omega, double alpha0, const std::vector<cplx>& positive)
	{
		std::map<int, cplx> c;
		c[0] = alpha0;
		for (std::size_t i = 0; i < positive.size(); ++i) {
			int n = static_cast<int>(i) + 1;
			c[n] = positive[i];
			c[-n] = std::conj(positive[i]);
		}
		return FourierAlpha(omega, std::move(c));
	}

	static FourierAlpha constant(double alpha0, double omega = 1.0)
	{
		return FourierAlpha(omega, {{0, cplx{alpha0}}});
	}

	double omega() const noexcept { return omega_; }
	double period() const noexcept { return 2.0 * std::numbers::pi / omega_; }
	const std::map<int, cplx>& coeffs() const noexcept { return coeffs_; }

	cplx coeff(int n) const noexcept
	{
		auto it = coeffs_.find(n);
		return it == coeffs_.end() ? cplx{0.0} : it->second;
	}

	/// Mean alpha_0.
	double mean() const noexcept { return coeff(0).real(); }

	/// alpha(0) = sum_n alpha_n.
	double at_zero() const noexcept
	{
		double s = 0.0;
		for (const auto& [n, a] : coeffs_) s += a.real();
		return s;
	}

	int support_radius() const noexcept
	{
		int r = 0;
		for (const auto& [n, a] : coeffs_) r = std::max(r, std::abs(n));
		return r;
	}

	double ell1_norm() const noexcept
	{
		double s = 0.0;
		for (const auto& [n, a] : coeffs_) s += std::abs(a);
		return s;
	}

	/// sum_{|k| > cutoff} |alpha_k|
	double ell1_tail(int cutoff) const noexcept
	{
		double s = 0.0;
		for (const auto& [n, a] : coeffs_)
			if (std::abs(n) > cutoff) s += std::abs(a);
		return s;
	}

	/// sup_t |alpha(t)| bounded by the l1 norm.
	double sup_bound() const noexcept { return ell1_norm(); }

	/// Positive-index tail (alpha_1, alpha_2, ..., alpha_support).
	std::vector<cplx> positive_tail() const
	{
		std::vector<cplx> v(static_cast<std::size_t>(support_radius()));
		for (const auto& [n, a] : coeffs_)
			if (n > 0) v[static_cast<std::size_t>(n - 1)] = a;
		return v;
	}

	FourierAlpha scaled(double coeff_factor, double omega_factor) const
	{
		std::map<int, cplx> c;
		for (const auto& [n, a] : coeffs_) c[n] = a * coeff_factor;
		return FourierAlpha(omega_ * omega_factor, std::move(c));
	}

private:
	double omega_ = 1.0;
	std::map<int, cplx> coeffs_;
};

/// alpha(t), returned as a real number (imaginary parts cancel pairwise).
inline double eval_alpha(const FourierAlpha& model, double t) noexcept
{
	double v = model.mean();
	for (const auto& [n, a] : model.coeffs()) {
		if (n <= 0) continue;
		double ph = -n * model.omega() * t;
		v += 2.0 * (a.real() * std::cos(ph) - a.imag() * std::sin(ph));
	}
	return v;
}

struct Normalized {
	FourierAlpha model;
	double scale = 1.0; ///< alpha_n -> alpha_n / scale, omega -> omega / scale^2
};

/// Rescales lengths so that alpha(0) = -1/(4 pi).
inline Normalized normalize(const FourierAlpha& model)
{
	const double a0 = model.at_zero();
	if (!(a0 < 0.0))
		throw Error(ErrorCode::NonNegativeAlphaZeroAtStart,
		            "alpha(0) = " + std::to_string(a0) + " must be negative to normalize");
	const double s = 4.0 * std::numbers::pi * (-a0);
	return {model.scaled(1.0 / s, 1.0 / (s * s)), s};
}

// ---------------------------------------------------------------------------
// Resonance structure

struct NegativeMean {
	int n_bar = 0;
	cplx p_bar; ///< purely imaginary, Im in [0, omega)
};
struct NegativeMeanResonant {
	int N = 1;
};
struct ZeroMean {};
struct PositiveMean {};

using ResonanceClass = std::variant<NegativeMean, NegativeMeanResonant, ZeroMean, PositiveMean>;

inline std::string resonance_name(const ResonanceClass& rc)
{
	return std::visit(
		[](const auto& v) -> std::string {
			using T = std::decay_t<decltype(v)>;
			if constexpr (std::is_same_v<T, NegativeMean>) return "NegativeMean";
			else if constexpr (std::is_same_v<T, NegativeMeanResonant>) return "NegativeMeanResonant";
			else if constexpr (std::is_same_v<T, ZeroMean>) return "ZeroMean";
			else return "PositiveMean";
		},
		rc);
}

inline constexpr double default_resonance_tol = 1e-9;

/// Sign of the mean and location of the possible imaginary-axis singularity.
/// |alpha_0| <= tol * ||alpha||_1 counts as zero mean.
inline ResonanceClass classify_resonance(const FourierAlpha& model, double tol = default_resonance_tol)
{
	const double a0 = model.mean();
	const double scale = std::max(model.ell1_norm(), 1e-300);
	if (std::abs(a0) <= tol * scale) return ZeroMean{};
	if (a0 > 0.0) return PositiveMean{};
	const double e = std::pow(4.0 * std::numbers::pi * a0, 2);
	const double x = e / model.omega();
	const double N = std::round(x);
	if (N >= 1.0 && std::abs(e - N * model.omega()) <= tol * model.omega())
		return NegativeMeanResonant{static_cast<int>(N)};
	const int n_bar = static_cast<int>(std::floor(x));
	return NegativeMean{n_bar, cplx{0.0, e - model.omega() * n_bar}};
}

// ---------------------------------------------------------------------------
// Genericity of the positive-index tail with respect to the shift

enum class GenericityVerdict { Generic, NonGeneric, Inconclusive };

inline std::string verdict_name(GenericityVerdict v)
{
	switch (v) {
	case GenericityVerdict::Generic: return "Generic";
	case GenericityVerdict::NonGeneric: return "NonGeneric";
	default: return "Inconclusive";
	}
}

struct GenericityReport {
	std::vector<double> residuals; ///< r_N for N = 0..N_max
	GenericityVerdict verdict = GenericityVerdict::Inconclusive;
	double threshold = 1e-8;
	double plateau_value = 0.0;
	bool ill_conditioned = false;   ///< some shifted column fell below the rank tolerance
	int dropped_columns = 0;
	std::size_t window = 0;
};

struct GenericityOptions {
	double threshold = 1e-8;
	double plateau_decrement = 1e-10;
	int plateau_run = 20;
	double rank_tol = 1e-10; ///< relative to the norm of the unshifted tail
};

/// Distance from e_1 to span{T^n alpha~ : n <= N} for N = 0..n_max.
/// Computed by incremental modified Gram-Schmidt (with reorthogonalisation)
/// over a window long enough that truncation is exact for finite support.
inline GenericityReport genericity_residuals(const FourierAlpha& model, int n_max,
                                             const GenericityOptions& opt = {})
{
	if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 0");
	GenericityReport rep;
	rep.threshold = opt.threshold;
	const std::vector<cplx> tail = model.positive_tail();
	const std::size_t L = tail.size() + static_cast<std::size_t>(n_max) + 1;
	rep.window = L;

	double tail_norm = 0.0;
	for (const auto& a : tail) tail_norm += std::norm(a);
	tail_norm = std::sqrt(tail_norm);

	if (tail_norm == 0.0) {
		rep.residuals.assign(static_cast<std::size_t>(n_max) + 1, 1.0);
		rep.verdict = GenericityVerdict::NonGeneric;
		rep.plateau_value = 1.0;
		return rep;
	}

	std::vector<std::vector<cplx>> basis;
	std::vector<cplx> residual(L, cplx{0.0});
	residual[0] = 1.0;
	const double drop_tol = opt.rank_tol * tail_norm;

	auto dot = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
		cplx s = 0.0;
		for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
		return s;
	};
	auto nrm = [](const std::vector<cplx>& a) {
		double s = 0.0;
		for (const auto& x : a) s += std::norm(x);
		return std::sqrt(s);
	};

	for (int n = 0; n <= n_max; ++n) {
		// (T^n alpha~)_m = alpha_{n+m}, m = 1..L
		std::vector<cplx> col(L, cplx{0.0});
		for (std::size_t m = 0; m < L; ++m) {
			std::size_t idx = static_cast<std::size_t>(n) + m;
			if (idx < tail.size()) col[m] = tail[idx];
		}
		const double raw = nrm(col);
		for (int pass = 0; pass < 2; ++pass)
			for (const auto& b : basis) {
				cplx c = dot(b, col);
				for (std::size_t i = 0; i < L; ++i) col[i] -= c * b[i];
			}
		double cn = nrm(col);
		if (cn > drop_tol) {
			for (auto& x : col) x /= cn;
			cplx c = dot(col, residual);
			for (std::size_t i = 0; i < L; ++i) residual[i] -= c * col[i];
			basis.push_back(std::move(col));
		} else if (raw > 0.0) {
			// a non-zero shift that adds nothing above the rank tolerance
			rep.ill_conditioned = true;
			++rep.dropped_columns;
		}
		double r = std::min(1.0, nrm(residual));
		if (!rep.residuals.empty()) r = std::min(r, rep.residuals.back());
		rep.residuals.push_back(r);
	}

	const double last = rep.residuals.back();
	rep.plateau_value = last;
	if (last < opt.threshold) {
		rep.verdict = GenericityVerdict::Generic;
	} else {
		const int run = opt.plateau_run;
		bool plateau = static_cast<int>(rep.residuals.size()) > run;
		if (plateau) {
			const std::size_t start = rep.residuals.size() - static_cast<std::size_t>(run) - 1;
			for (std::size_t i = start; i + 1 < rep.residuals.size(); ++i)
				if (rep.residuals[i] - rep.residuals[i + 1] >= opt.plateau_decrement) plateau = false;
		}
		rep.verdict = plateau ? GenericityVerdict::NonGeneric : GenericityVerdict::Inconclusive;
	}
	return rep;
}

} // namespace ionize3d

#endif // IONIZE3D_ALPHA_MODEL_HPP
