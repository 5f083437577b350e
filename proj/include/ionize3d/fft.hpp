#ifndef IONIZE3D_FFT_HPP
#define IONIZE3D_FFT_HPP

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "error.hpp"

namespace ionize3d::fft {

namespace detail {

// fftw planning is not thread-safe, execution with new-array calls is
inline std::mutex& planner_mutex()
{
	static std::mutex m;
	return m;
}

class Plan {
public:
	explicit Plan(std::size_t n)
		: n_(n)
	{
		std::lock_guard<std::mutex> lock(planner_mutex());
		auto* buf = fftw_alloc_complex(n);
		const int len = static_cast<int>(n);
		fwd_ = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
		bwd_ = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
		fftw_free(buf);
		if (!fwd_ || !bwd_) throw Error(ErrorCode::InvalidArgument, "fftw planning failed");
	}
	Plan(const Plan&) = delete;
	Plan& operator=(const Plan&) = delete;
	~Plan()
	{
		std::lock_guard<std::mutex> lock(planner_mutex());
		fftw_destroy_plan(fwd_);
		fftw_destroy_plan(bwd_);
	}

	void forward(cplx* data) const { fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data)); }
	void backward(cplx* data) const { fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data)); }
	std::size_t size() const noexcept { return n_; }

private:
	std::size_t n_;
	fftw_plan fwd_ = nullptr;
	fftw_plan bwd_ = nullptr;
};

} // namespace detail

/// Per-thread plan cache.
inline const detail::Plan& plan(std::size_t n)
{
	thread_local std::map<std::size_t, std::unique_ptr<detail::Plan>> cache;
	auto& slot = cache[n];
	if (!slot) slot = std::make_unique<detail::Plan>(n);
	return *slot;
}

inline std::size_t next_pow2(std::size_t n)
{
	std::size_t m = 1;
	while (m < n) m <<= 1;
	return m;
}

/// In place, unnormalized.
inline void forward(std::vector<cplx>& v) { plan(v.size()).forward(v.data()); }
/// In place, divides by n.
inline void inverse(std::vector<cplx>& v)
{
	plan(v.size()).backward(v.data());
	const double s = 1.0 / static_cast<double>(v.size());
	for (auto& x : v) x *= s;
}

/// Linear convolution c[m] = sum_i a[i] b[m-i], truncated to `keep` entries.
inline std::vector<cplx> convolve(const std::vector<cplx>& a, const std::vector<cplx>& b, std::size_t keep)
{
	if (a.empty() || b.empty()) return std::vector<cplx>(keep);
	const std::size_t n = next_pow2(a.size() + b.size() - 1);
	std::vector<cplx> fa(n), fb(n);
	std::copy(a.begin(), a.end(), fa.begin());
	std::copy(b.begin(), b.end(), fb.begin());
	forward(fa);
	forward(fb);
	for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
	inverse(fa);
	fa.resize(keep);
	return fa;
}

} // namespace ionize3d::fft

#endif // IONIZE3D_FFT_HPP
