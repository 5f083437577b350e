#ifndef IONIZE3D_PARALLEL_HPP
#define IONIZE3D_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ionize3d {

/// Worker count: IONIZE3D_THREADS if set to a positive integer, else hardware concurrency.
inline unsigned thread_count()
{
	if (const char* env = std::getenv("IONIZE3D_THREADS")) {
		char* end = nullptr;
		long v = std::strtol(env, &end, 10);
		if (end != env && v > 0) return static_cast<unsigned>(v);
	}
	return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(i) for i in [0, n). Results must go to disjoint slots; order of
/// execution is unspecified but every output is deterministic.
template <class F>
void parallel_for(std::size_t n, F&& f)
{
	const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
	if (workers <= 1) {
		for (std::size_t i = 0; i < n; ++i) f(i);
		return;
	}
	std::atomic<std::size_t> next{0};
	std::exception_ptr err;
	std::mutex err_mutex;
	std::vector<std::thread> pool;
	for (unsigned w = 0; w < workers; ++w)
		pool.emplace_back([&] {
			for (std::size_t i = next++; i < n; i = next++) {
				try {
					f(i);
				} catch (...) {
					std::lock_guard<std::mutex> lock(err_mutex);
					if (!err) err = std::current_exception();
				}
			}
		});
	for (auto& t : pool) t.join();
	if (err) std::rethrow_exception(err);
}

} // namespace ionize3d

#endif // IONIZE3D_PARALLEL_HPP
