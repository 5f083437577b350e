#ifndef IONIZE3D_TIME_GRID_HPP
#define IONIZE3D_TIME_GRID_HPP

#include <cmath>
#include <cstddef>
#include <string>

#include "error.hpp"

namespace ionize3d {

/// Uniform grid t_j = j h, j = 0..count-1.
class TimeGrid {
public:
	TimeGrid(double step, std::size_t count)
		: h_(step)
		, n_(count)
	{
		if (!(h_ > 0.0) || !std::isfinite(h_)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
		if (n_ < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least two points");
	}

	/// Grid covering [0, t_end] with step h (t_end rounded to the nearest step).
	static TimeGrid covering(double step, double t_end)
	{
		if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
		if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive");
		auto steps = static_cast<std::size_t>(std::llround(t_end / step));
		return TimeGrid(step, steps + 1);
	}

	double step() const noexcept { return h_; }
	std::size_t size() const noexcept { return n_; }
	double t(std::size_t j) const noexcept { return static_cast<double>(j) * h_; }
	double t_end() const noexcept { return t(n_ - 1); }

	/// Index of the grid point nearest to t (clamped).
	std::size_t index_of(double time) const noexcept
	{
		if (time <= 0.0) return 0;
		auto j = static_cast<std::size_t>(std::llround(time / h_));
		return j >= n_ ? n_ - 1 : j;
	}

	bool operator==(const TimeGrid&) const = default;

private:
	double h_;
	std::size_t n_;
};

} // namespace ionize3d

#endif // IONIZE3D_TIME_GRID_HPP
