#ifndef IONIZE3D_ERROR_HPP
#define IONIZE3D_ERROR_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ionize3d {

using cplx = std::complex<double>;

enum class ErrorCode {
	InvalidArgument,
	DomainError,
	NonNegativeAlphaZeroAtStart,
	StepIllConditioned,
	TailDominates,
	SingularRow,
	NumericallySingular,
	PoorFit,
	WindowTooNoisy,
	QuadratureNonConvergence,
	EndpointSingular,
	InvalidConfig,
	Io,
};

constexpr std::string_view to_string(ErrorCode c) noexcept
{
	switch (c) {
	case ErrorCode::InvalidArgument: return "InvalidArgument";
	case ErrorCode::DomainError: return "DomainError";
	case ErrorCode::NonNegativeAlphaZeroAtStart: return "NonNegativeAlphaZeroAtStart";
	case ErrorCode::StepIllConditioned: return "StepIllConditioned";
	case ErrorCode::TailDominates: return "TailDominates";
	case ErrorCode::SingularRow: return "SingularRow";
	case ErrorCode::NumericallySingular: return "NumericallySingular";
	case ErrorCode::PoorFit: return "PoorFit";
	case ErrorCode::WindowTooNoisy: return "WindowTooNoisy";
	case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
	case ErrorCode::EndpointSingular: return "EndpointSingular";
	case ErrorCode::InvalidConfig: return "InvalidConfig";
	case ErrorCode::Io: return "Io";
	}
	return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
	Error(ErrorCode code, const std::string& what)
		: std::runtime_error(std::string(to_string(code)) + ": " + what)
		, code_(code)
	{
	}

	ErrorCode code() const noexcept { return code_; }

private:
	ErrorCode code_;
};

} // namespace ionize3d

#endif // IONIZE3D_ERROR_HPP
