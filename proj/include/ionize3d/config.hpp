#ifndef IONIZE3D_CONFIG_HPP
#define IONIZE3D_CONFIG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "alpha_model.hpp"
#include "error.hpp"
#include "io.hpp"
#include "laplace_modes.hpp"

namespace ionize3d {

struct Coefficient {
	int n = 0;
	double re = 0.0;
	double im = 0.0;
};

struct ExperimentConfig {
	std::string name = "experiment";
	// drive
	double omega = 1.0;
	std::vector<Coefficient> coefficients;
	std::string case_hint = "auto"; ///< auto | I | II | III
	double resonance_tol = default_resonance_tol;
	// initial state
	std::string initial_kind = "bound_state"; ///< bound_state | gaussian
	std::optional<double> initial_alpha;      ///< default: alpha(0) if negative, else -1/(4 pi)
	double gaussian_sigma = 1.0;
	// grid
	double h = 1e-3;
	double t_end = 20.0;
	// modes
	int M = 64;
	std::vector<double> eps_ladder{1e-3, 1e-4, 1e-5, 1e-6};
	int s_density = 64; ///< scan points per drive period
	FitWindow fit_window;
	int duality_points = 10;
	// genericity
	int genericity_n_max = 200;
	// observables
	std::vector<double> radii{2.0};
	std::optional<std::array<double, 2>> decay_window; ///< default [T/4, 0.9 T]
	std::size_t ball_stride = 500;
	double cesaro_start = 20.0;
	// outputs
	std::string out_dir = "out";
	bool write_csv = true;
	bool write_json = true;
	std::size_t csv_stride = 1;
	unsigned seed = 12345;

	FourierAlpha alpha() const;
	double resolved_initial_alpha() const;
	std::array<double, 2> resolved_decay_window() const { return decay_window.value_or(std::array<double, 2>{0.25 * t_end, 0.9 * t_end}); }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

inline void reject_unknown(const ordered_json& obj, const std::set<std::string>& allowed, const std::string& where)
{
	if (!obj.is_object()) config_error(where + " must be an object");
	for (const auto& [k, v] : obj.items())
		if (!allowed.count(k)) config_error("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

template <class T>
void read(const ordered_json& obj, const char* key, T& dst, const std::string& where)
{
	if (!obj.contains(key)) return;
	try {
		dst = obj.at(key).get<T>();
	} catch (const nlohmann::json::exception& e) {
		config_error(where + "." + key + ": " + e.what());
	}
}

} // namespace detail

inline FourierAlpha ExperimentConfig::alpha() const
{
	std::map<int, cplx> given;
	for (const auto& c : coefficients) {
		if (given.count(c.n)) detail::config_error("coefficient n=" + std::to_string(c.n) + " given twice");
		given[c.n] = cplx{c.re, c.im};
	}
	const double a0 = given.count(0) ? given[0].real() : 0.0;
	if (given.count(0) && given[0].imag() != 0.0) detail::config_error("alpha_0 must be real");
	int top = 0;
	for (const auto& [n, a] : given) top = std::max(top, std::abs(n));
	std::vector<cplx> pos(static_cast<std::size_t>(top), cplx{});
	for (const auto& [n, a] : given) {
		if (n > 0) pos[static_cast<std::size_t>(n - 1)] = a;
		if (n >= 0) continue;
		// a negative index only restates its partner
		if (!given.count(-n)) {
			pos[static_cast<std::size_t>(-n - 1)] = std::conj(a);
		} else if (std::abs(given.at(-n) - std::conj(a)) > 1e-15 * (1.0 + std::abs(a))) {
			detail::config_error("coefficients n=" + std::to_string(-n) + " and n=" + std::to_string(n) +
			                     " violate alpha_{-n} = conj(alpha_n)");
		}
	}
	if (!(omega > 0.0) || !std::isfinite(omega)) detail::config_error("drive.omega must be positive");
	return FourierAlpha::from_positive(omega, a0, pos);
}

inline double ExperimentConfig::resolved_initial_alpha() const
{
	if (initial_alpha) return *initial_alpha;
	const double a = alpha().at_zero();
	return a < 0.0 ? a : -1.0 / (4.0 * std::numbers::pi);
}

/// Parse and validate. Missing keys keep their defaults; unknown keys are errors.
inline ExperimentConfig parse_config(const ordered_json& j)
{
	using detail::read;
	detail::reject_unknown(j, {"name", "drive", "initial_state", "grid", "modes", "genericity", "observables", "outputs", "seed"}, "");
	ExperimentConfig c;
	read(j, "name", c.name, "");
	read(j, "seed", c.seed, "");
	if (!j.contains("drive")) detail::config_error("drive section is required");
	{
		const auto& d = j.at("drive");
		detail::reject_unknown(d, {"omega", "coefficients", "case_hint", "resonance_tol"}, "drive");
		read(d, "omega", c.omega, "drive");
		read(d, "case_hint", c.case_hint, "drive");
		read(d, "resonance_tol", c.resonance_tol, "drive");
		if (d.contains("coefficients")) {
			const auto& list = d.at("coefficients");
			if (!list.is_array()) detail::config_error("drive.coefficients must be a list of [n, re, im]");
			for (const auto& e : list) {
				if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer())
					detail::config_error("drive.coefficients entries must be [n, re] or [n, re, im]");
				c.coefficients.push_back({e[0].get<int>(), e[1].get<double>(), e.size() == 3 ? e[2].get<double>() : 0.0});
			}
		}
	}
	if (j.contains("initial_state")) {
		const auto& s = j.at("initial_state");
		detail::reject_unknown(s, {"kind", "alpha", "sigma"}, "initial_state");
		read(s, "kind", c.initial_kind, "initial_state");
		if (s.contains("alpha") && !s.at("alpha").is_null()) c.initial_alpha = s.at("alpha").get<double>();
		read(s, "sigma", c.gaussian_sigma, "initial_state");
	}
	if (j.contains("grid")) {
		const auto& g = j.at("grid");
		detail::reject_unknown(g, {"h", "t_end"}, "grid");
		read(g, "h", c.h, "grid");
		read(g, "t_end", c.t_end, "grid");
	}
	if (j.contains("modes")) {
		const auto& m = j.at("modes");
		detail::reject_unknown(m, {"M", "eps_ladder", "s_density", "fit_window", "duality_points"}, "modes");
		read(m, "M", c.M, "modes");
		read(m, "eps_ladder", c.eps_ladder, "modes");
		read(m, "s_density", c.s_density, "modes");
		read(m, "duality_points", c.duality_points, "modes");
		if (m.contains("fit_window")) {
			const auto& w = m.at("fit_window");
			detail::reject_unknown(w, {"p_min", "p_max", "count"}, "modes.fit_window");
			read(w, "p_min", c.fit_window.p_min, "modes.fit_window");
			read(w, "p_max", c.fit_window.p_max, "modes.fit_window");
			read(w, "count", c.fit_window.count, "modes.fit_window");
		}
	}
	if (j.contains("genericity")) {
		const auto& g = j.at("genericity");
		detail::reject_unknown(g, {"n_max"}, "genericity");
		read(g, "n_max", c.genericity_n_max, "genericity");
	}
	if (j.contains("observables")) {
		const auto& o = j.at("observables");
		detail::reject_unknown(o, {"radii", "decay_window", "ball_stride", "cesaro_start"}, "observables");
		read(o, "radii", c.radii, "observables");
		if (o.contains("decay_window") && !o.at("decay_window").is_null())
			c.decay_window = o.at("decay_window").get<std::array<double, 2>>();
		read(o, "ball_stride", c.ball_stride, "observables");
		read(o, "cesaro_start", c.cesaro_start, "observables");
	}
	if (j.contains("outputs")) {
		const auto& o = j.at("outputs");
		detail::reject_unknown(o, {"directory", "csv", "json", "csv_stride"}, "outputs");
		read(o, "directory", c.out_dir, "outputs");
		read(o, "csv", c.write_csv, "outputs");
		read(o, "json", c.write_json, "outputs");
		read(o, "csv_stride", c.csv_stride, "outputs");
	}

	// validation
	if (!(c.h > 0.0) || !std::isfinite(c.h)) detail::config_error("grid.h must be positive");
	if (!(c.t_end > c.h)) detail::config_error("grid.t_end must exceed grid.h");
	const auto model = c.alpha();
	if (c.M < model.support_radius()) detail::config_error("modes.M must be >= the support radius of the drive");
	if (c.case_hint != "auto" && c.case_hint != "I" && c.case_hint != "II" && c.case_hint != "III")
		detail::config_error("drive.case_hint must be auto, I, II or III");
	if (c.case_hint != "auto" && c.case_hint != mode_case_name(mode_case_of(model, c.resonance_tol)))
		detail::config_error("drive.case_hint " + c.case_hint + " contradicts the mean of the drive (case " +
		                     mode_case_name(mode_case_of(model, c.resonance_tol)) + ")");
	if (c.initial_kind != "bound_state" && c.initial_kind != "gaussian")
		detail::config_error("initial_state.kind must be bound_state or gaussian");
	if (c.initial_kind == "bound_state" && !(c.resolved_initial_alpha() < 0.0))
		detail::config_error("initial_state.alpha must be negative");
	if (c.initial_kind == "gaussian" && !(c.gaussian_sigma > 0.0)) detail::config_error("initial_state.sigma must be positive");
	for (double e : c.eps_ladder)
		if (!(e > 0.0)) detail::config_error("modes.eps_ladder entries must be positive");
	if (c.eps_ladder.empty()) detail::config_error("modes.eps_ladder must not be empty");
	if (c.s_density < 1) detail::config_error("modes.s_density must be >= 1");
	if (c.duality_points < 1) detail::config_error("modes.duality_points must be >= 1");
	if (c.genericity_n_max < 0) detail::config_error("genericity.n_max must be >= 0");
	for (double r : c.radii)
		if (!(r > 0.0)) detail::config_error("observables.radii must be positive");
	const auto w = c.resolved_decay_window();
	if (!(w[0] > 0.0) || !(w[1] > w[0])) detail::config_error("observables.decay_window must satisfy 0 < t1 < t2");
	if (c.ball_stride == 0) detail::config_error("observables.ball_stride must be positive");
	if (c.csv_stride == 0) detail::config_error("outputs.csv_stride must be positive");
	return c;
}

/// The config with every default materialized.
inline ordered_json resolved_json(const ExperimentConfig& c)
{
	ordered_json j;
	j["name"] = c.name;
	ordered_json coeffs = ordered_json::array();
	for (const auto& e : c.coefficients) coeffs.push_back({e.n, e.re, e.im});
	j["drive"] = {{"omega", c.omega}, {"coefficients", coeffs}, {"case_hint", c.case_hint}, {"resonance_tol", c.resonance_tol}};
	if (c.initial_kind == "bound_state")
		j["initial_state"] = {{"kind", c.initial_kind}, {"alpha", c.resolved_initial_alpha()}};
	else
		j["initial_state"] = {{"kind", c.initial_kind}, {"sigma", c.gaussian_sigma}};
	j["grid"] = {{"h", c.h}, {"t_end", c.t_end}};
	j["modes"] = {{"M", c.M},
	              {"eps_ladder", c.eps_ladder},
	              {"s_density", c.s_density},
	              {"fit_window", {{"p_min", c.fit_window.p_min}, {"p_max", c.fit_window.p_max}, {"count", c.fit_window.count}}},
	              {"duality_points", c.duality_points}};
	j["genericity"] = {{"n_max", c.genericity_n_max}};
	const auto w = c.resolved_decay_window();
	j["observables"] = {{"radii", c.radii},
	                    {"decay_window", {w[0], w[1]}},
	                    {"ball_stride", c.ball_stride},
	                    {"cesaro_start", c.cesaro_start}};
	j["outputs"] = {{"directory", c.out_dir}, {"csv", c.write_csv}, {"json", c.write_json}, {"csv_stride", c.csv_stride}};
	j["seed"] = c.seed;
	return j;
}

/// Applies key=value with a dotted key path. The value is read as JSON when it
/// parses, otherwise as a plain string.
inline void apply_override(ordered_json& j, const std::string& assignment)
{
	const auto eq = assignment.find('=');
	if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::InvalidConfig, "override '" + assignment + "' is not key=value");
	const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
	ordered_json value;
	try {
		value = ordered_json::parse(raw);
	} catch (const nlohmann::json::exception&) {
		value = raw;
	}
	ordered_json* node = &j;
	std::size_t start = 0;
	for (;;) {
		const auto dot = key.find('.', start);
		const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
		if (part.empty()) throw Error(ErrorCode::InvalidConfig, "override key '" + key + "' has an empty component");
		if (!node->is_object()) {
			if (!node->is_null()) throw Error(ErrorCode::InvalidConfig, "override key '" + key + "' descends into a non-object");
			*node = ordered_json::object();
		}
		if (dot == std::string::npos) {
			(*node)[part] = value;
			return;
		}
		node = &(*node)[part];
		start = dot + 1;
	}
}

} // namespace ionize3d

#endif // IONIZE3D_CONFIG_HPP
