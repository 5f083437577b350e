#ifndef IONIZE3D_PIPELINE_HPP
#define IONIZE3D_PIPELINE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "alpha_model.hpp"
#include "charge_solver.hpp"
#include "config.hpp"
#include "free_dynamics.hpp"
#include "io.hpp"
#include "laplace_modes.hpp"
#include "observables.hpp"
#include "parallel.hpp"

namespace ionize3d {

inline constexpr const char* version_string = "1.0.0";

/// Pass/fail thresholds shared by the CLI flags and the acceptance binary.
namespace tolerances {
inline constexpr double stationary = 1e-3;
inline constexpr double unitarity = 5e-3;       // |theta| <= 1 + 5 * 1e-3
inline constexpr double exponent_lo = -1.7;
inline constexpr double exponent_hi = -1.3;
inline constexpr double min_r2 = 0.95;
inline constexpr double duality = 1e-2;
inline constexpr double branch_residual = 1e-4;
inline constexpr double g_prime_gap = 1e-3;
inline constexpr double resonant_variation = 10.0;
inline constexpr double case3_condition = 1e6;
inline constexpr double cesaro_ratio = 0.25;
} // namespace tolerances

enum class Stage { Classify, Genericity, Solve, Survival, Ball, Modes, BranchFit, DecayFit };

inline std::string stage_name(Stage s)
{
	switch (s) {
	case Stage::Classify: return "classify";
	case Stage::Genericity: return "genericity";
	case Stage::Solve: return "solve";
	case Stage::Survival: return "survival";
	case Stage::Ball: return "ball";
	case Stage::Modes: return "modes";
	case Stage::BranchFit: return "branchfit";
	default: return "decayfit";
	}
}

inline std::vector<Stage> stages_for(const std::string& sub)
{
	using S = Stage;
	if (sub == "classify") return {S::Classify};
	if (sub == "genericity") return {S::Classify, S::Genericity};
	if (sub == "solve") return {S::Classify, S::Solve};
	if (sub == "survival") return {S::Classify, S::Solve, S::Survival};
	if (sub == "modes") return {S::Classify, S::Solve, S::Modes};
	if (sub == "branchfit") return {S::Classify, S::BranchFit};
	if (sub == "decayfit") return {S::Classify, S::Genericity, S::Solve, S::Survival, S::DecayFit};
	if (sub == "full")
		return {S::Classify, S::Genericity, S::Solve, S::Survival, S::Ball, S::Modes, S::BranchFit, S::DecayFit};
	throw Error(ErrorCode::InvalidArgument, "unknown subcommand '" + sub + "'");
}

struct RunResult {
	ordered_json report;
	bool all_pass = true;
	std::vector<std::filesystem::path> artifacts;
};

namespace detail {

inline ordered_json cplx_json(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

inline double min_alpha(const FourierAlpha& a)
{
	double m = std::numeric_limits<double>::infinity();
	for (int i = 0; i < 4096; ++i) m = std::min(m, eval_alpha(a, a.period() * i / 4096.0));
	return m;
}

class Pipeline {
public:
	explicit Pipeline(const ExperimentConfig& cfg)
		: cfg_(cfg)
		, alpha_(cfg.alpha())
	{
		if (cfg.initial_kind == "bound_state") init_.emplace(cfg.resolved_initial_alpha());
	}

	RunResult run(const std::string& subcommand, bool write_artifacts)
	{
		const auto stages = stages_for(subcommand);
		const auto t_start = std::chrono::steady_clock::now();
		rep_["meta"] = {{"program", "ionize3d"},
		                {"version", version_string},
		                {"subcommand", subcommand},
		                {"units", "hbar = 1, 2m = 1 (H0 = -Laplacian); alpha in inverse length, omega in inverse time"}};
		rep_["config"] = resolved_json(cfg_);
		rep_["stages"] = ordered_json::object();
		rep_["acceptance"] = ordered_json::object();
		rep_["errors"] = ordered_json::array();
		for (Stage s : stages) {
			const auto t0 = std::chrono::steady_clock::now();
			try {
				dispatch(s);
			} catch (const std::exception& e) {
				rep_["errors"].push_back({{"stage", stage_name(s)}, {"message", e.what()}});
				flag("stage_" + stage_name(s), false, "stage raised an error");
			}
			timing_[stage_name(s)] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
		}
		RunResult out;
		if (write_artifacts) {
			try {
				out.artifacts = write_outputs();
			} catch (const std::exception& e) {
				rep_["errors"].push_back({{"stage", "outputs"}, {"message", e.what()}});
				flag("stage_outputs", false, "writing artifacts failed");
			}
		}
		timing_["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
		timing_["threads"] = thread_count();
		rep_["timing"] = timing_;
		out.all_pass = all_pass_;
		out.report = rep_;
		if (write_artifacts && cfg_.write_json) {
			const auto path = std::filesystem::path(cfg_.out_dir) / "report.json";
			write_json(path, rep_);
			out.artifacts.push_back(path);
		}
		return out;
	}

private:
	void flag(const std::string& name, bool pass, const std::string& detail, ordered_json values = nullptr)
	{
		ordered_json f{{"pass", pass}, {"detail", detail}};
		if (!values.is_null()) f["values"] = values;
		rep_["acceptance"][name] = f;
		all_pass_ = all_pass_ && pass;
	}

	void not_applicable(const std::string& stage, const std::string& why)
	{
		rep_["stages"][stage] = {{"status", "not_applicable"}, {"reason", why}};
	}

	void dispatch(Stage s)
	{
		switch (s) {
		case Stage::Classify: classify(); break;
		case Stage::Genericity: genericity(); break;
		case Stage::Solve: solve(); break;
		case Stage::Survival: survival_stage(); break;
		case Stage::Ball: ball(); break;
		case Stage::Modes: modes(); break;
		case Stage::BranchFit: branchfit(); break;
		case Stage::DecayFit: decayfit(); break;
		}
	}

	bool stationary_case() const
	{
		return init_ && alpha_.support_radius() == 0 && std::abs(alpha_.mean() - init_->alpha()) <= 1e-15 * std::abs(init_->alpha());
	}

	void classify()
	{
		const auto rc = classify_resonance(alpha_, cfg_.resonance_tol);
		ordered_json j{{"resonance", resonance_name(rc)}};
		if (auto nm = std::get_if<NegativeMean>(&rc)) {
			j["n_bar"] = nm->n_bar;
			j["p_bar"] = cplx_json(nm->p_bar);
		}
		if (auto r = std::get_if<NegativeMeanResonant>(&rc)) j["N"] = r->N;
		j["mode_case"] = mode_case_name(mode_case_of(alpha_, cfg_.resonance_tol));
		j["alpha_mean"] = alpha_.mean();
		j["alpha_at_zero"] = alpha_.at_zero();
		j["alpha_min"] = min_alpha(alpha_);
		j["support_radius"] = alpha_.support_radius();
		j["ell1_norm"] = alpha_.ell1_norm();
		j["period"] = alpha_.period();
		if (alpha_.at_zero() < 0.0) {
			const auto n = normalize(alpha_);
			j["normalization_scale"] = n.scale;
		} else {
			j["normalization_scale"] = nullptr;
		}
		rep_["stages"]["classify"] = j;
	}

	void genericity()
	{
		const auto g = genericity_residuals(alpha_, cfg_.genericity_n_max);
		verdict_ = g.verdict;
		rep_["stages"]["genericity"] = {{"verdict", verdict_name(g.verdict)},
		                                {"threshold", g.threshold},
		                                {"plateau_value", g.plateau_value},
		                                {"final_residual", g.residuals.back()},
		                                {"ill_conditioned", g.ill_conditioned},
		                                {"dropped_columns", g.dropped_columns},
		                                {"window", g.window},
		                                {"residuals", g.residuals}};
	}

	void solve()
	{
		const auto grid = TimeGrid::covering(cfg_.h, cfg_.t_end);
		if (init_) {
			traj_ = solve_charge_bound_state(alpha_, *init_, grid);
		} else {
			GaussianState gs{cfg_.gaussian_sigma};
			traj_ = solve_charge(alpha_, sample_forcing_general(gs.profile(), grid), grid);
		}
		const auto b = apriori_bound(alpha_, *traj_);
		double qmax = 0.0;
		for (const auto& v : traj_->q) qmax = std::max(qmax, std::abs(v));
		rep_["stages"]["solve"] = {{"scheme", traj_->scheme},
		                           {"order", traj_->order},
		                           {"method", traj_->method},
		                           {"forcing", traj_->forcing_kind},
		                           {"steps", grid.size()},
		                           {"h", grid.step()},
		                           {"t_end", grid.t_end()},
		                           {"residual_norm", traj_->residual_norm},
		                           {"max_abs_q", qmax},
		                           {"q_end", cplx_json(traj_->q.back())},
		                           {"apriori", {{"rate", b.rate}, {"constant", b.constant}, {"holds", b.holds}, {"worst_log_margin", b.worst_log_margin}}}};
		if (stationary_case()) {
			const double ref = bound_state_charge(*init_);
			double dev = 0.0;
			for (const auto& v : traj_->q) dev = std::max(dev, std::abs(std::abs(v) - ref) / ref);
			flag("stationary_charge", dev <= tolerances::stationary, "max | |q| - 4 pi sqrt(2|alpha|) | / (4 pi sqrt(2|alpha|)) <= 1e-3",
			     {{"max_relative_deviation", dev}});
		}
	}

	void survival_stage()
	{
		if (!init_) return not_applicable("survival", "survival amplitude is defined for a bound initial state");
		if (!traj_) throw Error(ErrorCode::InvalidArgument, "survival needs the solve stage");
		surv_ = survival(*traj_, *init_, tolerances::stationary);
		rep_["stages"]["survival"] = {{"max_abs_theta", surv_->max_abs},
		                              {"theta_end", cplx_json(surv_->theta.back())},
		                              {"unitarity_flag", surv_->unitarity_flag}};
		flag("unitarity", surv_->max_abs <= 1.0 + tolerances::unitarity, "max |theta| <= 1 + 5e-3", {{"max_abs_theta", surv_->max_abs}});
		if (stationary_case()) {
			double dev = 0.0;
			for (const auto& v : surv_->theta) dev = std::max(dev, std::abs(std::abs(v) - 1.0));
			flag("stationary_theta", dev <= tolerances::stationary, "max | |theta| - 1 | <= 1e-3", {{"max_deviation", dev}});
		}
	}

	FreeScaled free() const
	{
		if (init_) return free_part(*init_);
		return free_part(GaussianState{cfg_.gaussian_sigma});
	}

	bool ionizing_in_scope() const
	{
		return (verdict_ && *verdict_ == GenericityVerdict::Generic) || min_alpha(alpha_) >= 0.0;
	}

	void ball()
	{
		if (!traj_) throw Error(ErrorCode::InvalidArgument, "ball probability needs the solve stage");
		BallOptions o;
		o.stride = cfg_.ball_stride;
		ordered_json arr = ordered_json::array();
		balls_.clear();
		for (double R : cfg_.radii) {
			balls_.push_back(ball_probability(*traj_, free(), R, o));
			const auto& b = balls_.back();
			ordered_json j{{"radius", R}, {"panels", b.panels}, {"radial_error", b.radial_error}, {"prob_end", b.prob.back()},
			               {"cesaro_end", b.time_average.back()}};
			// monotone decrease after cesaro_start, and the end value against the start value
			bool mono = true;
			std::optional<double> c_start;
			for (std::size_t i = 0; i < b.t.size(); ++i) {
				if (b.t[i] < cfg_.cesaro_start) continue;
				if (!c_start) c_start = b.time_average[i];
				else if (!(b.time_average[i] < b.time_average[i - 1])) mono = false;
			}
			j["cesaro_monotone"] = mono;
			if (c_start) {
				const double ratio = b.time_average.back() / *c_start;
				j["cesaro_start"] = *c_start;
				j["cesaro_ratio"] = ratio;
				if (ionizing_in_scope())
					flag("scattering_cesaro_R" + format_double(R), mono && ratio < tolerances::cesaro_ratio,
					     "Cesaro mean of the ball probability decreasing after t = cesaro_start and below 25% of its start value at T",
					     {{"monotone", mono}, {"ratio", ratio}});
			}
			arr.push_back(j);
		}
		rep_["stages"]["ball"] = arr;
	}

	std::vector<double> scan_grid() const
	{
		std::vector<double> s;
		const double w = alpha_.omega();
		for (int i = 0; i < cfg_.s_density; ++i) s.push_back(-0.5 * w + w * i / cfg_.s_density);
		return s;
	}

	void modes()
	{
		if (!init_) return not_applicable("modes", "the mode system source is built for a bound initial state");
		const auto tr = ModeTruncation::for_model(alpha_, cfg_.M);
		const auto rc = classify_resonance(alpha_, cfg_.resonance_tol);
		int probe = 0;
		if (auto r = std::get_if<NegativeMeanResonant>(&rc)) probe = r->N;
		const auto scan = scan_imaginary_axis(alpha_, tr, scan_grid(), cfg_.eps_ladder, *init_, probe);
		ordered_json pts = ordered_json::array();
		for (const auto& p : scan.points)
			pts.push_back({{"s", p.s}, {"eps", p.eps}, {"norm", p.norm}, {"q0_abs", p.q0_abs}, {"probe_abs", p.probe_abs},
			               {"condition", p.condition}, {"singular", p.singular}});
		ordered_json j{{"M", tr.M},
		               {"mode_case", mode_case_name(tr.mode_case)},
		               {"probe_index", probe},
		               {"max_condition", scan.max_condition},
		               {"max_growth", scan.max_growth},
		               {"max_probe_variation", scan.max_probe_variation},
		               {"flagged_s", scan.flagged_s},
		               {"scan", pts}};
		if (tr.mode_case == ModeCase::III)
			flag("case3_conditioning", scan.max_condition < tolerances::case3_condition,
			     "imaginary-axis scan condition numbers < 1e6", {{"max_condition", scan.max_condition}});

		// duality against the time-domain transform
		if (traj_) {
			ordered_json du = ordered_json::array();
			double worst = 0.0;
			bool ok = true;
			for (int k = 0; k < cfg_.duality_points; ++k) {
				const double fr = cfg_.duality_points > 1 ? static_cast<double>(k) / (cfg_.duality_points - 1) : 0.0;
				const cplx p{0.3 + 1.2 * fr, -1.0 + 2.0 * fr};
				ordered_json e{{"p", cplx_json(p)}};
				try {
					const auto m = solve_modes(alpha_, tr, p, *init_);
					const auto l = laplace_of_trajectory(*traj_, p);
					const double gap = std::abs(m.q0() - l.value) / std::abs(m.q0());
					worst = std::max(worst, gap);
					e["modes"] = cplx_json(m.q0());
					e["time"] = cplx_json(l.value);
					e["relative_gap"] = gap;
					e["tail_bound"] = l.tail_bound;
					e["mode_tail_bound"] = m.tail_bound;
				} catch (const Error& err) {
					ok = false;
					e["error"] = err.what();
				}
				du.push_back(e);
			}
			j["duality"] = du;
			flag("laplace_duality", ok && worst <= tolerances::duality, "|q0 modes - L[q] time| / |q0| <= 1e-2 at every probe p",
			     {{"max_relative_gap", worst}});
		}
		rep_["stages"]["modes"] = j;
	}

	void branchfit()
	{
		if (!init_) return not_applicable("branchfit", "the mode system source is built for a bound initial state");
		const auto tr = ModeTruncation::for_model(alpha_, cfg_.M);
		const auto rc = classify_resonance(alpha_, cfg_.resonance_tol);
		ordered_json j{{"mode_case", mode_case_name(tr.mode_case)}, {"resonance", resonance_name(rc)}};
		if (auto r = std::get_if<NegativeMeanResonant>(&rc)) {
			const auto scan = scan_imaginary_axis(alpha_, tr, {0.0}, cfg_.eps_ladder, *init_, r->N);
			ordered_json pts = ordered_json::array();
			for (const auto& p : scan.points) pts.push_back({{"eps", p.eps}, {"probe_abs", p.probe_abs}});
			j["probe_index"] = r->N;
			j["probe"] = pts;
			j["probe_variation"] = scan.max_probe_variation;
			// without an oscillating part the bound state persists and the pole is real
			if (alpha_.support_radius() > 0)
				flag("resonant_bounded", scan.max_probe_variation < tolerances::resonant_variation,
				     "|q_N(eps)| varies less than 10x over the eps ladder", {{"variation", scan.max_probe_variation}});
			rep_["stages"]["branchfit"] = j;
			return;
		}
		BranchFitOptions o;
		o.window = cfg_.fit_window;
		o.poor_fit_tol = tolerances::branch_residual;
		const auto fit = branch_fit(alpha_, tr, 0, *init_, o);
		j["n"] = fit.n;
		j["c"] = cplx_json(fit.c);
		j["d"] = cplx_json(fit.d);
		j["basis"] = fit.basis;
		ordered_json co = ordered_json::array();
		for (const auto& c : fit.coeffs) co.push_back(cplx_json(c));
		j["coefficients"] = co;
		j["residual"] = fit.residual;
		j["relative_residual"] = fit.relative_residual;
		j["arc_deviation"] = fit.arc_deviation;
		j["window"] = {{"p_min", fit.window.p_min}, {"p_max", fit.window.p_max}, {"count", fit.window.count}};
		if (fit.g_prime_zero) {
			j["g_prime_zero"] = cplx_json(*fit.g_prime_zero);
			j["g_prime_gap"] = *fit.g_prime_gap;
		}
		if (tr.mode_case == ModeCase::III) {
			const auto pc = positivity_check(alpha_, 100, 32, cfg_.seed);
			j["positivity"] = {{"nonnegative", pc.nonnegative}, {"min_form", pc.min_form}, {"min_eigenvalue", pc.min_eigenvalue},
			                   {"K", pc.K}, {"min_alpha_sampled", pc.min_alpha_sampled}};
		} else {
			const bool ok = fit.relative_residual <= tolerances::branch_residual && std::abs(fit.d) > 0.0 && fit.g_prime_gap &&
			                *fit.g_prime_gap <= tolerances::g_prime_gap;
			flag("branch_fit", ok, "residual <= 1e-4 (|c|+|d|), d != 0 and |d - G'(0)| <= 1e-3 |d|",
			     {{"relative_residual", fit.relative_residual},
			      {"abs_d", std::abs(fit.d)},
			      {"g_prime_gap", fit.g_prime_gap ? ordered_json(*fit.g_prime_gap) : ordered_json(nullptr)}});
		}
		rep_["stages"]["branchfit"] = j;
	}

	static ordered_json fit_json(const DecayFitReport& f)
	{
		return {{"window", {f.t1, f.t2}},     {"points", f.points},         {"exponent", f.exponent},
		        {"amplitude", f.amplitude},   {"r_squared", f.r_squared},   {"residual_trend", f.residual_trend},
		        {"composite_A", f.composite_A}, {"composite_B", f.composite_B}, {"composite_C", f.composite_C},
		        {"exponential_share", f.exponential_share}};
	}

	void decayfit()
	{
		if (!traj_) throw Error(ErrorCode::InvalidArgument, "decay fits need the solve stage");
		const auto w = cfg_.resolved_decay_window();
		const auto t = grid_times(traj_->grid);
		ordered_json j = ordered_json::object();
		const bool in_scope = ionizing_in_scope();
		auto one = [&](const std::string& name, const std::vector<double>& v) {
			try {
				const auto f = decay_fit(t, v, w[0], w[1], 0.0);
				j[name] = fit_json(f);
				if (in_scope)
					flag("decay_exponent_" + name, f.exponent >= tolerances::exponent_lo && f.exponent <= tolerances::exponent_hi && f.r_squared >= tolerances::min_r2,
					     "log-log exponent in [-1.7, -1.3] with r^2 >= 0.95", {{"exponent", f.exponent}, {"r_squared", f.r_squared}});
			} catch (const Error& e) {
				j[name] = {{"error", e.what()}};
				if (in_scope) flag("decay_exponent_" + name, false, e.what());
			}
		};
		one("q", abs_values(traj_->q));
		if (surv_) one("theta", abs_values(surv_->theta));
		j["in_scope"] = in_scope;
		rep_["stages"]["decayfit"] = j;
	}

	std::vector<std::filesystem::path> write_outputs()
	{
		std::vector<std::filesystem::path> out;
		if (!cfg_.write_csv && !cfg_.write_json) return out;
		const std::filesystem::path dir(cfg_.out_dir);
		ensure_directory(dir);
		if (cfg_.write_csv && traj_) {
			Table tb;
			tb.header = {"t", "re_q", "im_q", "abs_q"};
			if (surv_) tb.header.insert(tb.header.end(), {"re_theta", "im_theta", "abs_theta"});
			tb.columns.assign(tb.header.size(), {});
			for (std::size_t i = 0; i < traj_->q.size(); i += cfg_.csv_stride) {
				tb.columns[0].push_back(traj_->grid.t(i));
				tb.columns[1].push_back(traj_->q[i].real());
				tb.columns[2].push_back(traj_->q[i].imag());
				tb.columns[3].push_back(std::abs(traj_->q[i]));
				if (surv_) {
					tb.columns[4].push_back(surv_->theta[i].real());
					tb.columns[5].push_back(surv_->theta[i].imag());
					tb.columns[6].push_back(std::abs(surv_->theta[i]));
				}
			}
			write_csv(dir / "series.csv", tb);
			out.push_back(dir / "series.csv");
		}
		if (cfg_.write_csv && !balls_.empty()) {
			Table tb;
			tb.header = {"t"};
			tb.columns.push_back(balls_.front().t);
			for (const auto& b : balls_) {
				tb.header.push_back("ball_R" + format_double(b.radius));
				tb.columns.push_back(b.prob);
				tb.header.push_back("cesaro_R" + format_double(b.radius));
				tb.columns.push_back(b.time_average);
			}
			write_csv(dir / "ball.csv", tb);
			out.push_back(dir / "ball.csv");
		}
		return out;
	}

	ExperimentConfig cfg_;
	FourierAlpha alpha_;
	std::optional<BoundState> init_;
	std::optional<GenericityVerdict> verdict_;
	std::optional<ChargeTrajectory> traj_;
	std::optional<SurvivalSeries> surv_;
	std::vector<BallSeries> balls_;
	ordered_json rep_;
	ordered_json timing_ = ordered_json::object();
	bool all_pass_ = true;
};

} // namespace detail

/// Runs the stages of a subcommand. Stage failures are recorded in the report
/// and fail the run; artifacts produced before the failure are kept.
inline RunResult run_pipeline(const ExperimentConfig& cfg, const std::string& subcommand, bool write_artifacts = true)
{
	detail::Pipeline p(cfg);
	return p.run(subcommand, write_artifacts);
}

} // namespace ionize3d

#endif // IONIZE3D_PIPELINE_HPP
