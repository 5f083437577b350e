// ionize3d <subcommand> --config <file> [--out <dir>] [--set key=value]...

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ionize3d/config.hpp"
#include "ionize3d/io.hpp"
#include "ionize3d/pipeline.hpp"

namespace {

int run(const std::string& sub, const std::string& config_path, const std::string& out_dir, const std::vector<std::string>& sets)
{
	using namespace ionize3d;
	ordered_json raw = read_json(config_path);
	for (const auto& s : sets) apply_override(raw, s);
	if (!out_dir.empty()) apply_override(raw, "outputs.directory=\"" + out_dir + "\"");
	const ExperimentConfig cfg = parse_config(raw);
	const RunResult res = run_pipeline(cfg, sub, true);

	for (const auto& [name, f] : res.report["acceptance"].items())
		std::cout << (f["pass"].get<bool>() ? "PASS " : "FAIL ") << name << ": " << f["detail"].get<std::string>() << '\n';
	for (const auto& e : res.report["errors"])
		std::cerr << "error in " << e["stage"].get<std::string>() << ": " << e["message"].get<std::string>() << '\n';
	for (const auto& a : res.artifacts) std::cout << "wrote " << a.string() << '\n';
	return res.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Charge dynamics of a periodically driven point interaction in three dimensions"};
	app.require_subcommand(1, 1);
	std::string config_path, out_dir;
	std::vector<std::string> sets;
	const std::vector<std::pair<std::string, std::string>> subs{
		{"classify", "resonance class and mode case of the drive"},
		{"genericity", "shift-span residuals of the positive Fourier tail"},
		{"solve", "charge q(t) on the time grid"},
		{"survival", "charge and survival amplitude theta(t)"},
		{"modes", "Laplace mode system: imaginary-axis scan and time-domain cross-check"},
		{"branchfit", "c + d sqrt(p) structure of q_0 near p = 0"},
		{"decayfit", "power-law fits of |q| and |theta|"},
		{"full", "every stage, including ball probabilities"},
	};
	for (const auto& [name, help] : subs) {
		auto* s = app.add_subcommand(name, help);
		s->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
		s->add_option("--out", out_dir, "output directory (overrides outputs.directory)");
		s->add_option("--set", sets, "override a config key by dotted path, e.g. grid.h=5e-4")->take_all();
	}
	CLI11_PARSE(app, argc, argv);
	const std::string sub = app.get_subcommands().front()->get_name();
	try {
		return run(sub, config_path, out_dir, sets);
	} catch (const std::exception& e) {
		std::cerr << "ionize3d: " << e.what() << '\n';
		return 2;
	}
}
