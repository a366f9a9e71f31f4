// pxpflow: run quenches, compare runs and sweep parameters from the shell.
//
// Exit status: 0 success, 1 usage or I/O error, 2 numerical failure.

#include <pxpflow/quench.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pxpflow;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct RunOptions {
	std::string model = "pxp";
	int n_sites = 20;
	std::optional<double> lambda;
	std::optional<int> range;
	std::optional<double> g;
	double tau = kDefaultTau;
	double t_max = kDefaultTMax;
	int snapshot_every = 1;
	int krylov_dim = kMaxKrylovDim;
	std::vector<double> deltas;
	std::string delta_grid;
	std::vector<std::string> subsystems;
	std::vector<int> negativity_blocks;
	std::optional<double> minima_quantile;
	std::string config;
	std::string out;
	std::string dump_hamiltonian;
	int jobs = 1;
};

void add_run_options(CLI::App& cmd, RunOptions& o)
{
	cmd.add_option("--model", o.model, "Model family: pxp, pxpz or pxpxp")->capture_default_str();
	cmd.add_option("--n-sites", o.n_sites, "Chain length N")->capture_default_str();
	cmd.add_option("--lambda", o.lambda, "PXPZ strength (default 0.05)");
	cmd.add_option("--r", o.range, "PXPZ range (default 3)");
	cmd.add_option("--g", o.g, "PXPXP strength (default 0.25)");
	cmd.add_option("--tau", o.tau, "Time step")->capture_default_str();
	cmd.add_option("--t-max", o.t_max, "Total evolution time")->capture_default_str();
	cmd.add_option("--snapshot-every", o.snapshot_every, "Steps between snapshots")->capture_default_str();
	cmd.add_option("--krylov-dim", o.krylov_dim, "Largest Lanczos subspace per step")->capture_default_str();
	cmd.add_option("--deltas", o.deltas, "Separations with full series output (comma separated)")->delimiter(',');
	cmd.add_option("--delta-grid", o.delta_grid,
	               "Separations for degree curves: comma list, or step:stop for a uniform grid");
	cmd.add_option("--subsystems", o.subsystems, "Subsystems: oddL, adjL or site lists like 4-6-9")
	    ->delimiter(',');
	cmd.add_option("--negativity-blocks", o.negativity_blocks, "Block sizes k for block/probe negativity")
	    ->delimiter(',');
	cmd.add_option("--minima-quantile", o.minima_quantile, "Quantile defining deep extrema (default 0.1)");
	cmd.add_option("--config", o.config, "JSON manifest layered over the flags");
	cmd.add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
	cmd.add_option("--out", o.out, "Output directory")->required();
}

std::vector<double> parse_grid(const std::string& text)
{
	const auto colon = text.find(':');
	if(colon != std::string::npos) {
		const double step = std::stod(text.substr(0, colon));
		const double stop = std::stod(text.substr(colon + 1));
		if(!(step > 0.0) || !(stop >= step)) {
			throw std::invalid_argument("delta grid '" + text + "' needs 0 < step <= stop");
		}
		return uniform_grid(step, stop);
	}
	std::vector<double> out;
	std::size_t pos = 0;
	while(pos <= text.size()) {
		const auto comma = text.find(',', pos);
		out.push_back(std::stod(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
		if(comma == std::string::npos) {
			break;
		}
		pos = comma + 1;
	}
	return out;
}

RunManifest manifest_from(const RunOptions& o)
{
	ModelSpec spec;
	switch(parse_model_family(o.model)) {
	case ModelFamily::PXP: spec = ModelSpec::pxp(o.n_sites); break;
	case ModelFamily::PXPZ: spec = ModelSpec::pxpz(o.n_sites); break;
	case ModelFamily::PXPXP: spec = ModelSpec::pxpxp(o.n_sites); break;
	}
	if(o.lambda) {
		spec.lambda = *o.lambda;
	}
	if(o.range) {
		spec.range = *o.range;
	}
	if(o.g) {
		spec.g = *o.g;
	}
	RunManifest m = RunManifest::for_model(spec);
	m.evolution = {o.tau, o.t_max, o.snapshot_every, o.krylov_dim};
	if(!o.deltas.empty()) {
		m.deltas = o.deltas;
	}
	if(!o.delta_grid.empty()) {
		m.delta_grid = parse_grid(o.delta_grid);
	}
	if(!o.subsystems.empty()) {
		m.subsystems = o.subsystems;
	}
	if(!o.negativity_blocks.empty()) {
		m.negativity_blocks = o.negativity_blocks;
	}
	if(o.minima_quantile) {
		m.minima_quantile = *o.minima_quantile;
	}
	if(!o.config.empty()) {
		std::ifstream is(o.config);
		if(!is) {
			throw IoError("cannot open config " + o.config);
		}
		nlohmann::json::parse(is).get_to(m);
		// a config written by a previous run carries run metadata
		m.version = kVersion;
		m.wall_clock.clear();
		m.checksum.clear();
	}
	m.validate();
	return m;
}

void print_summary(const ExperimentResult& r, const fs::path& dir)
{
	std::printf("%s: %zu snapshots -> %s\n", model_label(r.manifest.model).c_str(), r.store.size(),
	            dir.string().c_str());
	for(const auto& p : r.periods) {
		std::printf("  period %-12s delta=%-5s %.4f +- %.4f (%zu extrema)\n", p.series.c_str(),
		            format_number(p.delta).c_str(), p.estimate.period, p.estimate.uncertainty,
		            p.estimate.extrema.size());
	}
	for(std::size_t s = 0; s < r.degree.size(); ++s) {
		if(r.degree[s].degree.empty()) {
			continue;
		}
		const auto d = interior_minimum(r.degree[s]);
		const auto d1 = interior_minimum(r.degree1[s]);
		std::printf("  %-6s D min at delta=%.2f (%.4g)   D1 min at delta=%.2f (%.4g)\n",
		            r.degree[s].sub.label().c_str(), d.delta, d.value, d1.delta, d1.value);
	}
}

int cmd_run(const RunOptions& o)
{
	const RunManifest m = manifest_from(o);
	if(!o.dump_hamiltonian.empty()) {
		std::ofstream os(o.dump_hamiltonian);
		if(!os) {
			throw IoError("cannot write " + o.dump_hamiltonian);
		}
		build_hamiltonian(m.model).write_triplets(os);
	}
	std::fprintf(stderr, "running %s, dimension %llu, %zu steps\n", model_label(m.model).c_str(),
	             static_cast<unsigned long long>(blockade_dimension(m.model.n_sites)), m.evolution.total_steps());
	const auto r = run_experiment(m, o.out, o.jobs);
	print_summary(r, o.out);
	return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out)
{
	std::vector<RunSummary> runs;
	for(const auto& d : dirs) {
		if(!fs::is_directory(d)) {
			throw IoError("no run directory " + d);
		}
		runs.push_back(load_run(d));
	}
	const auto cmp = compare_models(runs);
	write_comparison(cmp, out);
	std::printf("compared %zu runs -> %s\n", runs.size(), out.c_str());
	for(std::size_t a = 1; a < runs.size(); ++a) {
		std::printf("  max |difference| %s vs %s: %.6g\n", cmp.labels[0].c_str(), cmp.labels[a].c_str(),
		            cmp.max_abs_difference(0, a));
	}
	return 0;
}

int cmd_sweep(const RunOptions& o, const std::string& param, const std::vector<double>& values)
{
	const RunManifest base = manifest_from(o);
	const auto p = parse_sweep_parameter(param);
	const auto results = run_sweep(base, p, values, o.out, o.jobs);
	std::printf("sweep over %s: %zu runs -> %s/sweep.csv\n", param.c_str(), results.size(), o.out.c_str());
	return 0;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Information backflow in constrained spin chains"};
	app.require_subcommand(1);
	app.set_version_flag("--version", std::string(kVersion));

	RunOptions run_opts;
	auto* run = app.add_subcommand("run", "Evolve the Neel state and write every diagnostic");
	add_run_options(*run, run_opts);
	run->add_option("--dump-hamiltonian", run_opts.dump_hamiltonian, "Write the operator as row col value lines");

	std::vector<std::string> compare_dirs;
	std::string compare_out;
	auto* compare = app.add_subcommand("compare", "Tabulate degree curves and periods of several runs");
	compare->add_option("runs", compare_dirs, "Run directories")->required();
	compare->add_option("--out", compare_out, "Output directory")->required();

	RunOptions sweep_opts;
	std::string sweep_param;
	std::vector<double> sweep_values;
	auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of one parameter");
	add_run_options(*sweep, sweep_opts);
	sweep->add_option("--param", sweep_param, "n-sites, lambda, r or g")->required();
	sweep->add_option("--values", sweep_values, "Comma-separated values")->required()->delimiter(',');

	try {
		app.parse(argc, argv);
	}
	catch(const CLI::ParseError& e) {
		const int code = app.exit(e);
		return code == 0 ? 0 : kExitUsage;
	}

	try {
		if(*run) {
			return cmd_run(run_opts);
		}
		if(*compare) {
			return cmd_compare(compare_dirs, compare_out);
		}
		if(*sweep) {
			return cmd_sweep(sweep_opts, sweep_param, sweep_values);
		}
	}
	catch(const NumericalError& e) {
		std::cerr << "numerical failure: " << e.what() << '\n';
		return kExitNumerical;
	}
	catch(const std::domain_error& e) {
		std::cerr << "numerical failure: " << e.what() << '\n';
		return kExitNumerical;
	}
	catch(const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitUsage;
	}
	return kExitUsage;
}
