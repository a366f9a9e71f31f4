#pragma once

// Experiment driver: evolve, collect snapshots, derive every diagnostic and
// persist the results as CSV/JSON.

#include "csv.hpp"
#include "evolve.hpp"
#include "manifest.hpp"
#include "metrics.hpp"
#include "rdm.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <iterator>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace pxpflow {

/// Per-snapshot data of one run. Append-only until sealed, read-only after.
class SnapshotStore {
public:
	SnapshotStore(std::vector<SubsystemSpec> subsystems, std::vector<int> negativity_blocks)
	    : subsystems_{std::move(subsystems)}, blocks_{std::move(negativity_blocks)},
	      rdms_(subsystems_.size()), negativity_(blocks_.size())
	{
	}

	void append(double t, double fidelity, double ee_half, std::vector<Eigen::MatrixXcd> rdms,
	            const std::vector<double>& negativities)
	{
		if(sealed_) {
			throw std::logic_error("snapshot store is sealed");
		}
		if(rdms.size() != subsystems_.size() || negativities.size() != blocks_.size()) {
			throw std::invalid_argument("snapshot does not match the store layout");
		}
		if(!times_.empty() && t <= times_.back()) {
			throw std::invalid_argument("snapshot times must increase");
		}
		times_.push_back(t);
		fidelity_.push_back(fidelity);
		ee_half_.push_back(ee_half);
		for(std::size_t k = 0; k < rdms.size(); ++k) {
			rdms_[k].push_back({subsystems_[k], t, std::move(rdms[k])});
		}
		for(std::size_t k = 0; k < blocks_.size(); ++k) {
			negativity_[k].push_back(negativities[k]);
		}
	}

	void seal() noexcept { sealed_ = true; }
	[[nodiscard]] bool sealed() const noexcept { return sealed_; }

	[[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
	[[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
	[[nodiscard]] const std::vector<double>& fidelity() const noexcept { return fidelity_; }
	[[nodiscard]] const std::vector<double>& ee_half() const noexcept { return ee_half_; }
	[[nodiscard]] const std::vector<SubsystemSpec>& subsystems() const noexcept { return subsystems_; }
	[[nodiscard]] const std::vector<int>& negativity_blocks() const noexcept { return blocks_; }
	[[nodiscard]] std::span<const ReducedDensityMatrix> rdms(std::size_t sub) const { return rdms_.at(sub); }
	[[nodiscard]] const std::vector<double>& negativity(std::size_t block) const { return negativity_.at(block); }

private:
	std::vector<SubsystemSpec> subsystems_;
	std::vector<int> blocks_;
	std::vector<double> times_;
	std::vector<double> fidelity_;
	std::vector<double> ee_half_;
	std::vector<std::vector<ReducedDensityMatrix>> rdms_;
	std::vector<std::vector<double>> negativity_;
	bool sealed_ = false;
};

/// Evolves the Néel state under the manifest's model and records fidelity,
/// half-chain entropy, subsystem RDMs and block/probe negativities.
[[nodiscard]] inline SnapshotStore simulate(const RunManifest& manifest)
{
	manifest.validate();
	const int n = manifest.model.n_sites;
	auto basis = std::make_shared<const BlockadeBasis>(n);
	const SparseHamiltonian h = build_hamiltonian(manifest.model, basis);

	std::vector<PartialTracePlan> plans;
	for(const auto& sub : manifest.resolved_subsystems()) {
		plans.emplace_back(*basis, sub);
	}
	std::vector<PartialTracePlan> negativity_plans;
	for(int k : manifest.negativity_blocks) {
		negativity_plans.emplace_back(*basis, manifest.negativity_subsystem(k));
	}
	const BipartitionPlan half(*basis, n / 2);
	const auto neel_index = static_cast<Eigen::Index>(basis->index(basis->neel_config()));

	SnapshotStore store(manifest.resolved_subsystems(), manifest.negativity_blocks);
	evolve(h, neel_state(*basis), manifest.evolution, [&](std::size_t, double t, const StateVector& psi) {
		std::vector<Eigen::MatrixXcd> rdms;
		rdms.reserve(plans.size());
		for(const auto& plan : plans) {
			rdms.push_back(plan.apply(psi));
		}
		std::vector<double> neg;
		neg.reserve(negativity_plans.size());
		for(std::size_t k = 0; k < negativity_plans.size(); ++k) {
			neg.push_back(negativity(negativity_plans[k].apply(psi), 1 << manifest.negativity_blocks[k], 2));
		}
		const double f = std::norm(psi[neel_index]);
		store.append(t, f, von_neumann_entropy(half.schmidt_probabilities(psi)), std::move(rdms), neg);
	});
	store.seal();
	return store;
}

struct PeriodRow {
	std::string series;
	double delta = 0.0;
	PeriodEstimate estimate;
};

struct ExperimentResult {
	RunManifest manifest;
	SnapshotStore store;
	std::vector<DistanceSeries> td;  // every (subsystem, delta) of manifest.deltas
	std::vector<DistanceSeries> tvd; // same layout as td
	std::vector<DegreeCurve> degree; // one per subsystem
	std::vector<DegreeCurve> degree1;
	std::vector<PeriodRow> periods; // analyses with too few minima are omitted
};

/// Derives every series, degree curve and period from a sealed store.
/// Degree curves of different subsystems are computed by up to `jobs`
/// concurrent tasks; the result does not depend on `jobs`.
[[nodiscard]] inline ExperimentResult analyze(RunManifest manifest, SnapshotStore store, int jobs = 1)
{
	if(!store.sealed()) {
		throw std::logic_error("analyze needs a sealed snapshot store");
	}
	const auto deltas = manifest.effective_deltas();
	const auto grid = manifest.effective_delta_grid();
	ExperimentResult result{std::move(manifest), std::move(store), {}, {}, {}, {}, {}};
	const SnapshotStore& st = result.store;
	const auto& times = st.times();
	const std::size_t n_sub = st.subsystems().size();

	std::vector<std::vector<std::vector<double>>> spectra(n_sub);
	for(std::size_t s = 0; s < n_sub; ++s) {
		for(const auto& rho : st.rdms(s)) {
			spectra[s].push_back(eigenvalues_desc(rho));
		}
	}
	for(std::size_t s = 0; s < n_sub; ++s) {
		for(double d : deltas) {
			result.td.push_back(distance_series(st.rdms(s), d));
			result.tvd.push_back(tvd_series(st.subsystems()[s], spectra[s], times, d));
		}
	}

	auto curves_for = [&](std::size_t s) {
		return std::pair{degree_curve(st.rdms(s), grid),
		                 tvd_degree_curve(st.subsystems()[s], spectra[s], times, grid)};
	};
	std::vector<std::pair<DegreeCurve, DegreeCurve>> curves(n_sub);
	if(jobs <= 1) {
		for(std::size_t s = 0; s < n_sub; ++s) {
			curves[s] = curves_for(s);
		}
	}
	else {
		std::atomic<std::size_t> next{0};
		std::vector<std::future<void>> workers;
		for(int w = 0; w < jobs; ++w) {
			workers.push_back(std::async(std::launch::async, [&] {
				for(std::size_t s = next++; s < n_sub; s = next++) {
					curves[s] = curves_for(s);
				}
			}));
		}
		for(auto& w : workers) {
			w.get();
		}
	}
	for(auto& [d, d1] : curves) {
		result.degree.push_back(std::move(d));
		result.degree1.push_back(std::move(d1));
	}

	const double q = result.manifest.minima_quantile;
	if(times.size() >= 3) {
		try {
			result.periods.push_back({"fidelity", 0.0, find_maxima_period(times, st.fidelity(), q, EdgePolicy::IncludeStart)});
		}
		catch(const std::domain_error&) {
		}
	}
	for(const auto& series : result.td) {
		if(series.values.size() < 3) {
			continue;
		}
		try {
			result.periods.push_back({"td_" + series.sub.label(), series.delta,
			                          find_minima_period(series.times, series.values, q)});
		}
		catch(const std::domain_error&) {
		}
	}
	return result;
}

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes)
{
	for(unsigned char c : bytes) {
		h ^= c;
		h *= 0x100000001b3ULL;
	}
	return h;
}

inline std::string read_file(const std::filesystem::path& p)
{
	std::ifstream is(p, std::ios::binary);
	if(!is) {
		throw IoError("cannot read " + p.string());
	}
	return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
	std::ofstream os(p, std::ios::binary | std::ios::trunc);
	if(!os || !(os << text)) {
		throw IoError("cannot write " + p.string());
	}
}

inline std::string utc_now()
{
	const std::time_t now = std::time(nullptr);
	std::tm tm{};
	gmtime_r(&now, &tm);
	char buf[32];
	std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
	return buf;
}

inline nlohmann::json curve_minima_json(const std::vector<DegreeCurve>& curves)
{
	nlohmann::json out = nlohmann::json::object();
	for(const auto& c : curves) {
		if(c.degree.empty()) {
			continue;
		}
		const auto m = interior_minimum(c);
		out[c.sub.label()] = {{"delta", m.delta}, {"value", m.value}};
	}
	return out;
}

} // namespace detail

/// FNV-1a over the names and bytes of every data file in `dir` (everything
/// except manifest.json), in name order.
[[nodiscard]] inline std::string data_checksum(const std::filesystem::path& dir)
{
	std::vector<std::filesystem::path> files;
	for(const auto& entry : std::filesystem::directory_iterator(dir)) {
		if(entry.is_regular_file() && entry.path().filename() != "manifest.json") {
			files.push_back(entry.path());
		}
	}
	std::sort(files.begin(), files.end());
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for(const auto& f : files) {
		h = detail::fnv1a(h, f.filename().string());
		h = detail::fnv1a(h, std::string_view("\0", 1));
		h = detail::fnv1a(h, detail::read_file(f));
	}
	char buf[17];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

[[nodiscard]] inline std::string td_file(const DistanceSeries& s)
{
	return (s.measure == DistanceMeasure::Trace ? "td_" : "tvd_") + s.sub.label() + "_" + format_number(s.delta) +
	       ".csv";
}

/// Writes every CSV, periods.json and finally manifest.json (with the data
/// checksum) into `dir`.
inline void write_outputs(ExperimentResult& result, const std::filesystem::path& dir)
{
	std::error_code ec;
	std::filesystem::create_directories(dir, ec);
	if(ec) {
		throw IoError("cannot create " + dir.string() + ": " + ec.message());
	}
	const auto& st = result.store;
	const auto file = [&](const std::string& name) { return (dir / name).string(); };
	write_csv(file("fidelity.csv"), {"t", "F"}, {st.times(), st.fidelity()});
	write_csv(file("ee_half.csv"), {"t", "EE"}, {st.times(), st.ee_half()});
	for(const auto* group : {&result.td, &result.tvd}) {
		for(const auto& s : *group) {
			write_csv(file(td_file(s)), {"t", s.measure == DistanceMeasure::Trace ? "Td" : "Vd"}, {s.times, s.values});
		}
	}
	for(const auto& c : result.degree) {
		write_csv(file("degree_" + c.sub.label() + ".csv"), {"delta", "D"}, {c.deltas, c.degree});
	}
	for(const auto& c : result.degree1) {
		write_csv(file("degree1_" + c.sub.label() + ".csv"), {"delta", "D1"}, {c.deltas, c.degree});
	}
	for(std::size_t k = 0; k < st.negativity_blocks().size(); ++k) {
		write_csv(file("negativity_k" + std::to_string(st.negativity_blocks()[k]) + ".csv"), {"t", "N"},
		          {st.times(), st.negativity(k)});
	}

	nlohmann::json periods = nlohmann::json::array();
	for(const auto& p : result.periods) {
		periods.push_back({{"series", p.series},
		                   {"delta", p.delta},
		                   {"period", p.estimate.period},
		                   {"uncertainty", p.estimate.uncertainty},
		                   {"extrema", p.estimate.extrema}});
	}
	const nlohmann::json summary{{"periods", periods},
	                             {"degree_minima", detail::curve_minima_json(result.degree)},
	                             {"degree1_minima", detail::curve_minima_json(result.degree1)}};
	detail::write_text(dir / "periods.json", summary.dump(2) + "\n");

	result.manifest.checksum = data_checksum(dir);
	detail::write_text(dir / "manifest.json", nlohmann::json(result.manifest).dump(2) + "\n");
}

/// Simulates, analyses and writes one run into `dir`.
inline ExperimentResult run_experiment(RunManifest manifest, const std::filesystem::path& dir, int jobs = 1)
{
	manifest.validate();
	const auto start = std::chrono::steady_clock::now();
	const std::string started = detail::utc_now();
	SnapshotStore store = simulate(manifest);
	ExperimentResult result = analyze(std::move(manifest), std::move(store), jobs);
	const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
	char buf[64];
	std::snprintf(buf, sizeof buf, " (%.1f s)", elapsed);
	result.manifest.wall_clock = started + buf;
	write_outputs(result, dir);
	return result;
}

/// The parts of a run needed to compare models: loadable from disk.
struct RunSummary {
	RunManifest manifest;
	std::vector<DegreeCurve> degree;
	std::vector<DegreeCurve> degree1;
	std::vector<PeriodRow> periods;
};

[[nodiscard]] inline RunSummary summarize(const ExperimentResult& r)
{
	return {r.manifest, r.degree, r.degree1, r.periods};
}

[[nodiscard]] inline RunSummary load_run(const std::filesystem::path& dir)
{
	RunSummary out;
	try {
		const auto j = nlohmann::json::parse(detail::read_file(dir / "manifest.json"));
		j.get_to(out.manifest);
		out.manifest.validate();
		for(const auto& sub : out.manifest.resolved_subsystems()) {
			for(const auto& [prefix, measure, target] :
			    {std::tuple{"degree_", DistanceMeasure::Trace, &out.degree},
			     std::tuple{"degree1_", DistanceMeasure::TotalVariation, &out.degree1}}) {
				const auto table = read_csv((dir / (std::string(prefix) + sub.label() + ".csv")).string());
				target->push_back({sub, measure, table.values(0), table.values(1)});
			}
		}
		const auto summary = nlohmann::json::parse(detail::read_file(dir / "periods.json"));
		for(const auto& p : summary.at("periods")) {
			PeriodRow row{p.at("series").get<std::string>(), p.at("delta").get<double>(), {}};
			row.estimate.period = p.at("period").get<double>();
			row.estimate.uncertainty = p.at("uncertainty").get<double>();
			row.estimate.extrema = p.at("extrema").get<std::vector<double>>();
			out.periods.push_back(std::move(row));
		}
	}
	catch(const nlohmann::json::exception& e) {
		throw IoError("malformed run directory " + dir.string() + ": " + e.what());
	}
	return out;
}

/// Side-by-side degree curves and periods of several runs sharing N, tau,
/// grids and subsystems.
struct Comparison {
	std::vector<std::string> labels;
	std::vector<SubsystemSpec> subsystems;
	std::vector<double> deltas;
	// [subsystem][run][delta]
	std::vector<std::vector<std::vector<double>>> degree;
	std::vector<std::vector<std::vector<double>>> degree1;
	// [run] -> rows
	std::vector<std::vector<PeriodRow>> periods;

	/// Largest |difference| between two runs over every degree value.
	[[nodiscard]] double max_abs_difference(std::size_t a, std::size_t b) const
	{
		double out = 0.0;
		for(const auto* table : {&degree, &degree1}) {
			for(const auto& per_sub : *table) {
				for(std::size_t k = 0; k < deltas.size(); ++k) {
					out = std::max(out, std::abs(per_sub[a][k] - per_sub[b][k]));
				}
			}
		}
		for(std::size_t k = 0; k < std::min(periods[a].size(), periods[b].size()); ++k) {
			out = std::max(out, std::abs(periods[a][k].estimate.period - periods[b][k].estimate.period));
		}
		return out;
	}
};

[[nodiscard]] inline Comparison compare_models(const std::vector<RunSummary>& runs)
{
	if(runs.empty()) {
		throw std::invalid_argument("nothing to compare");
	}
	const RunManifest& ref = runs.front().manifest;
	Comparison out;
	out.subsystems = ref.resolved_subsystems();
	out.deltas = ref.effective_delta_grid();
	for(const auto& run : runs) {
		const RunManifest& m = run.manifest;
		std::vector<std::string> mismatch;
		if(m.model.n_sites != ref.model.n_sites) {
			mismatch.push_back("n_sites");
		}
		if(m.evolution != ref.evolution) {
			mismatch.push_back("evolution grid");
		}
		if(m.effective_delta_grid() != out.deltas) {
			mismatch.push_back("delta grid");
		}
		if(m.subsystems != ref.subsystems) {
			mismatch.push_back("subsystems");
		}
		if(!mismatch.empty()) {
			std::string msg = "runs are not comparable, they differ in:";
			for(const auto& s : mismatch) {
				msg += " " + s;
			}
			throw std::invalid_argument(msg);
		}
		out.labels.push_back(model_label(m.model));
		out.periods.push_back(run.periods);
	}
	out.degree.resize(out.subsystems.size());
	out.degree1.resize(out.subsystems.size());
	for(std::size_t s = 0; s < out.subsystems.size(); ++s) {
		for(const auto& run : runs) {
			out.degree[s].push_back(run.degree.at(s).degree);
			out.degree1[s].push_back(run.degree1.at(s).degree);
		}
	}
	return out;
}

/// compare_degree_<sub>.csv, compare_degree1_<sub>.csv and
/// compare_periods.json in `dir`. Columns beyond delta follow `labels`.
inline void write_comparison(const Comparison& cmp, const std::filesystem::path& dir)
{
	std::filesystem::create_directories(dir);
	std::vector<std::string> header{"delta"};
	for(std::size_t r = 0; r < cmp.labels.size(); ++r) {
		// labels may repeat when a run is compared with itself
		header.push_back(cmp.labels[r] + (std::count(cmp.labels.begin(), cmp.labels.end(), cmp.labels[r]) > 1
		                                      ? "#" + std::to_string(r)
		                                      : ""));
	}
	for(std::size_t s = 0; s < cmp.subsystems.size(); ++s) {
		for(const auto& [name, table] : {std::pair{"compare_degree_", &cmp.degree}, std::pair{"compare_degree1_", &cmp.degree1}}) {
			std::vector<std::vector<double>> cols{cmp.deltas};
			for(const auto& run : (*table)[s]) {
				cols.push_back(run);
			}
			write_csv((dir / (std::string(name) + cmp.subsystems[s].label() + ".csv")).string(), header, cols);
		}
	}
	nlohmann::json periods = nlohmann::json::object();
	for(std::size_t r = 0; r < cmp.labels.size(); ++r) {
		nlohmann::json rows = nlohmann::json::array();
		for(const auto& p : cmp.periods[r]) {
			rows.push_back({{"series", p.series},
			                {"delta", p.delta},
			                {"period", p.estimate.period},
			                {"uncertainty", p.estimate.uncertainty}});
		}
		periods[header[r + 1]] = rows;
	}
	detail::write_text(dir / "compare_periods.json", periods.dump(2) + "\n");
}

enum class SweepParameter { NSites, Lambda, Range, G };

[[nodiscard]] inline SweepParameter parse_sweep_parameter(std::string_view name)
{
	if(name == "n-sites" || name == "n_sites") {
		return SweepParameter::NSites;
	}
	if(name == "lambda") {
		return SweepParameter::Lambda;
	}
	if(name == "r") {
		return SweepParameter::Range;
	}
	if(name == "g") {
		return SweepParameter::G;
	}
	throw std::invalid_argument("unknown sweep parameter '" + std::string(name) + "'");
}

[[nodiscard]] inline RunManifest with_parameter(RunManifest m, SweepParameter p, double value)
{
	switch(p) {
	case SweepParameter::NSites: m.model.n_sites = static_cast<int>(std::lround(value)); break;
	case SweepParameter::Lambda: m.model.lambda = value; break;
	case SweepParameter::Range: m.model.range = static_cast<int>(std::lround(value)); break;
	case SweepParameter::G: m.model.g = value; break;
	}
	return m;
}

/// Runs the base manifest once per value with up to `jobs` runs in flight.
/// Each run writes its own subdirectory of `out`; sweep.csv holds one row
/// per value with the fidelity period, the first T_d period and the mean
/// degree of each subsystem.
inline std::vector<RunSummary> run_sweep(const RunManifest& base, SweepParameter param,
                                         const std::vector<double>& values, const std::filesystem::path& out,
                                         int jobs = 1)
{
	std::vector<RunManifest> manifests;
	for(double v : values) {
		manifests.push_back(with_parameter(base, param, v));
		manifests.back().validate();
	}
	std::vector<RunSummary> results(manifests.size());
	std::atomic<std::size_t> next{0};
	std::mutex error_mutex;
	std::exception_ptr error;
	auto worker = [&] {
		for(std::size_t i = next++; i < manifests.size(); i = next++) {
			try {
				const auto r = run_experiment(manifests[i], out / model_label(manifests[i].model));
				results[i] = summarize(r);
			}
			catch(...) {
				const std::lock_guard lock(error_mutex);
				if(!error) {
					error = std::current_exception();
				}
			}
		}
	};
	{
		std::vector<std::jthread> pool;
		for(int w = 0; w < std::max(1, jobs); ++w) {
			pool.emplace_back(worker);
		}
	}
	if(error) {
		std::rethrow_exception(error);
	}

	std::vector<std::string> header{"value", "fidelity_period", "td_period"};
	std::vector<std::vector<double>> cols(3);
	const auto subs = base.subsystems;
	for(const auto& s : subs) {
		header.push_back("mean_D_" + s);
		cols.emplace_back();
	}
	const double nan = std::numeric_limits<double>::quiet_NaN();
	for(std::size_t i = 0; i < results.size(); ++i) {
		const auto& r = results[i];
		cols[0].push_back(values[i]);
		double fid = nan;
		double td = nan;
		for(const auto& p : r.periods) {
			if(p.series == "fidelity" && std::isnan(fid)) {
				fid = p.estimate.period;
			}
			else if(p.series.rfind("td_", 0) == 0 && std::isnan(td)) {
				td = p.estimate.period;
			}
		}
		cols[1].push_back(fid);
		cols[2].push_back(td);
		for(std::size_t s = 0; s < subs.size(); ++s) {
			const auto& d = r.degree.at(s).degree;
			cols[3 + s].push_back(d.empty() ? nan : std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size()));
		}
	}
	write_csv((out / "sweep.csv").string(), header, cols);
	return results;
}

} // namespace pxpflow
