#pragma once

// Description of one simulation run and its JSON form.

#include "csv.hpp"
#include "evolve.hpp"
#include "metrics.hpp"
#include "rdm.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

namespace pxpflow {

inline constexpr const char* kVersion = "0.1.0";

/// k * step for k = 1..n, computed from integers so the grid is exact.
[[nodiscard]] inline std::vector<double> uniform_grid(double step, double stop)
{
	std::vector<double> out;
	const auto n = static_cast<long>(std::floor(stop / step + 1e-9));
	for(long k = 1; k <= n; ++k) {
		out.push_back(static_cast<double>(k) * step);
	}
	return out;
}

[[nodiscard]] inline std::vector<double> default_delta_grid()
{
	return uniform_grid(0.05, 6.0);
}

[[nodiscard]] inline std::string model_label(const ModelSpec& spec)
{
	std::string out{to_string(spec.family)};
	switch(spec.family) {
	case ModelFamily::PXP: break;
	case ModelFamily::PXPZ: out += "_l" + format_number(spec.lambda) + "_r" + std::to_string(spec.range); break;
	case ModelFamily::PXPXP: out += "_g" + format_number(spec.g); break;
	}
	return out + "_n" + std::to_string(spec.n_sites);
}

/// odd1..odd4 and adj2, keeping only those that fit on the chain.
[[nodiscard]] inline std::vector<std::string> default_subsystems(int n_sites)
{
	std::vector<std::string> out;
	for(const char* name : {"odd1", "odd2", "odd3", "odd4", "adj2"}) {
		try {
			(void)parse_subsystem(name, n_sites);
			out.emplace_back(name);
		}
		catch(const std::exception&) {
		}
	}
	return out;
}

/// Block sizes 1..5 whose block plus probe spin fit right of N/2.
[[nodiscard]] inline std::vector<int> default_negativity_blocks(int n_sites)
{
	std::vector<int> out;
	for(int k = 1; k <= 5; ++k) {
		if(n_sites / 2 + k <= n_sites) {
			out.push_back(k);
		}
	}
	return out;
}

struct RunManifest {
	ModelSpec model;
	EvolutionConfig evolution;
	/// Subsystem names ("odd3", "adj2", "4-6-9"), resolved against the chain length.
	std::vector<std::string> subsystems{"odd1", "odd2", "odd3", "odd4", "adj2"};
	/// Separations whose full distance series are written out.
	std::vector<double> deltas{1.0, 2.0, 3.0};
	/// Separations at which backflow degrees are evaluated.
	std::vector<double> delta_grid = default_delta_grid();
	/// Block sizes k for the negativity between k contiguous spins and the
	/// adjacent probe spin.
	std::vector<int> negativity_blocks{1, 2, 3, 4, 5};
	double minima_quantile = kDeepMinimumQuantile;
	std::string version = kVersion;
	std::string wall_clock;
	std::string checksum;

	static RunManifest for_model(const ModelSpec& spec)
	{
		RunManifest m;
		m.model = spec;
		m.subsystems = default_subsystems(spec.n_sites);
		m.negativity_blocks = default_negativity_blocks(spec.n_sites);
		return m;
	}

	[[nodiscard]] std::vector<SubsystemSpec> resolved_subsystems() const
	{
		std::vector<SubsystemSpec> out;
		for(const auto& name : subsystems) {
			out.push_back(parse_subsystem(name, model.n_sites));
		}
		return out;
	}

	/// Contiguous block of k spins from N/2 followed by the probe spin.
	[[nodiscard]] SubsystemSpec negativity_subsystem(int block) const
	{
		return SubsystemSpec::adjacent(model.n_sites, block + 1);
	}

	/// Separations that fit below t_max; larger ones are skipped.
	[[nodiscard]] static std::vector<double> fitting(const std::vector<double>& grid, double t_max)
	{
		std::vector<double> out;
		for(double d : grid) {
			if(d < t_max - 1e-9) {
				out.push_back(d);
			}
		}
		return out;
	}

	[[nodiscard]] std::vector<double> effective_deltas() const { return fitting(deltas, evolution.t_max); }
	[[nodiscard]] std::vector<double> effective_delta_grid() const
	{
		return fitting(delta_grid, evolution.t_max);
	}

	[[nodiscard]] std::vector<std::string> problems() const
	{
		auto out = model.problems();
		for(auto& p : evolution.problems()) {
			out.push_back(std::move(p));
		}
		if(out.empty()) {
			const double spacing = evolution.spacing();
			auto check_grid = [&](const std::vector<double>& grid, const char* name) {
				for(double d : grid) {
					const double r = d / spacing;
					if(!(d > 0.0) || std::abs(r - std::round(r)) > 1e-6) {
						out.push_back(std::string(name) + " value " + format_number(d) +
						              " is not a positive multiple of the snapshot spacing");
						return;
					}
				}
			};
			check_grid(deltas, "deltas");
			check_grid(delta_grid, "delta_grid");
			for(const auto& name : subsystems) {
				try {
					(void)parse_subsystem(name, model.n_sites);
				}
				catch(const std::exception& e) {
					out.push_back(std::string("subsystem: ") + e.what());
				}
			}
			for(int k : negativity_blocks) {
				if(k < 1 || k + 1 > kMaxSubsystemSites || model.n_sites / 2 + k > model.n_sites) {
					out.push_back("negativity block " + std::to_string(k) + " does not fit");
				}
			}
		}
		if(!(minima_quantile > 0.0 && minima_quantile < 1.0)) {
			out.push_back("minima_quantile must lie in (0, 1)");
		}
		return out;
	}

	void validate() const
	{
		const auto issues = problems();
		if(!issues.empty()) {
			std::string msg = "invalid manifest:";
			for(const auto& issue : issues) {
				msg += " " + issue + ";";
			}
			throw std::invalid_argument(msg);
		}
	}
};

inline void to_json(nlohmann::json& j, const ModelSpec& s)
{
	j = nlohmann::json{{"family", to_string(s.family)}, {"n_sites", s.n_sites}};
	if(s.family == ModelFamily::PXPZ) {
		j["lambda"] = s.lambda;
		j["r"] = s.range;
	}
	if(s.family == ModelFamily::PXPXP) {
		j["g"] = s.g;
	}
}

inline void from_json(const nlohmann::json& j, ModelSpec& s)
{
	s.family = parse_model_family(j.at("family").get<std::string>());
	s.n_sites = j.value("n_sites", s.n_sites);
	s.lambda = j.value("lambda", s.family == ModelFamily::PXPZ ? kDefaultLambda : 0.0);
	s.range = j.value("r", s.family == ModelFamily::PXPZ ? kDefaultRange : 0);
	s.g = j.value("g", s.family == ModelFamily::PXPXP ? kDefaultG : 0.0);
}

inline void to_json(nlohmann::json& j, const EvolutionConfig& c)
{
	j = nlohmann::json{
	    {"tau", c.tau}, {"t_max", c.t_max}, {"snapshot_every", c.snapshot_every}, {"krylov_dim", c.krylov_dim}};
}

inline void from_json(const nlohmann::json& j, EvolutionConfig& c)
{
	c.tau = j.value("tau", c.tau);
	c.t_max = j.value("t_max", c.t_max);
	c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
	c.krylov_dim = j.value("krylov_dim", c.krylov_dim);
}

inline void to_json(nlohmann::json& j, const RunManifest& m)
{
	nlohmann::json sites = nlohmann::json::object();
	for(const auto& name : m.subsystems) {
		sites[name] = parse_subsystem(name, m.model.n_sites).sites;
	}
	j = nlohmann::json{{"model", m.model},
	                   {"evolution", m.evolution},
	                   {"subsystems", m.subsystems},
	                   {"subsystem_sites", sites},
	                   {"deltas", m.deltas},
	                   {"delta_grid", m.delta_grid},
	                   {"negativity_blocks", m.negativity_blocks},
	                   {"minima_quantile", m.minima_quantile},
	                   {"version", m.version},
	                   {"wall_clock", m.wall_clock},
	                   {"checksum", m.checksum}};
}

/// Missing keys keep the values already in `m`, so a partial config file
/// can be layered over command-line settings.
inline void from_json(const nlohmann::json& j, RunManifest& m)
{
	if(j.contains("model")) {
		const nlohmann::json& override = j.at("model");
		// keep current parameters unless the family itself changes
		nlohmann::json model = m.model;
		if(override.contains("family") &&
		   parse_model_family(override.at("family").get<std::string>()) != m.model.family) {
			model = nlohmann::json{{"family", override.at("family")}, {"n_sites", m.model.n_sites}};
		}
		model.update(override);
		m.model = model.get<ModelSpec>();
	}
	if(j.contains("evolution")) {
		j.at("evolution").get_to(m.evolution);
	}
	m.subsystems = j.value("subsystems", m.subsystems);
	m.deltas = j.value("deltas", m.deltas);
	m.delta_grid = j.value("delta_grid", m.delta_grid);
	m.negativity_blocks = j.value("negativity_blocks", m.negativity_blocks);
	m.minima_quantile = j.value("minima_quantile", m.minima_quantile);
	m.version = j.value("version", m.version);
	m.wall_clock = j.value("wall_clock", m.wall_clock);
	m.checksum = j.value("checksum", m.checksum);
}

} // namespace pxpflow
