#pragma once

// Distinguishability measures, information-backflow degrees and the other
// scalar diagnostics computed from snapshots.

#include "evolve.hpp"
#include "rdm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pxpflow {

/// Half the sum of |eigenvalues| of rho - sigma.
[[nodiscard]] inline double trace_distance(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma)
{
	if(rho.rows() != sigma.rows() || rho.cols() != sigma.cols() || rho.rows() != rho.cols()) {
		throw std::invalid_argument("trace distance needs square matrices of equal size");
	}
	// fixed operand order makes the result exactly symmetric
	const auto key = [](const Eigen::MatrixXcd& m) {
		return std::span<const double>(reinterpret_cast<const double*>(m.data()), 2 * static_cast<std::size_t>(m.size()));
	};
	const auto a = key(rho);
	const auto b = key(sigma);
	const bool swap = std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
	const Eigen::MatrixXcd diff = swap ? Eigen::MatrixXcd(sigma - rho) : Eigen::MatrixXcd(rho - sigma);
	if(diff.rows() == 2) {
		// closed form for a single spin
		const double mean = 0.5 * (diff(0, 0).real() + diff(1, 1).real());
		const double half_gap = 0.5 * (diff(0, 0).real() - diff(1, 1).real());
		const double radius = std::sqrt(half_gap * half_gap + std::norm(diff(0, 1)));
		return 0.5 * (std::abs(mean + radius) + std::abs(mean - radius));
	}
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(diff, Eigen::EigenvaluesOnly);
	return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

/// Half l1 distance between two probability vectors.
[[nodiscard]] inline double tvd(std::span<const double> p, std::span<const double> q)
{
	if(p.size() != q.size()) {
		throw std::invalid_argument("probability vectors differ in length");
	}
	const auto check = [](std::span<const double> v) {
		const double total = std::accumulate(v.begin(), v.end(), 0.0);
		if(std::abs(total - 1.0) > 1e-10) {
			throw std::domain_error("probability vector sums to " + std::to_string(total));
		}
	};
	check(p);
	check(q);
	double acc = 0.0;
	for(std::size_t i = 0; i < p.size(); ++i) {
		acc += std::abs(p[i] - q[i]);
	}
	return 0.5 * acc;
}

enum class DistanceMeasure { Trace, TotalVariation };

/// d(t) = distance(rho_{t+delta}, rho_t) on the snapshot grid, truncated so
/// that t + delta is on the grid.
struct DistanceSeries {
	SubsystemSpec sub;
	DistanceMeasure measure = DistanceMeasure::Trace;
	double delta = 0.0;
	double spacing = 0.0;
	std::vector<double> times;
	std::vector<double> values;
};

struct DegreeCurve {
	SubsystemSpec sub;
	DistanceMeasure measure = DistanceMeasure::Trace;
	std::vector<double> deltas;
	std::vector<double> degree;
};

namespace detail {

inline double grid_spacing(std::span<const double> times)
{
	if(times.size() < 2) {
		return 0.0;
	}
	const double h = times[1] - times[0];
	if(!(h > 0.0)) {
		throw std::invalid_argument("snapshot times must increase");
	}
	for(std::size_t k = 1; k < times.size(); ++k) {
		if(std::abs(times[k] - times[0] - static_cast<double>(k) * h) > 1e-9 * std::max(1.0, times[k])) {
			throw std::invalid_argument("snapshot times are not uniformly spaced");
		}
	}
	return h;
}

// Number of grid steps in `delta`.
inline std::size_t separation_steps(double delta, double spacing, std::size_t n_snapshots)
{
	if(delta < 0.0) {
		throw std::invalid_argument("delta must be >= 0");
	}
	if(n_snapshots == 0) {
		throw std::invalid_argument("no snapshots");
	}
	if(delta == 0.0) {
		return 0;
	}
	const double span = spacing * static_cast<double>(n_snapshots - 1);
	if(n_snapshots < 2 || delta >= span - 1e-9 * std::max(1.0, span)) {
		throw std::invalid_argument("delta " + std::to_string(delta) + " is not below t_max " +
		                            std::to_string(span));
	}
	const double ratio = delta / spacing;
	const double rounded = std::round(ratio);
	if(std::abs(ratio - rounded) > 1e-6) {
		throw std::invalid_argument("delta " + std::to_string(delta) + " is not a multiple of the spacing " +
		                            std::to_string(spacing));
	}
	return static_cast<std::size_t>(rounded);
}

template<class Distance>
DistanceSeries make_series(const SubsystemSpec& sub, DistanceMeasure measure, std::span<const double> times,
                           double delta, Distance&& distance)
{
	const double spacing = grid_spacing(times);
	const std::size_t shift = separation_steps(delta, spacing, times.size());
	DistanceSeries out{sub, measure, delta, spacing, {}, {}};
	const std::size_t count = times.size() - shift;
	out.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(count));
	out.values.resize(count);
	for(std::size_t k = 0; k < count; ++k) {
		out.values[k] = distance(k + shift, k);
	}
	return out;
}

inline std::vector<double> rdm_times(std::span<const ReducedDensityMatrix> rdms)
{
	std::vector<double> times;
	times.reserve(rdms.size());
	for(const auto& r : rdms) {
		times.push_back(r.t);
	}
	return times;
}

} // namespace detail

/// Trace distances between delta-separated reduced states.
[[nodiscard]] inline DistanceSeries distance_series(std::span<const ReducedDensityMatrix> rdms, double delta)
{
	if(rdms.empty()) {
		throw std::invalid_argument("no snapshots");
	}
	const auto times = detail::rdm_times(rdms);
	return detail::make_series(rdms.front().sub, DistanceMeasure::Trace, times, delta,
	                           [&](std::size_t later, std::size_t earlier) {
		                           return trace_distance(rdms[later].mat, rdms[earlier].mat);
	                           });
}

/// Total variation distances between the descending spectra of
/// delta-separated reduced states.
[[nodiscard]] inline DistanceSeries tvd_series(const SubsystemSpec& sub, std::span<const std::vector<double>> spectra,
                                               std::span<const double> times, double delta)
{
	if(spectra.size() != times.size()) {
		throw std::invalid_argument("spectra and times differ in length");
	}
	return detail::make_series(sub, DistanceMeasure::TotalVariation, times, delta,
	                           [&](std::size_t later, std::size_t earlier) {
		                           return tvd(spectra[later], spectra[earlier]);
	                           });
}

[[nodiscard]] inline DistanceSeries tvd_series(std::span<const ReducedDensityMatrix> rdms, double delta)
{
	if(rdms.empty()) {
		throw std::invalid_argument("no snapshots");
	}
	std::vector<std::vector<double>> spectra;
	spectra.reserve(rdms.size());
	for(const auto& r : rdms) {
		spectra.push_back(eigenvalues_desc(r));
	}
	const auto times = detail::rdm_times(rdms);
	return tvd_series(rdms.front().sub, spectra, times, delta);
}

/// Forward-difference slope (d(t + tau) - d(t)) / tau; tau must equal the
/// series' grid spacing.
[[nodiscard]] inline std::vector<double> slope_alpha(const DistanceSeries& series, double tau)
{
	if(series.values.size() < 2) {
		throw std::invalid_argument("slope needs at least two points");
	}
	if(std::abs(tau - series.spacing) > 1e-9 * std::max(1.0, tau)) {
		throw std::invalid_argument("tau " + std::to_string(tau) + " differs from the grid spacing " +
		                            std::to_string(series.spacing));
	}
	std::vector<double> alpha(series.values.size() - 1);
	for(std::size_t k = 0; k + 1 < series.values.size(); ++k) {
		alpha[k] = (series.values[k + 1] - series.values[k]) / tau;
	}
	return alpha;
}

/// Sum of the strictly positive slopes: cumulative revival of the distance.
[[nodiscard]] inline double degree(const DistanceSeries& series, double tau)
{
	double total = 0.0;
	for(double a : slope_alpha(series, tau)) {
		if(a > 0.0) {
			total += a;
		}
	}
	return total;
}

/// Degree of trace-distance backflow for every delta of the grid.
[[nodiscard]] inline DegreeCurve degree_curve(std::span<const ReducedDensityMatrix> rdms,
                                              std::span<const double> deltas)
{
	if(rdms.empty()) {
		throw std::invalid_argument("no snapshots");
	}
	DegreeCurve curve{rdms.front().sub, DistanceMeasure::Trace, {deltas.begin(), deltas.end()}, {}};
	curve.degree.reserve(deltas.size());
	for(double delta : deltas) {
		const auto series = distance_series(rdms, delta);
		curve.degree.push_back(degree(series, series.spacing));
	}
	return curve;
}

/// Degree of total-variation backflow between descending spectra.
[[nodiscard]] inline DegreeCurve tvd_degree_curve(const SubsystemSpec& sub,
                                                  std::span<const std::vector<double>> spectra,
                                                  std::span<const double> times, std::span<const double> deltas)
{
	DegreeCurve curve{sub, DistanceMeasure::TotalVariation, {deltas.begin(), deltas.end()}, {}};
	curve.degree.reserve(deltas.size());
	for(double delta : deltas) {
		const auto series = tvd_series(sub, spectra, times, delta);
		curve.degree.push_back(degree(series, series.spacing));
	}
	return curve;
}

[[nodiscard]] inline double tvd_degree(std::span<const ReducedDensityMatrix> rdms, double delta, double tau)
{
	return degree(tvd_series(rdms, delta), tau);
}

/// Return probability |<psi_t|psi_0>|^2 for every snapshot.
[[nodiscard]] inline std::vector<double> fidelity(const Trajectory& traj)
{
	std::vector<double> out;
	out.reserve(traj.states.size());
	if(traj.states.empty()) {
		return out;
	}
	const StateVector& initial = traj.states.front();
	for(const auto& psi : traj.states) {
		out.push_back(std::norm(initial.dot(psi)));
	}
	return out;
}

/// -sum p ln p in nats, with 0 ln 0 = 0.
[[nodiscard]] inline double von_neumann_entropy(std::span<const double> probabilities)
{
	double s = 0.0;
	for(double p : probabilities) {
		if(p > 0.0) {
			s -= p * std::log(p);
		}
	}
	return s;
}

[[nodiscard]] inline double von_neumann_entropy(const Eigen::MatrixXcd& rho)
{
	return von_neumann_entropy(eigenvalues_desc(rho));
}

/// rho^{T_B} for a joint index a * dim_b + b.
[[nodiscard]] inline Eigen::MatrixXcd partial_transpose(const Eigen::MatrixXcd& rho, int dim_a, int dim_b)
{
	if(dim_a < 1 || dim_b < 1 || rho.rows() != static_cast<Eigen::Index>(dim_a) * dim_b ||
	   rho.cols() != rho.rows()) {
		throw std::invalid_argument("dimensions " + std::to_string(dim_a) + "x" + std::to_string(dim_b) +
		                            " do not factor a " + std::to_string(rho.rows()) + "-dim matrix");
	}
	Eigen::MatrixXcd out(rho.rows(), rho.cols());
	for(int a = 0; a < dim_a; ++a) {
		for(int b = 0; b < dim_b; ++b) {
			for(int a2 = 0; a2 < dim_a; ++a2) {
				for(int b2 = 0; b2 < dim_b; ++b2) {
					out(a * dim_b + b, a2 * dim_b + b2) = rho(a * dim_b + b2, a2 * dim_b + b);
				}
			}
		}
	}
	return out;
}

/// Total magnitude of the negative eigenvalues of rho^{T_B}.
[[nodiscard]] inline double negativity(const Eigen::MatrixXcd& rho, int dim_a, int dim_b)
{
	const Eigen::MatrixXcd pt = partial_transpose(rho, dim_a, dim_b);
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(pt, Eigen::EigenvaluesOnly);
	double total = 0.0;
	for(double p : eig.eigenvalues()) {
		total += std::abs(p) - p;
	}
	return 0.5 * total;
}

struct PeriodEstimate {
	double period = 0.0;
	double uncertainty = 0.0;
	std::vector<double> extrema; // times of the detected deep extrema
};

inline constexpr double kDeepMinimumQuantile = 0.10;

/// Whether a deep run touching the first sample may contribute its argmin.
/// Series that are even in time about t = 0 (return probabilities) have a
/// genuine extremum there; generic series do not.
enum class EdgePolicy { Interior, IncludeStart };

/// Spacing of the "deep" local minima of a uniformly sampled series.
///
/// A point is deep when it lies at or below the given quantile of all
/// values. Each maximal run of deep points contributes its interior argmin.
/// Gaps that skip a minimum (a later, shallower dip missing the threshold)
/// are counted as the nearest integer multiple of the median gap, so the
/// period is total elapsed time over the number of periods; the uncertainty
/// is the spread of the per-period gaps.
[[nodiscard]] inline PeriodEstimate find_minima_period(std::span<const double> times, std::span<const double> values,
                                                      double quantile = kDeepMinimumQuantile,
                                                      EdgePolicy edges = EdgePolicy::Interior)
{
	if(times.size() != values.size() || values.size() < 3) {
		throw std::invalid_argument("period search needs matching times/values with >= 3 points");
	}
	if(!(quantile > 0.0 && quantile < 1.0)) {
		throw std::invalid_argument("quantile must lie in (0, 1)");
	}
	std::vector<double> sorted(values.begin(), values.end());
	const auto q_index = static_cast<std::size_t>(quantile * static_cast<double>(sorted.size() - 1));
	std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q_index), sorted.end());
	const double threshold = sorted[q_index];

	PeriodEstimate out;
	std::size_t k = 0;
	const std::size_t n = values.size();
	while(k < n) {
		if(values[k] > threshold) {
			++k;
			continue;
		}
		std::size_t best = k;
		std::size_t end = k;
		while(end < n && values[end] <= threshold) {
			if(values[end] < values[best]) {
				best = end;
			}
			++end;
		}
		if((best != 0 || edges == EdgePolicy::IncludeStart) && best != n - 1) {
			out.extrema.push_back(times[best]);
		}
		k = end;
	}
	if(out.extrema.size() < 2) {
		throw std::domain_error("fewer than two deep minima found");
	}
	std::vector<double> gaps;
	for(std::size_t i = 1; i < out.extrema.size(); ++i) {
		gaps.push_back(out.extrema[i] - out.extrema[i - 1]);
	}
	std::vector<double> tmp = gaps;
	std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2), tmp.end());
	const double median = tmp[tmp.size() / 2];
	double cycles = 0.0;
	std::vector<double> per_cycle;
	for(double gap : gaps) {
		const double m = std::max(1.0, std::round(gap / median));
		cycles += m;
		per_cycle.push_back(gap / m);
	}
	out.period = (out.extrema.back() - out.extrema.front()) / cycles;
	double var = 0.0;
	for(double g : per_cycle) {
		var += (g - out.period) * (g - out.period);
	}
	out.uncertainty = per_cycle.size() > 1 ? std::sqrt(var / static_cast<double>(per_cycle.size() - 1)) : 0.0;
	return out;
}

/// Same as find_minima_period applied to -values.
[[nodiscard]] inline PeriodEstimate find_maxima_period(std::span<const double> times, std::span<const double> values,
                                                      double quantile = kDeepMinimumQuantile,
                                                      EdgePolicy edges = EdgePolicy::Interior)
{
	std::vector<double> negated(values.size());
	std::transform(values.begin(), values.end(), negated.begin(), std::negate<>{});
	return find_minima_period(times, negated, quantile, edges);
}

struct CurveMinimum {
	std::size_t index = 0;
	double delta = 0.0;
	double value = 0.0;
};

/// Plain argmin over the whole curve.
[[nodiscard]] inline CurveMinimum global_minimum(const DegreeCurve& curve)
{
	if(curve.degree.empty()) {
		throw std::invalid_argument("empty degree curve");
	}
	const auto it = std::min_element(curve.degree.begin(), curve.degree.end());
	const auto k = static_cast<std::size_t>(it - curve.degree.begin());
	return {k, curve.deltas[k], *it};
}

/// Argmin after the leading rise of the curve. Every degree vanishes as
/// delta -> 0 (d(t) = O(delta)), so the low-delta edge of any grid is a
/// trivial minimum; the search starts at the first local maximum instead.
/// Curves that never turn down fall back to global_minimum.
[[nodiscard]] inline CurveMinimum interior_minimum(const DegreeCurve& curve)
{
	if(curve.degree.empty()) {
		throw std::invalid_argument("empty degree curve");
	}
	const auto& d = curve.degree;
	std::size_t start = 0;
	while(start + 1 < d.size() && d[start + 1] >= d[start]) {
		++start;
	}
	if(start + 1 >= d.size()) {
		return global_minimum(curve);
	}
	const auto it = std::min_element(d.begin() + static_cast<std::ptrdiff_t>(start), d.end());
	const auto k = static_cast<std::size_t>(it - d.begin());
	return {k, curve.deltas[k], *it};
}

/// Least-squares slope of y against x.
[[nodiscard]] inline double linear_fit_slope(std::span<const double> x, std::span<const double> y)
{
	if(x.size() != y.size() || x.size() < 2) {
		throw std::invalid_argument("linear fit needs at least two points");
	}
	const double n = static_cast<double>(x.size());
	const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
	const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
	double sxy = 0.0;
	double sxx = 0.0;
	for(std::size_t i = 0; i < x.size(); ++i) {
		sxy += (x[i] - mx) * (y[i] - my);
		sxx += (x[i] - mx) * (x[i] - mx);
	}
	if(sxx == 0.0) {
		throw std::invalid_argument("linear fit needs distinct x values");
	}
	return sxy / sxx;
}

} // namespace pxpflow
