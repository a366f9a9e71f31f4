#pragma once

// Reduced density matrices of small site subsets, computed directly on the
// blockaded basis.

#include "hilbert.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace pxpflow {

inline constexpr int kMaxSubsystemSites = 6;
inline constexpr double kEigenvalueClamp = -1e-10;

enum class SubsystemPattern { Adjacent, OddSeparated, Custom };

/// Ordered set of 1-based sites. The first site is the most significant bit
/// of the reduced-density-matrix index.
struct SubsystemSpec {
	std::vector<int> sites;
	SubsystemPattern pattern = SubsystemPattern::Custom;

	[[nodiscard]] int size() const noexcept { return static_cast<int>(sites.size()); }
	[[nodiscard]] int dimension() const noexcept { return 1 << sites.size(); }

	/// Spins at N/2, N/2+2, ..., N/2+2(l-1).
	static SubsystemSpec odd_separated(int n_sites, int spins)
	{
		return strided(n_sites, spins, 2, SubsystemPattern::OddSeparated);
	}

	/// Contiguous spins N/2, ..., N/2+l-1.
	static SubsystemSpec adjacent(int n_sites, int spins)
	{
		return strided(n_sites, spins, 1, SubsystemPattern::Adjacent);
	}

	static SubsystemSpec custom(std::vector<int> sites)
	{
		return SubsystemSpec{std::move(sites), SubsystemPattern::Custom};
	}

	/// File-name friendly label: odd2, adj2, or s4-6-9 for custom sets.
	[[nodiscard]] std::string label() const
	{
		switch(pattern) {
		case SubsystemPattern::OddSeparated: return "odd" + std::to_string(size());
		case SubsystemPattern::Adjacent: return "adj" + std::to_string(size());
		case SubsystemPattern::Custom: break;
		}
		std::string out = "s";
		for(std::size_t k = 0; k < sites.size(); ++k) {
			out += (k == 0 ? "" : "-") + std::to_string(sites[k]);
		}
		return out;
	}

	void validate(int n_sites) const
	{
		if(sites.empty()) {
			throw std::invalid_argument("subsystem has no sites");
		}
		if(size() > kMaxSubsystemSites) {
			throw SizeError("subsystem " + label() + " has more than 6 sites");
		}
		for(std::size_t k = 0; k < sites.size(); ++k) {
			if(sites[k] < 1 || sites[k] > n_sites) {
				throw std::out_of_range("subsystem " + label() + ": site " + std::to_string(sites[k]) +
				                        " outside 1.." + std::to_string(n_sites));
			}
			if(k > 0 && sites[k] <= sites[k - 1]) {
				throw std::invalid_argument("subsystem " + label() + ": sites must be strictly increasing");
			}
		}
	}

	friend bool operator==(const SubsystemSpec&, const SubsystemSpec&) = default;

private:
	static SubsystemSpec strided(int n_sites, int spins, int stride, SubsystemPattern pattern)
	{
		SubsystemSpec sub{{}, pattern};
		for(int k = 0; k < spins; ++k) {
			sub.sites.push_back(n_sites / 2 + stride * k);
		}
		sub.validate(n_sites);
		return sub;
	}
};

/// Parses "odd3", "adj2" or an explicit dash-separated site list "4-6-9".
[[nodiscard]] inline SubsystemSpec parse_subsystem(const std::string& text, int n_sites)
{
	auto count_after = [&](std::size_t prefix) {
		const std::string digits = text.substr(prefix);
		if(digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
			throw std::invalid_argument("bad subsystem '" + text + "'");
		}
		return std::stoi(digits);
	};
	if(text.rfind("odd", 0) == 0) {
		return SubsystemSpec::odd_separated(n_sites, count_after(3));
	}
	if(text.rfind("adj", 0) == 0) {
		return SubsystemSpec::adjacent(n_sites, count_after(3));
	}
	std::string body = text;
	if(!body.empty() && body.front() == 's') {
		body.erase(0, 1);
	}
	SubsystemSpec sub;
	std::size_t pos = 0;
	while(pos <= body.size()) {
		const std::size_t dash = body.find('-', pos);
		const std::string item = body.substr(pos, dash == std::string::npos ? std::string::npos : dash - pos);
		if(item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
			throw std::invalid_argument("bad subsystem '" + text + "'");
		}
		sub.sites.push_back(std::stoi(item));
		if(dash == std::string::npos) {
			break;
		}
		pos = dash + 1;
	}
	sub.validate(n_sites);
	return sub;
}

struct ReducedDensityMatrix {
	SubsystemSpec sub;
	double t = 0.0;
	Eigen::MatrixXcd mat;
};

/// Precomputed bookkeeping for tracing out the complement of one subsystem.
/// Basis states are grouped by their environment bits; only states within a
/// group contribute to the same block of rho, so the cost is
/// O(dim * 2^l) rather than O(dim^2).
class PartialTracePlan {
public:
	PartialTracePlan(const BlockadeBasis& basis, SubsystemSpec sub)
	    : sub_{std::move(sub)}, dim_{basis.dimension()}
	{
		sub_.validate(basis.n_sites());
		const int n = basis.n_sites();
		std::uint32_t sub_mask = 0;
		for(int site : sub_.sites) {
			sub_mask |= site_mask(n, site);
		}
		const auto& states = basis.states();
		local_.resize(states.size());
		for(std::size_t i = 0; i < states.size(); ++i) {
			std::uint32_t a = 0;
			for(int site : sub_.sites) {
				a = (a << 1) | (basis.is_up(states[i], site) ? 1U : 0U);
			}
			local_[i] = a;
		}
		order_.resize(states.size());
		std::iota(order_.begin(), order_.end(), std::uint32_t{0});
		std::stable_sort(order_.begin(), order_.end(), [&](std::uint32_t x, std::uint32_t y) {
			return (states[x].bits & ~sub_mask) < (states[y].bits & ~sub_mask);
		});
		group_start_.push_back(0);
		for(std::size_t k = 1; k < order_.size(); ++k) {
			if((states[order_[k]].bits & ~sub_mask) != (states[order_[k - 1]].bits & ~sub_mask)) {
				group_start_.push_back(k);
			}
		}
		group_start_.push_back(order_.size());
	}

	[[nodiscard]] const SubsystemSpec& subsystem() const noexcept { return sub_; }

	[[nodiscard]] Eigen::MatrixXcd apply(const StateVector& psi) const
	{
		if(static_cast<std::size_t>(psi.size()) != dim_) {
			throw std::invalid_argument("state dimension does not match the basis");
		}
		const int d = sub_.dimension();
		Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
		for(std::size_t g = 0; g + 1 < group_start_.size(); ++g) {
			for(std::size_t x = group_start_[g]; x < group_start_[g + 1]; ++x) {
				const Complex amp = psi[order_[x]];
				const auto a = local_[order_[x]];
				for(std::size_t y = group_start_[g]; y < group_start_[g + 1]; ++y) {
					rho(a, local_[order_[y]]) += amp * std::conj(psi[order_[y]]);
				}
			}
		}
		return rho;
	}

private:
	SubsystemSpec sub_;
	std::size_t dim_;
	std::vector<std::uint32_t> local_;
	std::vector<std::uint32_t> order_;
	std::vector<std::size_t> group_start_;
};

[[nodiscard]] inline ReducedDensityMatrix partial_trace(const BlockadeBasis& basis, const StateVector& psi,
                                                        const SubsystemSpec& sub, double t = 0.0)
{
	const PartialTracePlan plan(basis, sub);
	return {plan.subsystem(), t, plan.apply(psi)};
}

/// Eigenvalues in descending order. Small negative roundoff is clamped to
/// zero and the result renormalised; anything below -1e-10 is an error.
[[nodiscard]] inline std::vector<double> eigenvalues_desc(const Eigen::MatrixXcd& rho)
{
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho, Eigen::EigenvaluesOnly);
	const Eigen::VectorXd& values = eig.eigenvalues();
	std::vector<double> out(values.data(), values.data() + values.size());
	std::sort(out.begin(), out.end(), std::greater<>{});
	if(!out.empty() && out.back() < kEigenvalueClamp) {
		throw std::domain_error("density matrix has eigenvalue " + std::to_string(out.back()) +
		                        " below the clamp threshold");
	}
	double total = 0.0;
	for(double& p : out) {
		p = std::max(p, 0.0);
		total += p;
	}
	if(total <= 0.0) {
		throw std::domain_error("density matrix has no positive weight");
	}
	for(double& p : out) {
		p /= total;
	}
	return out;
}

[[nodiscard]] inline std::vector<double> eigenvalues_desc(const ReducedDensityMatrix& rho)
{
	return eigenvalues_desc(rho.mat);
}

/// Schmidt probabilities for the cut between sites 1..cut and cut+1..N, in
/// descending order. Works for cuts far larger than the dense-subsystem
/// limit since only blockaded configurations of each half appear.
class BipartitionPlan {
public:
	BipartitionPlan(const BlockadeBasis& basis, int cut) : dim_{basis.dimension()}
	{
		const int n = basis.n_sites();
		if(cut < 1 || cut >= n) {
			throw std::out_of_range("cut must lie in [1, N-1]");
		}
		const int right_bits = n - cut;
		const std::uint32_t right_mask = (std::uint32_t{1} << right_bits) - 1U;
		std::vector<std::uint32_t> lefts;
		std::vector<std::uint32_t> rights;
		for(const auto s : basis.states()) {
			lefts.push_back(s.bits >> right_bits);
			rights.push_back(s.bits & right_mask);
		}
		auto unique_sorted = [](std::vector<std::uint32_t> v) {
			std::sort(v.begin(), v.end());
			v.erase(std::unique(v.begin(), v.end()), v.end());
			return v;
		};
		const auto left_keys = unique_sorted(lefts);
		const auto right_keys = unique_sorted(rights);
		rows_ = static_cast<Eigen::Index>(left_keys.size());
		cols_ = static_cast<Eigen::Index>(right_keys.size());
		row_.resize(dim_);
		col_.resize(dim_);
		for(std::size_t i = 0; i < dim_; ++i) {
			row_[i] = static_cast<Eigen::Index>(
			    std::lower_bound(left_keys.begin(), left_keys.end(), lefts[i]) - left_keys.begin());
			col_[i] = static_cast<Eigen::Index>(
			    std::lower_bound(right_keys.begin(), right_keys.end(), rights[i]) - right_keys.begin());
		}
	}

	[[nodiscard]] std::vector<double> schmidt_probabilities(const StateVector& psi) const
	{
		if(static_cast<std::size_t>(psi.size()) != dim_) {
			throw std::invalid_argument("state dimension does not match the basis");
		}
		Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows_, cols_);
		for(std::size_t i = 0; i < dim_; ++i) {
			m(row_[i], col_[i]) = psi[static_cast<Eigen::Index>(i)];
		}
		const Eigen::MatrixXcd reduced = rows_ <= cols_ ? Eigen::MatrixXcd(m * m.adjoint())
		                                                : Eigen::MatrixXcd(m.adjoint() * m);
		return eigenvalues_desc(reduced);
	}

private:
	std::size_t dim_;
	Eigen::Index rows_ = 0;
	Eigen::Index cols_ = 0;
	std::vector<Eigen::Index> row_;
	std::vector<Eigen::Index> col_;
};

} // namespace pxpflow
