#pragma once

// PXP Hamiltonian and its PXPZ / PXPXP deformations on the blockaded basis.

#include "hilbert.hpp"

#include <cstdio>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace pxpflow {

enum class ModelFamily { PXP, PXPZ, PXPXP };

[[nodiscard]] inline std::string_view to_string(ModelFamily family)
{
	switch(family) {
	case ModelFamily::PXP: return "pxp";
	case ModelFamily::PXPZ: return "pxpz";
	case ModelFamily::PXPXP: return "pxpxp";
	}
	return "unknown";
}

[[nodiscard]] inline ModelFamily parse_model_family(std::string_view name)
{
	if(name == "pxp" || name == "PXP") {
		return ModelFamily::PXP;
	}
	if(name == "pxpz" || name == "PXPZ") {
		return ModelFamily::PXPZ;
	}
	if(name == "pxpxp" || name == "PXPXP") {
		return ModelFamily::PXPXP;
	}
	throw std::invalid_argument("unknown model family '" + std::string(name) + "'");
}

inline constexpr double kDefaultLambda = 0.05;
inline constexpr int kDefaultRange = 3;
inline constexpr double kDefaultG = 0.25;

/// Model family and its deformation parameters. Parameters that do not
/// belong to the family are kept at zero.
struct ModelSpec {
	ModelFamily family = ModelFamily::PXP;
	int n_sites = 20;
	double lambda = 0.0; // PXPZ strength
	int range = 0;       // PXPZ range r
	double g = 0.0;      // PXPXP strength

	static ModelSpec pxp(int n_sites) { return {ModelFamily::PXP, n_sites, 0.0, 0, 0.0}; }
	static ModelSpec pxpz(int n_sites, double lambda = kDefaultLambda, int range = kDefaultRange)
	{
		return {ModelFamily::PXPZ, n_sites, lambda, range, 0.0};
	}
	static ModelSpec pxpxp(int n_sites, double g = kDefaultG)
	{
		return {ModelFamily::PXPXP, n_sites, 0.0, 0, g};
	}

	/// Returns the list of violated constraints, empty when valid.
	[[nodiscard]] std::vector<std::string> problems() const
	{
		std::vector<std::string> out;
		if(n_sites < kMinSites || n_sites > kMaxSites) {
			out.push_back("n_sites must lie in [2, 28]");
		}
		switch(family) {
		case ModelFamily::PXP:
			if(lambda != 0.0 || range != 0 || g != 0.0) {
				out.push_back("pxp takes no deformation parameters");
			}
			break;
		case ModelFamily::PXPZ:
			if(!(lambda >= 0.0)) {
				out.push_back("lambda must be >= 0");
			}
			if(range < 2) {
				out.push_back("r must be >= 2");
			}
			else if(range >= n_sites) {
				out.push_back("r must be smaller than n_sites");
			}
			if(g != 0.0) {
				out.push_back("pxpz takes no g parameter");
			}
			break;
		case ModelFamily::PXPXP:
			if(!(g >= 0.0)) {
				out.push_back("g must be >= 0");
			}
			if(n_sites < 5) {
				out.push_back("pxpxp needs n_sites >= 5");
			}
			if(lambda != 0.0 || range != 0) {
				out.push_back("pxpxp takes no lambda/r parameters");
			}
			break;
		}
		return out;
	}

	void validate() const
	{
		const auto issues = problems();
		if(!issues.empty()) {
			std::string msg = "invalid model:";
			for(const auto& issue : issues) {
				msg += " " + issue + ";";
			}
			throw std::invalid_argument(msg);
		}
	}

	friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct MatrixEntry {
	std::size_t row;
	std::size_t col;
	double value;

	friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

/// Real symmetric operator on a blockaded basis, stored as a coordinate list
/// sorted by (row, col) plus a compressed-row copy for products.
class SparseHamiltonian {
public:
	SparseHamiltonian(std::shared_ptr<const BlockadeBasis> basis, ModelSpec spec,
	                  std::vector<MatrixEntry> entries)
	    : basis_{std::move(basis)}, spec_{spec}, entries_{std::move(entries)}
	{
		std::sort(entries_.begin(), entries_.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
			return std::tie(a.row, a.col) < std::tie(b.row, b.col);
		});
		const std::size_t dim = basis_->dimension();
		row_start_.assign(dim + 1, 0);
		cols_.reserve(entries_.size());
		values_.reserve(entries_.size());
		for(const auto& e : entries_) {
			if(e.row >= dim || e.col >= dim) {
				throw std::out_of_range("matrix entry outside the basis");
			}
			++row_start_[e.row + 1];
			cols_.push_back(static_cast<std::uint32_t>(e.col));
			values_.push_back(e.value);
		}
		for(std::size_t r = 0; r < dim; ++r) {
			row_start_[r + 1] += row_start_[r];
		}
	}

	[[nodiscard]] const BlockadeBasis& basis() const noexcept { return *basis_; }
	[[nodiscard]] std::shared_ptr<const BlockadeBasis> shared_basis() const noexcept { return basis_; }
	[[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
	[[nodiscard]] const std::vector<MatrixEntry>& entries() const noexcept { return entries_; }
	[[nodiscard]] std::size_t dimension() const noexcept { return basis_->dimension(); }

	/// out = H * in. `out` must not alias `in`.
	void apply(Eigen::Ref<const StateVector> in, Eigen::Ref<StateVector> out) const
	{
		const auto dim = static_cast<Eigen::Index>(dimension());
		if(in.size() != dim || out.size() != dim) {
			throw std::invalid_argument("state dimension does not match the Hamiltonian");
		}
		for(std::size_t r = 0; r + 1 < row_start_.size(); ++r) {
			Complex acc{0.0, 0.0};
			for(std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
				acc += values_[k] * in[cols_[k]];
			}
			out[static_cast<Eigen::Index>(r)] = acc;
		}
	}

	[[nodiscard]] StateVector operator*(const StateVector& in) const
	{
		StateVector out(in.size());
		apply(in, out);
		return out;
	}

	[[nodiscard]] double expectation(const StateVector& psi) const
	{
		return psi.dot(*this * psi).real();
	}

	[[nodiscard]] Eigen::MatrixXd to_dense() const
	{
		const auto dim = static_cast<Eigen::Index>(dimension());
		Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
		for(const auto& e : entries_) {
			out(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += e.value;
		}
		return out;
	}

	/// Three-column text dump: row col value (0-based ordinals).
	void write_triplets(std::ostream& os) const
	{
		char line[96];
		for(const auto& e : entries_) {
			std::snprintf(line, sizeof line, "%zu %zu %.17g\n", e.row, e.col, e.value);
			os << line;
		}
	}

private:
	std::shared_ptr<const BlockadeBasis> basis_;
	ModelSpec spec_;
	std::vector<MatrixEntry> entries_;
	std::vector<std::size_t> row_start_;
	std::vector<std::uint32_t> cols_;
	std::vector<double> values_;
};

namespace detail {

// Sites `sites` all down in `config`; sites outside 1..N are skipped.
template<class... Sites>
[[nodiscard]] bool all_down(const BlockadeBasis& basis, SpinConfig config, Sites... sites)
{
	const int n = basis.n_sites();
	return ((sites < 1 || sites > n || !basis.is_up(config, sites)) && ...);
}

[[nodiscard]] inline double z_value(const BlockadeBasis& basis, SpinConfig config, int site)
{
	return basis.is_up(config, site) ? 1.0 : -1.0;
}

// Every single-spin flip allowed by the blockade, including the two boundary
// flips sigma^x_1 P_2 and P_{N-1} sigma^x_N. `weight(config, site)` gives the
// matrix element for flipping `site` out of `config`; both endpoints share
// every bit except `site`, so the element is symmetric.
template<class Weight>
void add_pxp_terms(const BlockadeBasis& basis, std::vector<MatrixEntry>& out, Weight&& weight)
{
	const int n = basis.n_sites();
	const auto& states = basis.states();
	for(std::size_t col = 0; col < states.size(); ++col) {
		const SpinConfig s = states[col];
		for(int site = 1; site <= n; ++site) {
			if(!all_down(basis, s, site - 1, site + 1)) {
				continue;
			}
			const SpinConfig flipped{s.bits ^ site_mask(n, site)};
			out.push_back({basis.index(flipped), col, weight(s, site)});
		}
	}
}

} // namespace detail

[[nodiscard]] inline SparseHamiltonian build_pxp(std::shared_ptr<const BlockadeBasis> basis)
{
	std::vector<MatrixEntry> entries;
	detail::add_pxp_terms(*basis, entries, [](SpinConfig, int) { return 1.0; });
	const int n = basis->n_sites();
	return SparseHamiltonian(std::move(basis), ModelSpec::pxp(n), std::move(entries));
}

/// H_PXP - lambda sum_i P_{i-1} X_i P_{i+1} (Z_{i-r} + Z_{i+r}); Z factors
/// that fall off the chain are dropped, the remaining one is kept.
[[nodiscard]] inline SparseHamiltonian build_pxpz(std::shared_ptr<const BlockadeBasis> basis,
                                                  double lambda, int range)
{
	const ModelSpec spec = ModelSpec::pxpz(basis->n_sites(), lambda, range);
	spec.validate();
	const BlockadeBasis& b = *basis;
	const int n = b.n_sites();
	std::vector<MatrixEntry> entries;
	detail::add_pxp_terms(b, entries, [&](SpinConfig s, int site) {
		double z_sum = 0.0;
		if(site - range >= 1) {
			z_sum += detail::z_value(b, s, site - range);
		}
		if(site + range <= n) {
			z_sum += detail::z_value(b, s, site + range);
		}
		return 1.0 - lambda * z_sum;
	});
	return SparseHamiltonian(std::move(basis), spec, std::move(entries));
}

/// H_PXP + g sum_i P_{i-1} X_i P_{i+1} X_{i+2} P_{i+3}; the bulk sum runs over
/// i = 2..N-3 and the boundary terms i = 1 and i = N-2 drop the projector
/// that falls off the chain.
[[nodiscard]] inline SparseHamiltonian build_pxpxp(std::shared_ptr<const BlockadeBasis> basis, double g)
{
	const ModelSpec spec = ModelSpec::pxpxp(basis->n_sites(), g);
	spec.validate();
	const BlockadeBasis& b = *basis;
	const int n = b.n_sites();
	std::vector<MatrixEntry> entries;
	detail::add_pxp_terms(b, entries, [](SpinConfig, int) { return 1.0; });
	const auto& states = b.states();
	for(std::size_t col = 0; g != 0.0 && col < states.size(); ++col) {
		const SpinConfig s = states[col];
		for(int site = 1; site + 2 <= n; ++site) {
			if(!detail::all_down(b, s, site - 1, site + 1, site + 3)) {
				continue;
			}
			const SpinConfig flipped{s.bits ^ site_mask(n, site) ^ site_mask(n, site + 2)};
			entries.push_back({b.index(flipped), col, g});
		}
	}
	return SparseHamiltonian(std::move(basis), spec, std::move(entries));
}

[[nodiscard]] inline SparseHamiltonian build_hamiltonian(const ModelSpec& spec,
                                                         std::shared_ptr<const BlockadeBasis> basis)
{
	spec.validate();
	if(basis->n_sites() != spec.n_sites) {
		throw std::invalid_argument("basis and model disagree on the chain length");
	}
	switch(spec.family) {
	case ModelFamily::PXP: return build_pxp(std::move(basis));
	case ModelFamily::PXPZ: return build_pxpz(std::move(basis), spec.lambda, spec.range);
	case ModelFamily::PXPXP: return build_pxpxp(std::move(basis), spec.g);
	}
	throw std::logic_error("unhandled model family");
}

[[nodiscard]] inline SparseHamiltonian build_hamiltonian(const ModelSpec& spec)
{
	return build_hamiltonian(spec, std::make_shared<const BlockadeBasis>(spec.n_sites));
}

} // namespace pxpflow
