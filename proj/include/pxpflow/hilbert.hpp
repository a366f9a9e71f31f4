#pragma once

// Rydberg-blockaded Hilbert space of an open spin-1/2 chain.
//
// Sites are labelled 1..N with site 1 stored in the most significant bit of
// the configuration word, so that sorting configurations as unsigned
// integers sorts them lexicographically by site. Bit value 1 is spin up.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pxpflow {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;

/// Thrown when a requested size is outside the supported range.
class SizeError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

/// Spin configuration of the whole chain, one bit per site.
struct SpinConfig {
	std::uint32_t bits = 0;

	friend constexpr auto operator<=>(SpinConfig, SpinConfig) = default;

	/// No two neighbouring sites are simultaneously up.
	[[nodiscard]] constexpr bool satisfies_blockade() const
	{
		return (bits & (bits >> 1)) == 0;
	}
};

inline constexpr int kMinSites = 2;
inline constexpr int kMaxSites = 28;

/// Bit mask of site `site` (1-based) in a chain of `n_sites`.
[[nodiscard]] constexpr std::uint32_t site_mask(int n_sites, int site)
{
	return std::uint32_t{1} << (n_sites - site);
}

/// Number of N-bit strings without "11": F(N+2) with F(1)=F(2)=1.
[[nodiscard]] constexpr std::uint64_t blockade_dimension(int n_sites)
{
	std::uint64_t a = 1; // F(1)
	std::uint64_t b = 1; // F(2)
	for(int k = 0; k < n_sites; ++k) {
		const std::uint64_t c = a + b;
		a = b;
		b = c;
	}
	return b;
}

class BlockadeBasis {
public:
	explicit BlockadeBasis(int n_sites) : n_sites_{n_sites}
	{
		if(n_sites < kMinSites || n_sites > kMaxSites) {
			throw SizeError("chain length must lie in [" + std::to_string(kMinSites) + ", " +
			                std::to_string(kMaxSites) + "], got " + std::to_string(n_sites));
		}
		states_.reserve(blockade_dimension(n_sites));
		enumerate(0, 0, false);
	}

	[[nodiscard]] int n_sites() const noexcept { return n_sites_; }
	[[nodiscard]] std::size_t dimension() const noexcept { return states_.size(); }
	[[nodiscard]] const std::vector<SpinConfig>& states() const noexcept { return states_; }
	[[nodiscard]] SpinConfig operator[](std::size_t ordinal) const { return states_[ordinal]; }

	/// Ordinal of `config`, or npos when it is not a blockaded configuration.
	[[nodiscard]] std::size_t find(SpinConfig config) const noexcept
	{
		const auto it = std::lower_bound(states_.begin(), states_.end(), config);
		if(it == states_.end() || *it != config) {
			return npos;
		}
		return static_cast<std::size_t>(it - states_.begin());
	}

	[[nodiscard]] std::size_t index(SpinConfig config) const
	{
		const auto ordinal = find(config);
		if(ordinal == npos) {
			throw std::out_of_range("configuration is not in the blockaded basis");
		}
		return ordinal;
	}

	[[nodiscard]] bool is_up(SpinConfig config, int site) const noexcept
	{
		return (config.bits & site_mask(n_sites_, site)) != 0;
	}

	/// Néel configuration |down up down up ...>: site 1 down, even sites up.
	[[nodiscard]] SpinConfig neel_config() const noexcept
	{
		SpinConfig config;
		for(int site = 2; site <= n_sites_; site += 2) {
			config.bits |= site_mask(n_sites_, site);
		}
		return config;
	}

	[[nodiscard]] std::string to_string(SpinConfig config) const
	{
		std::string out(static_cast<std::size_t>(n_sites_), '0');
		for(int site = 1; site <= n_sites_; ++site) {
			if(is_up(config, site)) {
				out[static_cast<std::size_t>(site - 1)] = '1';
			}
		}
		return out;
	}

	static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
	// Depth-first from site 1 (most significant bit), "down" before "up",
	// which emits configurations in ascending integer order.
	void enumerate(int placed, std::uint32_t prefix, bool previous_up)
	{
		if(placed == n_sites_) {
			states_.push_back(SpinConfig{prefix});
			return;
		}
		enumerate(placed + 1, prefix << 1, false);
		if(!previous_up) {
			enumerate(placed + 1, (prefix << 1) | 1U, true);
		}
	}

	int n_sites_;
	std::vector<SpinConfig> states_;
};

[[nodiscard]] inline BlockadeBasis build_basis(int n_sites)
{
	return BlockadeBasis(n_sites);
}

/// Product state with unit amplitude on a single configuration.
[[nodiscard]] inline StateVector product_state(const BlockadeBasis& basis, SpinConfig config)
{
	StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(basis.dimension()));
	psi(static_cast<Eigen::Index>(basis.index(config))) = 1.0;
	return psi;
}

[[nodiscard]] inline StateVector neel_state(const BlockadeBasis& basis)
{
	const SpinConfig neel = basis.neel_config();
	if(!neel.satisfies_blockade()) {
		throw std::logic_error("Néel configuration violates the blockade");
	}
	return product_state(basis, neel);
}

} // namespace pxpflow
