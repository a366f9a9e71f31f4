#pragma once

// Fixed-step real-time evolution with a restarted Lanczos (Krylov)
// exponential.

#include "hamiltonian.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

namespace pxpflow {

/// Raised when a numerical routine cannot reach its tolerance.
class NumericalError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultTau = 0.01;
inline constexpr double kDefaultTMax = 40.0;
inline constexpr int kMaxKrylovDim = 30;
inline constexpr double kKrylovTolerance = 1e-12;

struct EvolutionConfig {
	double tau = kDefaultTau;
	double t_max = kDefaultTMax;
	int snapshot_every = 1;
	/// Largest Lanczos subspace per step.
	int krylov_dim = kMaxKrylovDim;

	[[nodiscard]] std::vector<std::string> problems() const
	{
		std::vector<std::string> out;
		if(!(tau > 0.0)) {
			out.push_back("tau must be > 0");
		}
		if(!(t_max >= 0.0)) {
			out.push_back("t_max must be >= 0");
		}
		else if(tau > 0.0) {
			const double ratio = t_max / tau;
			if(std::abs(ratio - std::round(ratio)) > 1e-6) {
				out.push_back("t_max must be an integer multiple of tau");
			}
		}
		if(snapshot_every < 1) {
			out.push_back("snapshot_every must be >= 1");
		}
		if(krylov_dim < 1) {
			out.push_back("krylov_dim must be >= 1");
		}
		return out;
	}

	void validate() const
	{
		const auto issues = problems();
		if(!issues.empty()) {
			std::string msg = "invalid evolution config:";
			for(const auto& issue : issues) {
				msg += " " + issue + ";";
			}
			throw std::invalid_argument(msg);
		}
	}

	[[nodiscard]] std::size_t total_steps() const
	{
		return static_cast<std::size_t>(std::llround(t_max / tau));
	}

	[[nodiscard]] std::size_t snapshot_count() const
	{
		return total_steps() / static_cast<std::size_t>(snapshot_every) + 1;
	}

	/// Spacing of the snapshot grid.
	[[nodiscard]] double spacing() const { return tau * snapshot_every; }

	[[nodiscard]] double snapshot_time(std::size_t k) const
	{
		return static_cast<double>(k * static_cast<std::size_t>(snapshot_every)) * tau;
	}

	friend bool operator==(const EvolutionConfig&, const EvolutionConfig&) = default;
};

struct KrylovStats {
	int dimension = 0;
	double error_estimate = 0.0;
};

/// Applies exp(-i H dt) with a Lanczos basis built afresh on every call.
/// The three-term recurrence is repeated once for local reorthogonality;
/// the subspace grows until the a-posteriori estimate beta_m |[exp(-i dt T_m) e_1]_m| drops below the
/// tolerance or an invariant subspace is found.
class KrylovPropagator {
public:
	explicit KrylovPropagator(const SparseHamiltonian& hamiltonian, int max_dim = kMaxKrylovDim,
	                          double tolerance = kKrylovTolerance)
	    : h_{&hamiltonian}, max_dim_{max_dim}, tol_{tolerance}
	{
		if(max_dim < 1) {
			throw std::invalid_argument("Krylov dimension must be positive");
		}
	}

	[[nodiscard]] StateVector step(const StateVector& psi, double dt)
	{
		const auto dim = static_cast<Eigen::Index>(h_->dimension());
		if(psi.size() != dim) {
			throw std::invalid_argument("state dimension does not match the Hamiltonian");
		}
		const double norm = psi.norm();
		stats_ = {};
		if(dt == 0.0 || norm == 0.0) {
			return psi;
		}

		const int cap = static_cast<int>(std::min<Eigen::Index>(max_dim_, dim));
		if(basis_.rows() != dim || basis_.cols() < cap + 1) {
			basis_.resize(dim, cap + 1);
		}
		std::vector<double> alpha;
		std::vector<double> beta;
		alpha.reserve(static_cast<std::size_t>(cap));
		beta.reserve(static_cast<std::size_t>(cap));
		basis_.col(0) = psi / norm;

		for(int j = 0; j < cap; ++j) {
			auto w = basis_.col(j + 1);
			h_->apply(basis_.col(j), w);
			alpha.push_back(basis_.col(j).dot(w).real());
			w -= alpha.back() * basis_.col(j);
			if(j > 0) {
				w -= beta.back() * basis_.col(j - 1);
			}
			// second Gram-Schmidt pass against the two vectors of the recurrence
			for(int k = std::max(0, j - 1); k <= j; ++k) {
				w -= basis_.col(k).dot(w) * basis_.col(k);
			}

			const double b = w.norm();
			const int m = j + 1;
			const Eigen::VectorXcd coeffs = tridiagonal_exp(alpha, beta, m, dt);
			const double estimate = b * std::abs(coeffs(m - 1)) * norm;
			const bool breakdown = b <= 1e-14 * std::max(1.0, std::abs(alpha.back()));
			if(estimate < tol_ || breakdown) {
				stats_ = {m, breakdown ? 0.0 : estimate};
				return basis_.leftCols(m) * (coeffs * norm);
			}
			beta.push_back(b);
			w /= b;
			stats_ = {m, estimate};
		}
		std::ostringstream msg;
		msg << "Krylov exponential did not converge: dimension " << cap << ", dt " << dt
		    << ", error estimate " << stats_.error_estimate << " > tolerance " << tol_;
		throw NumericalError(msg.str());
	}

	[[nodiscard]] const KrylovStats& last_stats() const noexcept { return stats_; }

private:
	// exp(-i dt T) e_1 for the m x m tridiagonal T(alpha, beta).
	static Eigen::VectorXcd tridiagonal_exp(const std::vector<double>& alpha,
	                                        const std::vector<double>& beta, int m, double dt)
	{
		Eigen::VectorXd diag(m);
		Eigen::VectorXd sub(std::max(m - 1, 0));
		for(int k = 0; k < m; ++k) {
			diag(k) = alpha[static_cast<std::size_t>(k)];
		}
		for(int k = 0; k + 1 < m; ++k) {
			sub(k) = beta[static_cast<std::size_t>(k)];
		}
		Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
		eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
		const Eigen::MatrixXd& q = eig.eigenvectors();
		Eigen::VectorXcd phase(m);
		for(int k = 0; k < m; ++k) {
			phase(k) = std::exp(Complex{0.0, -dt * eig.eigenvalues()(k)}) * q(0, k);
		}
		return q.cast<Complex>() * phase;
	}

	const SparseHamiltonian* h_;
	int max_dim_;
	double tol_;
	Eigen::MatrixXcd basis_; // Lanczos vectors as columns
	KrylovStats stats_;
};

/// exp(-i H tau) psi.
[[nodiscard]] inline StateVector step(const SparseHamiltonian& hamiltonian, const StateVector& psi,
                                      double tau)
{
	KrylovPropagator propagator(hamiltonian);
	return propagator.step(psi, tau);
}

/// Evolves `psi0` for cfg.total_steps() steps of cfg.tau and calls
/// `on_snapshot(k, t, psi)` at every snapshot, starting with k = 0 at t = 0.
template<class Observer>
void evolve(const SparseHamiltonian& hamiltonian, StateVector psi0, const EvolutionConfig& cfg,
            Observer&& on_snapshot)
{
	cfg.validate();
	KrylovPropagator propagator(hamiltonian, cfg.krylov_dim);
	const std::size_t steps = cfg.total_steps();
	const auto every = static_cast<std::size_t>(cfg.snapshot_every);
	StateVector psi = std::move(psi0);
	on_snapshot(std::size_t{0}, 0.0, std::as_const(psi));
	for(std::size_t n = 1; n <= steps; ++n) {
		psi = propagator.step(psi, cfg.tau);
		if(n % every == 0) {
			const std::size_t k = n / every;
			on_snapshot(k, cfg.snapshot_time(k), std::as_const(psi));
		}
	}
}

struct Trajectory {
	ModelSpec spec;
	EvolutionConfig cfg;
	std::shared_ptr<const BlockadeBasis> basis;
	std::vector<double> times;
	std::vector<StateVector> states;
};

/// Full-state trajectory from the Néel state. Keeps every snapshot, so it is
/// meant for small chains; the experiment driver streams instead.
[[nodiscard]] inline Trajectory run_quench(const ModelSpec& spec, const EvolutionConfig& cfg)
{
	spec.validate();
	cfg.validate();
	auto basis = std::make_shared<const BlockadeBasis>(spec.n_sites);
	const SparseHamiltonian h = build_hamiltonian(spec, basis);
	Trajectory traj{spec, cfg, basis, {}, {}};
	traj.times.reserve(cfg.snapshot_count());
	traj.states.reserve(cfg.snapshot_count());
	evolve(h, neel_state(*basis), cfg, [&](std::size_t, double t, const StateVector& psi) {
		traj.times.push_back(t);
		traj.states.push_back(psi);
	});
	return traj;
}

} // namespace pxpflow
