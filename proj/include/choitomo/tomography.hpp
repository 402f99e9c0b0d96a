// tomography.hpp — tomography configurations, the probability model
// p = Tr(R X), and seeded Monte-Carlo generation of measurement records.

#pragma once

#include "choitomo/qcore.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace choitomo {

// Positive operators summing to the identity.
struct Povm {
  std::vector<ComplexMatrix> elements;

  explicit Povm(std::vector<ComplexMatrix> ops);
  Eigen::Index dim() const { return elements.front().rows(); }
  std::size_t outcome_count() const { return elements.size(); }
};

// One input/POVM pair together with its shot budget n_γ.
struct TomographyConfiguration {
  DensityMatrix rho;
  Povm povm;
  std::uint64_t n_shots;

  TomographyConfiguration(DensityMatrix input, Povm measurement, std::uint64_t shots);
};

// Outcome counts c_{α,γ}; Σ_α c_{α,γ} = n_γ holds exactly by construction.
struct MeasurementRecord {
  std::vector<std::vector<std::uint64_t>> counts;  // counts[γ][α]

  std::uint64_t total(std::size_t gamma) const;
};

// R_{α,γ} = ρᵀ ⊗ M for a Hermitian POVM element M; Hermitian d²×d².
ComplexMatrix r_operator(const DensityMatrix& rho, const ComplexMatrix& m);

// Born probabilities p_α = Tr(R_α X) for one configuration, clamped to [0,1].
RealVector outcome_probs(const ChoiMatrix& x, const TomographyConfiguration& config);

// Multinomial counts for every configuration, drawn by sequential binomial
// decomposition from a single mt19937_64 stream. Deterministic given the seed
// (the generator's algorithm is pinned by the standard, and the binomial draw
// below avoids the implementation-defined <random> distributions).
MeasurementRecord simulate_record(const ChoiMatrix& x,
                                  const std::vector<TomographyConfiguration>& configs,
                                  std::uint64_t rng_seed);

// p̂_γ(α) = c_{α,γ} / n_γ. Throws on a zero-shot configuration.
std::vector<std::vector<double>> relative_frequencies(const MeasurementRecord& record);

// Frequencies set to the exact outcome probabilities (the n → ∞ limit).
std::vector<std::vector<double>> exact_frequencies(
    const ChoiMatrix& x, const std::vector<TomographyConfiguration>& configs);

// Standard qubit setup: pure input with Bloch vector (1,1,1)/√3 and the
// three Pauli two-element POVMs; n_total split equally, remainder to the
// earliest configurations.
std::vector<TomographyConfiguration> standard_qubit_configs(std::uint64_t n_total);

// Standard qutrit setup: rank-1 projective POVMs from the four MUB and the
// input built from the first ket of each basis.
std::vector<TomographyConfiguration> standard_qutrit_configs(std::uint64_t n_total);

// Normalized qutrit probe ket together with its pre-normalization norm.
std::pair<ComplexVector, double> qutrit_probe_ket();

// Uniform double in [0,1) using the top 53 bits of the generator output.
double canonical_uniform(std::mt19937_64& gen);

// Exact Bernoulli-count binomial sampler, O(n) draws.
std::uint64_t binomial_draw(std::uint64_t n, double p, std::mt19937_64& gen);

}  // namespace choitomo
