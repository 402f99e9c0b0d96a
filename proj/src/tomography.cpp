#include "choitomo/tomography.hpp"

#include "choitomo/channels.hpp"

#include <cmath>

namespace choitomo {

namespace {

std::vector<std::uint64_t> split_shots(std::uint64_t n_total, std::size_t k) {
  std::vector<std::uint64_t> shots(k, n_total / k);
  for (std::size_t i = 0; i < n_total % k; ++i) ++shots[i];
  return shots;
}

}  // namespace

Povm::Povm(std::vector<ComplexMatrix> ops) : elements(std::move(ops)) {
  if (elements.empty()) throw std::invalid_argument("Povm: no elements");
  const Eigen::Index d = elements.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (const ComplexMatrix& m : elements) {
    if (m.rows() != d || m.cols() != d)
      throw std::invalid_argument("Povm: elements must share a square shape");
    if (!is_hermitian(m))
      throw std::invalid_argument("Povm: element is not Hermitian");
    if (min_eigenvalue_hermitian(m) < -1e-10)
      throw std::invalid_argument("Povm: element is not positive semidefinite");
    sum += m;
  }
  if ((sum - identity(d)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("Povm: elements do not sum to the identity");
}

TomographyConfiguration::TomographyConfiguration(DensityMatrix input, Povm measurement,
                                                 std::uint64_t shots)
    : rho(std::move(input)), povm(std::move(measurement)), n_shots(shots) {
  if (rho.dim() != povm.dim())
    throw std::invalid_argument("TomographyConfiguration: dimension mismatch");
}

std::uint64_t MeasurementRecord::total(std::size_t gamma) const {
  std::uint64_t n = 0;
  for (std::uint64_t c : counts.at(gamma)) n += c;
  return n;
}

ComplexMatrix r_operator(const DensityMatrix& rho, const ComplexMatrix& m) {
  if (m.rows() != rho.dim() || m.cols() != rho.dim())
    throw std::invalid_argument("r_operator: dimension mismatch");
  if (!is_hermitian(m))
    throw std::invalid_argument("r_operator: measurement operator is not Hermitian");
  return kron(rho.matrix().transpose(), m);
}

RealVector outcome_probs(const ChoiMatrix& x, const TomographyConfiguration& config) {
  if (x.system_dim() != config.rho.dim())
    throw std::invalid_argument("outcome_probs: dimension mismatch");
  if (!x.is_completely_positive(1e-6) || !x.is_trace_preserving(1e-6))
    throw std::invalid_argument("outcome_probs: Choi matrix is not CPTP");

  RealVector p(static_cast<Eigen::Index>(config.povm.outcome_count()));
  double sum = 0.0;
  for (std::size_t alpha = 0; alpha < config.povm.outcome_count(); ++alpha) {
    Complex tr = (r_operator(config.rho, config.povm.elements[alpha]) * x.matrix()).trace();
    if (std::abs(tr.imag()) > 1e-9)
      throw std::runtime_error("outcome_probs: probability has an imaginary part");
    double value = tr.real();
    if (value < -1e-9 || value > 1.0 + 1e-9)
      throw std::runtime_error("outcome_probs: probability outside [0,1]");
    value = std::min(1.0, std::max(0.0, value));
    p(static_cast<Eigen::Index>(alpha)) = value;
    sum += value;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::runtime_error("outcome_probs: probabilities do not sum to 1");
  return p;
}

double canonical_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::uint64_t binomial_draw(std::uint64_t n, double p, std::mt19937_64& gen) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < n; ++i)
    if (canonical_uniform(gen) < p) ++count;
  return count;
}

MeasurementRecord simulate_record(const ChoiMatrix& x,
                                  const std::vector<TomographyConfiguration>& configs,
                                  std::uint64_t rng_seed) {
  std::mt19937_64 gen(rng_seed);
  MeasurementRecord record;
  record.counts.reserve(configs.size());

  for (const TomographyConfiguration& config : configs) {
    RealVector p = outcome_probs(x, config);
    p /= p.sum();  // clamping may have nudged the total by < 1e-8 relative

    const Eigen::Index k = p.size();
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(k), 0);
    std::uint64_t remaining = config.n_shots;
    double tail = 1.0;
    for (Eigen::Index alpha = 0; alpha + 1 < k; ++alpha) {
      double conditional = tail > 0.0 ? std::min(1.0, std::max(0.0, p(alpha) / tail)) : 1.0;
      std::uint64_t c = binomial_draw(remaining, conditional, gen);
      counts[static_cast<std::size_t>(alpha)] = c;
      remaining -= c;
      tail -= p(alpha);
    }
    counts[static_cast<std::size_t>(k - 1)] = remaining;
    record.counts.push_back(std::move(counts));
  }
  return record;
}

std::vector<std::vector<double>> relative_frequencies(const MeasurementRecord& record) {
  std::vector<std::vector<double>> freqs;
  freqs.reserve(record.counts.size());
  for (std::size_t gamma = 0; gamma < record.counts.size(); ++gamma) {
    const std::uint64_t n = record.total(gamma);
    if (n == 0)
      throw std::invalid_argument("relative_frequencies: zero-shot configuration");
    std::vector<double> f;
    f.reserve(record.counts[gamma].size());
    for (std::uint64_t c : record.counts[gamma])
      f.push_back(static_cast<double>(c) / static_cast<double>(n));
    freqs.push_back(std::move(f));
  }
  return freqs;
}

std::vector<std::vector<double>> exact_frequencies(
    const ChoiMatrix& x, const std::vector<TomographyConfiguration>& configs) {
  std::vector<std::vector<double>> freqs;
  freqs.reserve(configs.size());
  for (const TomographyConfiguration& config : configs) {
    RealVector p = outcome_probs(x, config);
    freqs.emplace_back(p.data(), p.data() + p.size());
  }
  return freqs;
}

std::vector<TomographyConfiguration> standard_qubit_configs(std::uint64_t n_total) {
  const double s = 1.0 / std::sqrt(3.0);
  DensityMatrix input = DensityMatrix::from_bloch(s, s, s);
  const ComplexMatrix paulis[] = {pauli_x(), pauli_y(), pauli_z()};
  std::vector<std::uint64_t> shots = split_shots(n_total, 3);

  std::vector<TomographyConfiguration> configs;
  configs.reserve(3);
  for (int i = 0; i < 3; ++i) {
    Povm povm({0.5 * (identity(2) + paulis[i]), 0.5 * (identity(2) - paulis[i])});
    configs.emplace_back(input, std::move(povm), shots[static_cast<std::size_t>(i)]);
  }
  return configs;
}

std::pair<ComplexVector, double> qutrit_probe_ket() {
  std::vector<Basis> bases = mub_bases(3);
  ComplexVector sum = ComplexVector::Zero(3);
  for (const Basis& basis : bases) sum += basis.front();
  const double raw_norm = sum.norm();
  if (raw_norm < 1e-9)
    throw std::runtime_error("qutrit_probe_ket: degenerate normalization");
  return {sum / raw_norm, raw_norm};
}

std::vector<TomographyConfiguration> standard_qutrit_configs(std::uint64_t n_total) {
  std::vector<Basis> bases = mub_bases(3);
  DensityMatrix input = DensityMatrix::pure(qutrit_probe_ket().first);
  std::vector<std::uint64_t> shots = split_shots(n_total, bases.size());

  std::vector<TomographyConfiguration> configs;
  configs.reserve(bases.size());
  for (std::size_t i = 0; i < bases.size(); ++i) {
    std::vector<ComplexMatrix> projectors;
    projectors.reserve(bases[i].size());
    for (const ComplexVector& ket : bases[i]) projectors.push_back(ket * ket.adjoint());
    configs.emplace_back(input, Povm(std::move(projectors)), shots[i]);
  }
  return configs;
}

}  // namespace choitomo
