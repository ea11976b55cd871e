#include "nlqm/bitgen.hpp"

#include <cmath>
#include <stdexcept>

#include "nlqm/errors.hpp"
#include "nlqm/rng.hpp"

namespace nlqm::bitgen {

std::string_view to_string(BitSource source) {
  switch (source) {
    case BitSource::classical: return "classical";
    case BitSource::qubit_a: return "qubit_a";
    case BitSource::qubit_b: return "qubit_b";
  }
  throw std::logic_error("unknown BitSource");
}

BitSource bit_source_from(std::string_view name) {
  if (name == "classical") return BitSource::classical;
  if (name == "qubit_a") return BitSource::qubit_a;
  if (name == "qubit_b") return BitSource::qubit_b;
  throw std::invalid_argument("unknown bit source: " + std::string(name));
}

void FidelityModel::validate() const {
  auto in_unit = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!in_unit(f_hadamard) || !in_unit(f_readout) || !in_unit(f_reset)) {
    throw std::invalid_argument("FidelityModel: fidelities must lie in (0, 1]");
  }
}

std::int64_t& SourceCounts::for_source(BitSource s) {
  switch (s) {
    case BitSource::classical: return classical;
    case BitSource::qubit_a: return qubit_a;
    case BitSource::qubit_b: return qubit_b;
  }
  throw std::logic_error("unknown BitSource");
}

std::int64_t SourceCounts::for_source(BitSource s) const {
  return const_cast<SourceCounts*>(this)->for_source(s);
}

std::vector<BitRecord> generate_classical_bits(std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw EmptySampleError("generate_classical_bits: n must be >= 1");
  Rng rng(seed);
  std::vector<BitRecord> bits;
  bits.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    bits.push_back({i, BitSource::classical, rng.bit()});
  }
  return bits;
}

std::vector<BitRecord> simulate_qubit_bits(std::int64_t n, const FidelityModel& model,
                                           std::uint64_t seed, BitSource source) {
  if (n < 1) throw EmptySampleError("simulate_qubit_bits: n must be >= 1");
  model.validate();
  if (model.f_hadamard < 0.75) {
    // |alpha|^2 = 1/2 +/- sqrt(1-F_H) leaves [0,1] below 0.75.
    throw std::domain_error("simulate_qubit_bits: f_hadamard must be >= 0.75");
  }

  // Substreams: 0 = per-run sign coin, 1 = reset, 2 = measurement, 3 = readout.
  // Independent streams keep the true-bit sequence identical across runs that
  // differ only in readout fidelity.
  Rng sign_rng(Rng::derive(seed, 0));
  const double sign = sign_rng.bit() == 1 ? 1.0 : -1.0;
  const double p_true_one = 0.5 + sign * std::sqrt(1.0 - model.f_hadamard);

  Rng reset_rng(Rng::derive(seed, 1));
  Rng meas_rng(Rng::derive(seed, 2));
  Rng readout_rng(Rng::derive(seed, 3));

  std::vector<BitRecord> bits;
  bits.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const bool reset_failed = reset_rng.uniform() < (1.0 - model.f_reset);
    (void)reset_failed;  // excited start still reaches an equal superposition
    const int true_bit = meas_rng.uniform() < p_true_one ? 1 : 0;
    const bool flip = readout_rng.uniform() < (1.0 - model.f_readout);
    bits.push_back({i, source, flip ? 1 - true_bit : true_bit});
  }
  return bits;
}

MixedSample mix_samples(const std::vector<std::vector<BitRecord>>& samples,
                        std::uint64_t seed) {
  std::size_t total = 0;
  for (const auto& s : samples) total += s.size();
  if (total == 0) throw EmptySampleError("mix_samples: all input samples are empty");

  // Shuffling the multiset of sample labels yields a uniform interleaving
  // while each source queue is consumed in order.
  std::vector<std::size_t> deck;
  deck.reserve(total);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    deck.insert(deck.end(), samples[s].size(), s);
  }
  Rng rng(seed);
  for (std::size_t i = deck.size() - 1; i > 0; --i) {
    std::swap(deck[i], deck[rng.below(i + 1)]);
  }

  MixedSample mixed;
  mixed.provenance_seed = seed;
  mixed.bits.reserve(total);
  std::vector<std::size_t> cursor(samples.size(), 0);
  for (std::size_t label : deck) {
    BitRecord rec = samples[label][cursor[label]++];
    rec.id = static_cast<std::int64_t>(mixed.bits.size());
    mixed.counts.for_source(rec.source) += 1;
    mixed.bits.push_back(rec);
  }
  return mixed;
}

MixedSample generate_mixed_sample(std::int64_t n_classical, std::int64_t n_qubit_a,
                                  std::int64_t n_qubit_b, const FidelityModel& model,
                                  std::uint64_t master_seed) {
  std::vector<std::vector<BitRecord>> samples;
  if (n_classical > 0) {
    samples.push_back(generate_classical_bits(n_classical, Rng::derive(master_seed, 1)));
  }
  if (n_qubit_a > 0) {
    samples.push_back(
        simulate_qubit_bits(n_qubit_a, model, Rng::derive(master_seed, 2), BitSource::qubit_a));
  }
  if (n_qubit_b > 0) {
    samples.push_back(
        simulate_qubit_bits(n_qubit_b, model, Rng::derive(master_seed, 3), BitSource::qubit_b));
  }
  return mix_samples(samples, Rng::derive(master_seed, 4));
}

}  // namespace nlqm::bitgen
