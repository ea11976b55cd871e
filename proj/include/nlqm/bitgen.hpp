#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nlqm::bitgen {

enum class BitSource { classical, qubit_a, qubit_b };

std::string_view to_string(BitSource source);
BitSource bit_source_from(std::string_view name);

// Scalar fidelities of the simulated qubit bit generation: Hadamard gate,
// classical readout, and active reset.
struct FidelityModel {
  double f_hadamard = 0.99;
  double f_readout = 0.983;
  double f_reset = 0.99;

  // All three must lie in (0, 1].
  void validate() const;
};

struct BitRecord {
  std::int64_t id = 0;
  BitSource source = BitSource::classical;
  int value = 0;  // observed value, 0 or 1
};

struct SourceCounts {
  std::int64_t classical = 0;
  std::int64_t qubit_a = 0;
  std::int64_t qubit_b = 0;

  std::int64_t total() const { return classical + qubit_a + qubit_b; }
  std::int64_t& for_source(BitSource s);
  std::int64_t for_source(BitSource s) const;
};

// A blinded-but-traceable interleaving of classical and qubit samples.
// Mixing permutes records and re-indexes ids; it never alters
// (source, value) pairs.
struct MixedSample {
  std::vector<BitRecord> bits;
  std::uint64_t provenance_seed = 0;
  SourceCounts counts;
};

// n pseudo-random fair bits, source = classical. Deterministic in seed.
std::vector<BitRecord> generate_classical_bits(std::int64_t n, std::uint64_t seed);

// n simulated qubit measurements. Per shot: active reset fails with
// probability 1-f_reset (no effect on the outcome distribution, the gate
// returns an excited qubit to an equal superposition); the imperfect
// Hadamard splits amplitude so that P(true 1) = 1/2 +/- sqrt(1-f_hadamard),
// sign drawn once per call from the seed; readout flips the true value with
// probability 1-f_readout. Records carry the observed value only.
std::vector<BitRecord> simulate_qubit_bits(std::int64_t n, const FidelityModel& model,
                                           std::uint64_t seed,
                                           BitSource source = BitSource::qubit_a);

// Uniformly random interleaving that preserves intra-source order.
MixedSample mix_samples(const std::vector<std::vector<BitRecord>>& samples,
                        std::uint64_t seed);

// The full generation recipe used by the CLI and by blinded-run
// regeneration: sub-seeds are derived from master_seed, empty sources are
// skipped.
MixedSample generate_mixed_sample(std::int64_t n_classical, std::int64_t n_qubit_a,
                                  std::int64_t n_qubit_b, const FidelityModel& model,
                                  std::uint64_t master_seed);

}  // namespace nlqm::bitgen
