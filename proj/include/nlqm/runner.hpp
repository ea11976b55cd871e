#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlqm/bitgen.hpp"
#include "nlqm/calibration.hpp"
#include "nlqm/limits.hpp"
#include "nlqm/rfchain.hpp"

namespace nlqm::runner {

// Per-step durations of the two branch action sequences. The totals must
// agree (within tolerance) or the branches lose synchronization.
struct TimingProfile {
  double bit0_configure_s = 2.0;
  double bit0_terminate_s = 1.0;
  double bit0_acquire_s = 1000.0;  // 1/RBW acquisition

  double bit1_configure_s = 2.0;
  double bit1_source_on_s = 0.5;
  double bit1_dwell_s = 1000.0;
  double bit1_source_off_s = 0.5;

  double tolerance_s = 0.0;

  double total_bit0() const { return bit0_configure_s + bit0_terminate_s + bit0_acquire_s; }
  double total_bit1() const {
    return bit1_configure_s + bit1_source_on_s + bit1_dwell_s + bit1_source_off_s;
  }
};

struct SyncReport {
  double delta_s = 0.0;
  bool pass = false;
};

SyncReport check_branch_synchronization(const TimingProfile& timing);

struct BlindingPolicy {
  bool enabled = false;
  // Permitted quantum-derived outputs are excess_detected and epsilon_limit;
  // everything else is rejected at the serialization choke point.
};

struct LedgerEntry {
  std::int64_t id = 0;
  bitgen::BitSource source = bitgen::BitSource::classical;
  std::optional<int> value;                          // withheld for blinded quantum bits
  std::optional<rfchain::SwitchState> switch_state;  // likewise
  std::optional<std::string> action;                 // "acquire" / "dwell", likewise
  double t_start_s = 0.0;
  double t_end_s = 0.0;
  std::string spectrum_path;  // relative to the run dir; empty if not persisted
};

struct RunLedger {
  std::vector<LedgerEntry> entries;
  std::uint64_t master_seed = 0;
  rfchain::ChainConfig config;
  TimingProfile timing;
  bitgen::FidelityModel fidelity;
  double epsilon_true = 0.0;
  bool blinded = false;
  std::filesystem::path run_dir;
  // Volatile-memory bit values of blinded quantum entries; never serialized.
  std::map<std::int64_t, int> blinded_values;
};

// Per-bit RNG substream so spectra are schedule independent.
std::uint64_t spectrum_seed(std::uint64_t master_seed, std::int64_t bit_id);

// Runs the per-bit loop: configure switches, acquire (bit=0) or dwell
// (bit=1), persist one spectrum per bit, and record timestamps that honor
// the timing profile. Refuses to run on an unbalanced profile. Under
// blinding, quantum spectra stay in memory (they are regenerated from seeds
// at analysis time) and quantum entries carry no value, switch state or
// action.
RunLedger run_experiment(const rfchain::ChainConfig& cfg, const bitgen::MixedSample& sample,
                         const TimingProfile& timing, double epsilon_true,
                         std::uint64_t seed, const std::filesystem::path& out_dir,
                         const BlindingPolicy& policy = {},
                         const bitgen::FidelityModel& fidelity = {});

// Reloads a persisted run; for blinded runs the quantum bit values are
// regenerated into volatile memory from the bits sidecar.
RunLedger load_run(const std::filesystem::path& run_dir);

struct ClassicalRow {
  std::int64_t id = 0;
  double p_s_w = 0.0;
  double sideband_mean_w = 0.0;
  double sideband_sigma_w = 0.0;
};

struct AnalysisOptions {
  double cl = 0.90;
  double gate_k = 5.0;
  double sideband_exclude_halfwidth_hz = 0.010;  // 10 bins at the 1 mHz RBW
  limits::SigmaConvention limit_sigma = limits::SigmaConvention::standard_error;
};

struct AnalysisResult {
  limits::LimitReport classical;
  std::optional<limits::LimitReport> quantum;
  bool excess_detected = false;
  std::vector<ClassicalRow> classical_rows;
  // Quantum diagnostics exist only in memory; the writer refuses them under
  // blinding.
  std::vector<ClassicalRow> quantum_rows;
};

// Calibrates every bit=0 spectrum, extracts P_s and sideband statistics,
// derives the fictitious classical limit, runs the 5-sigma quantum gate
// against the classical control and, absent an excess, the quantum limit.
AnalysisResult analyze(const RunLedger& ledger, const calibration::CalibrationSolution& sol,
                       const BlindingPolicy& policy, const AnalysisOptions& options = {});

// Single serialization choke point for analysis products; the blinding
// policy is enforced here and nowhere else.
class ResultWriter {
 public:
  ResultWriter(std::filesystem::path run_dir, BlindingPolicy policy);

  void write_classical_rows(const std::vector<ClassicalRow>& rows) const;
  // Throws BlindingViolationError when blinding is enabled.
  void write_quantum_rows(const std::vector<ClassicalRow>& rows) const;
  void write_report(const AnalysisResult& result) const;

 private:
  std::filesystem::path run_dir_;
  BlindingPolicy policy_;
};

}  // namespace nlqm::runner
