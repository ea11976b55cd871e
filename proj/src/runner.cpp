#include "nlqm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "nlqm/errors.hpp"
#include "nlqm/io.hpp"
#include "nlqm/rng.hpp"
#include "nlqm/specfit.hpp"

namespace nlqm::runner {

namespace {

using nlohmann::json;

json chain_config_to_json(const rfchain::ChainConfig& cfg) {
  return {
      {"t_dewar_k", cfg.t_dewar_k},
      {"t_hemt_noise_k", cfg.t_hemt_noise_k},
      {"g_hemt_db", cfg.g_hemt_db},
      {"g_hp_amp_db", cfg.g_hp_amp_db},
      {"g_hp_amp_sigma_db", cfg.g_hp_amp_sigma_db},
      {"il_pre_hemt_db", cfg.il_pre_hemt_db},
      {"il_hp_path_db", cfg.il_hp_path_db},
      {"il_post_hemt_db", cfg.il_post_hemt_db},
      {"rbw_data_hz", cfg.rbw_data_hz},
      {"rbw_cal_hz", cfg.rbw_cal_hz},
      {"f0_hz", cfg.f0_hz},
      {"span_hz", cfg.span_hz},
      {"p_generator_dbm", cfg.p_generator_dbm},
      {"p_applied_w", cfg.p_applied_w},
      {"inband_fraction", cfg.inband_fraction},
  };
}

rfchain::ChainConfig chain_config_from_json(const json& j) {
  rfchain::ChainConfig cfg;
  cfg.t_dewar_k = j.at("t_dewar_k").get<double>();
  cfg.t_hemt_noise_k = j.at("t_hemt_noise_k").get<double>();
  cfg.g_hemt_db = j.at("g_hemt_db").get<double>();
  cfg.g_hp_amp_db = j.at("g_hp_amp_db").get<double>();
  cfg.g_hp_amp_sigma_db = j.at("g_hp_amp_sigma_db").get<double>();
  cfg.il_pre_hemt_db = j.at("il_pre_hemt_db").get<double>();
  cfg.il_hp_path_db = j.at("il_hp_path_db").get<double>();
  cfg.il_post_hemt_db = j.at("il_post_hemt_db").get<double>();
  cfg.rbw_data_hz = j.at("rbw_data_hz").get<double>();
  cfg.rbw_cal_hz = j.at("rbw_cal_hz").get<double>();
  cfg.f0_hz = j.at("f0_hz").get<double>();
  cfg.span_hz = j.at("span_hz").get<double>();
  cfg.p_generator_dbm = j.at("p_generator_dbm").get<double>();
  cfg.p_applied_w = j.at("p_applied_w").get<double>();
  cfg.inband_fraction = j.at("inband_fraction").get<double>();
  return cfg;
}

json timing_to_json(const TimingProfile& t) {
  return {
      {"bit0_configure_s", t.bit0_configure_s}, {"bit0_terminate_s", t.bit0_terminate_s},
      {"bit0_acquire_s", t.bit0_acquire_s},     {"bit1_configure_s", t.bit1_configure_s},
      {"bit1_source_on_s", t.bit1_source_on_s}, {"bit1_dwell_s", t.bit1_dwell_s},
      {"bit1_source_off_s", t.bit1_source_off_s}, {"tolerance_s", t.tolerance_s},
  };
}

TimingProfile timing_from_json(const json& j) {
  TimingProfile t;
  t.bit0_configure_s = j.at("bit0_configure_s").get<double>();
  t.bit0_terminate_s = j.at("bit0_terminate_s").get<double>();
  t.bit0_acquire_s = j.at("bit0_acquire_s").get<double>();
  t.bit1_configure_s = j.at("bit1_configure_s").get<double>();
  t.bit1_source_on_s = j.at("bit1_source_on_s").get<double>();
  t.bit1_dwell_s = j.at("bit1_dwell_s").get<double>();
  t.bit1_source_off_s = j.at("bit1_source_off_s").get<double>();
  t.tolerance_s = j.at("tolerance_s").get<double>();
  return t;
}

std::string spectrum_rel_path(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spectra/%04lld.csv", static_cast<long long>(id));
  return buf;
}

json report_to_json(const limits::LimitReport& report, bool withhold_quantum_powers) {
  json j = {
      {"dataset_tag", std::string(limits::to_string(report.dataset_tag))},
      {"cl", report.cl},
      {"excess_detected", report.excess_detected},
      {"p_applied_w", report.p_applied_w},
      {"sigma_convention", std::string(limits::to_string(report.sigma_convention))},
      {"corrections",
       {{"f_bandwidth", report.corrections.f_bandwidth},
        {"f_readout", report.corrections.f_readout},
        {"f_hadamard", report.corrections.f_hadamard}}},
  };
  if (report.epsilon_limit) j["epsilon_limit"] = *report.epsilon_limit;
  const bool hide_power = withhold_quantum_powers &&
                          report.dataset_tag == limits::DatasetTag::quantum;
  if (report.p_m_w && !hide_power) j["p_m_w"] = *report.p_m_w;
  return j;
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
  const double mean = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

SyncReport check_branch_synchronization(const TimingProfile& timing) {
  const double delta = std::abs(timing.total_bit0() - timing.total_bit1());
  return {delta, delta <= timing.tolerance_s};
}

std::uint64_t spectrum_seed(std::uint64_t master_seed, std::int64_t bit_id) {
  return Rng::derive(Rng::derive(master_seed, 0x73706563u),
                     static_cast<std::uint64_t>(bit_id));
}

RunLedger run_experiment(const rfchain::ChainConfig& cfg, const bitgen::MixedSample& sample,
                         const TimingProfile& timing, double epsilon_true,
                         std::uint64_t seed, const std::filesystem::path& out_dir,
                         const BlindingPolicy& policy,
                         const bitgen::FidelityModel& fidelity) {
  cfg.validate();
  const SyncReport sync = check_branch_synchronization(timing);
  if (!sync.pass) {
    throw SynchronizationError("run_experiment: branch durations differ by " +
                               std::to_string(sync.delta_s) + " s");
  }

  std::filesystem::create_directories(out_dir / "spectra");

  RunLedger ledger;
  ledger.master_seed = seed;
  ledger.config = cfg;
  ledger.timing = timing;
  ledger.fidelity = fidelity;
  ledger.epsilon_true = epsilon_true;
  ledger.blinded = policy.enabled;
  ledger.run_dir = out_dir;

  double clock_s = 0.0;
  for (const bitgen::BitRecord& bit : sample.bits) {
    // Leakage from the counter branch exists only where a measurement
    // created a macroscopic superposition: quantum-source bits. Classical
    // bits have a definite value and serve as the no-leakage control.
    const double epsilon_bit =
        bit.source == bitgen::BitSource::classical ? 0.0 : epsilon_true;
    const rfchain::RawSpectrum spec = rfchain::synthesize_spectrum(
        cfg, bit.value, epsilon_bit, spectrum_seed(seed, bit.id));

    LedgerEntry entry;
    entry.id = bit.id;
    entry.source = bit.source;
    entry.t_start_s = clock_s;
    // Balanced totals keep the timestamp stream independent of bit values.
    clock_s += bit.value == 0 ? timing.total_bit0() : timing.total_bit1();
    entry.t_end_s = clock_s;

    const bool hide = policy.enabled && bit.source != bitgen::BitSource::classical;
    if (hide) {
      ledger.blinded_values[bit.id] = bit.value;
    } else {
      entry.value = bit.value;
      entry.switch_state = spec.switch_state;
      entry.action = bit.value == 0 ? "acquire" : "dwell";
      entry.spectrum_path = spectrum_rel_path(bit.id);
      io::write_spectrum(out_dir / entry.spectrum_path, spec);
    }
    ledger.entries.push_back(entry);
  }

  // run.json: config snapshot + master seed; ledger.jsonl: one object per bit.
  json run = {
      {"master_seed", ledger.master_seed},
      {"epsilon_true", ledger.epsilon_true},
      {"blinded", ledger.blinded},
      {"config", chain_config_to_json(cfg)},
      {"timing", timing_to_json(timing)},
      {"fidelity",
       {{"f_hadamard", fidelity.f_hadamard},
        {"f_readout", fidelity.f_readout},
        {"f_reset", fidelity.f_reset}}},
  };
  std::ofstream run_out(out_dir / "run.json");
  run_out << run.dump(2) << "\n";

  std::ofstream ledger_out(out_dir / "ledger.jsonl");
  for (const LedgerEntry& e : ledger.entries) {
    json j = {
        {"id", e.id},
        {"source", std::string(bitgen::to_string(e.source))},
        {"t_start_s", e.t_start_s},
        {"t_end_s", e.t_end_s},
    };
    if (e.value) j["value"] = *e.value;
    if (e.action) j["action"] = *e.action;
    if (e.switch_state) {
      j["switch_state"] = {
          {"sw1", e.switch_state->sw1 == rfchain::Sw1Port::port1_load ? "port1_load"
                                                                      : "port_signal"},
          {"sw2", e.switch_state->sw2 == rfchain::Sw2Port::port1_signal ? "port1_signal"
                                                                        : "port2_hp_load"},
          {"source_on", e.switch_state->source_on}};
    }
    if (!e.spectrum_path.empty()) j["spectrum"] = e.spectrum_path;
    ledger_out << j.dump() << "\n";
  }
  return ledger;
}

RunLedger load_run(const std::filesystem::path& run_dir) {
  std::ifstream run_in(run_dir / "run.json");
  if (!run_in) throw IncompleteRunError("load_run: missing run.json in " + run_dir.string());
  json run;
  run_in >> run;

  RunLedger ledger;
  ledger.master_seed = run.at("master_seed").get<std::uint64_t>();
  ledger.epsilon_true = run.at("epsilon_true").get<double>();
  ledger.blinded = run.at("blinded").get<bool>();
  ledger.config = chain_config_from_json(run.at("config"));
  ledger.timing = timing_from_json(run.at("timing"));
  const json& f = run.at("fidelity");
  ledger.fidelity.f_hadamard = f.at("f_hadamard").get<double>();
  ledger.fidelity.f_readout = f.at("f_readout").get<double>();
  ledger.fidelity.f_reset = f.at("f_reset").get<double>();
  ledger.run_dir = run_dir;

  std::ifstream ledger_in(run_dir / "ledger.jsonl");
  if (!ledger_in) {
    throw IncompleteRunError("load_run: missing ledger.jsonl in " + run_dir.string());
  }
  std::string line;
  while (std::getline(ledger_in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    LedgerEntry e;
    e.id = j.at("id").get<std::int64_t>();
    e.source = bitgen::bit_source_from(j.at("source").get<std::string>());
    e.t_start_s = j.at("t_start_s").get<double>();
    e.t_end_s = j.at("t_end_s").get<double>();
    if (j.contains("value")) e.value = j.at("value").get<int>();
    if (j.contains("action")) e.action = j.at("action").get<std::string>();
    if (j.contains("switch_state")) {
      rfchain::SwitchState st;
      const json& s = j.at("switch_state");
      st.sw1 = s.at("sw1").get<std::string>() == "port1_load" ? rfchain::Sw1Port::port1_load
                                                              : rfchain::Sw1Port::port_signal;
      st.sw2 = s.at("sw2").get<std::string>() == "port1_signal"
                   ? rfchain::Sw2Port::port1_signal
                   : rfchain::Sw2Port::port2_hp_load;
      st.source_on = s.at("source_on").get<bool>();
      e.switch_state = st;
    }
    if (j.contains("spectrum")) e.spectrum_path = j.at("spectrum").get<std::string>();
    ledger.entries.push_back(e);
  }

  const bool needs_values = std::any_of(ledger.entries.begin(), ledger.entries.end(),
                                        [](const LedgerEntry& e) { return !e.value; });
  if (needs_values) {
    // Blinded run: bring the quantum bit values back into volatile memory.
    const io::BitsBundle bits = io::read_bits(run_dir / "bits.csv");
    for (const auto& bit : bits.sample.bits) {
      ledger.blinded_values[bit.id] = bit.value;
    }
  }
  return ledger;
}

AnalysisResult analyze(const RunLedger& ledger, const calibration::CalibrationSolution& sol,
                       const BlindingPolicy& policy, const AnalysisOptions& options) {
  const rfchain::ChainConfig& cfg = ledger.config;

  std::vector<double> classical_excess;
  std::vector<double> quantum_excess;
  AnalysisResult result;

  for (const LedgerEntry& entry : ledger.entries) {
    int value = 0;
    if (entry.value) {
      value = *entry.value;
    } else {
      auto it = ledger.blinded_values.find(entry.id);
      if (it == ledger.blinded_values.end()) {
        throw IncompleteRunError("analyze: no value for ledger entry " +
                                 std::to_string(entry.id));
      }
      value = it->second;
    }
    if (value != 0) continue;  // only bit=0 acquisitions carry physics

    rfchain::RawSpectrum raw;
    if (!entry.spectrum_path.empty()) {
      const auto path = ledger.run_dir / entry.spectrum_path;
      if (!std::filesystem::exists(path)) {
        throw IncompleteRunError("analyze: missing spectrum " + path.string());
      }
      raw = io::read_spectrum(path);
    } else {
      // Blinded quantum spectrum: regenerate in memory from the run seeds.
      raw = rfchain::synthesize_spectrum(cfg, value, ledger.epsilon_true,
                                         spectrum_seed(ledger.master_seed, entry.id));
    }
    const auto calibrated = calibration::calibrate_spectrum(raw, sol);
    const double p_s = specfit::signal_region_power(calibrated, cfg.f0_hz);
    const auto sb =
        specfit::sideband_stats(calibrated, cfg.f0_hz, options.sideband_exclude_halfwidth_hz);

    const ClassicalRow row{entry.id, p_s, sb.mean_w, sb.sigma_w};
    if (entry.source == bitgen::BitSource::classical) {
      result.classical_rows.push_back(row);
      classical_excess.push_back(p_s - sb.mean_w);
    } else {
      result.quantum_rows.push_back(row);
      quantum_excess.push_back(p_s - sb.mean_w);
    }
  }

  if (classical_excess.size() < 2) {
    throw InsufficientDataError("analyze: need at least 2 classical bit=0 spectra");
  }

  const limits::CorrectionFactors corrections{
      1.0 / std::sqrt(cfg.inband_fraction),
      limits::readout_correction(ledger.fidelity.f_readout),
      limits::hadamard_correction(ledger.fidelity.f_hadamard)};

  // Fictitious classical limit: the control data analyzed as if it were
  // quantum, to exercise the full chain.
  const double c_pm = limits::power_upper_limit(classical_excess, options.cl,
                                                options.limit_sigma);
  result.classical.dataset_tag = limits::DatasetTag::classical;
  result.classical.p_m_w = c_pm;
  result.classical.cl = options.cl;
  result.classical.corrections = corrections;
  result.classical.p_applied_w = cfg.p_applied_w;
  result.classical.excess_detected = false;
  result.classical.sigma_convention = options.limit_sigma;
  result.classical.epsilon_limit =
      limits::epsilon_limit(c_pm, cfg.p_applied_w, cfg.inband_fraction,
                            corrections.f_readout, corrections.f_hadamard);

  if (!quantum_excess.empty()) {
    if (quantum_excess.size() < 2) {
      throw InsufficientDataError("analyze: need at least 2 quantum bit=0 spectra");
    }
    const double q_mean = mean_of(quantum_excess);
    const double c_mean = mean_of(classical_excess);
    const double c_spread = sample_stddev(classical_excess);
    result.excess_detected =
        limits::compare_quantum_classical(q_mean, c_mean, c_spread, options.gate_k);

    limits::LimitReport quantum;
    quantum.dataset_tag = limits::DatasetTag::quantum;
    quantum.cl = options.cl;
    quantum.corrections = corrections;
    quantum.p_applied_w = cfg.p_applied_w;
    quantum.excess_detected = result.excess_detected;
    quantum.sigma_convention = options.limit_sigma;
    if (!result.excess_detected) {
      const double q_pm = limits::power_upper_limit(quantum_excess, options.cl,
                                                    options.limit_sigma);
      quantum.p_m_w = q_pm;
      quantum.epsilon_limit =
          limits::epsilon_limit(q_pm, cfg.p_applied_w, cfg.inband_fraction,
                                corrections.f_readout, corrections.f_hadamard);
    }
    result.quantum = quantum;
  }
  (void)policy;  // enforcement lives in ResultWriter
  return result;
}

ResultWriter::ResultWriter(std::filesystem::path run_dir, BlindingPolicy policy)
    : run_dir_(std::move(run_dir)), policy_(policy) {}

void ResultWriter::write_classical_rows(const std::vector<ClassicalRow>& rows) const {
  std::ofstream out(run_dir_ / "analysis.csv");
  if (!out) throw std::runtime_error("cannot write analysis.csv");
  out << "id,p_s_w,sideband_mean_w,sideband_sigma_w\n";
  char buf[128];
  for (const ClassicalRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(row.id), row.p_s_w, row.sideband_mean_w,
                  row.sideband_sigma_w);
    out << buf;
  }
}

void ResultWriter::write_quantum_rows(const std::vector<ClassicalRow>& rows) const {
  if (policy_.enabled) {
    throw BlindingViolationError(
        "blinding policy forbids writing per-bit quantum powers");
  }
  std::ofstream out(run_dir_ / "analysis_quantum.csv");
  if (!out) throw std::runtime_error("cannot write analysis_quantum.csv");
  out << "id,p_s_w,sideband_mean_w,sideband_sigma_w\n";
  char buf[128];
  for (const ClassicalRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(row.id), row.p_s_w, row.sideband_mean_w,
                  row.sideband_sigma_w);
    out << buf;
  }
}

void ResultWriter::write_report(const AnalysisResult& result) const {
  json report;
  report["classical"] = report_to_json(result.classical, policy_.enabled);
  if (result.quantum) report["quantum"] = report_to_json(*result.quantum, policy_.enabled);
  std::ofstream out(run_dir_ / "report.json");
  if (!out) throw std::runtime_error("cannot write report.json");
  out << report.dump(2) << "\n";
}

}  // namespace nlqm::runner
