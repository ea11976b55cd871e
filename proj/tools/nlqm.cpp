// nlqm: simulate and analyze the nonlinear-quantum-mechanics RF experiment.
//
// Subcommands: generate-bits, simulate-run, calibrate, analyze, limit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlqm/bitgen.hpp"
#include "nlqm/calibration.hpp"
#include "nlqm/errors.hpp"
#include "nlqm/io.hpp"
#include "nlqm/limits.hpp"
#include "nlqm/rfchain.hpp"
#include "nlqm/runner.hpp"
#include "nlqm/units.hpp"

namespace fs = std::filesystem;
using namespace nlqm;

namespace {

runner::TimingProfile timing_from_keyvalues(const io::KeyValues& kv) {
  runner::TimingProfile t;
  t.bit0_configure_s = io::get_double_or(kv, "timing_bit0_configure_s", t.bit0_configure_s);
  t.bit0_terminate_s = io::get_double_or(kv, "timing_bit0_terminate_s", t.bit0_terminate_s);
  t.bit0_acquire_s = io::get_double_or(kv, "timing_bit0_acquire_s", t.bit0_acquire_s);
  t.bit1_configure_s = io::get_double_or(kv, "timing_bit1_configure_s", t.bit1_configure_s);
  t.bit1_source_on_s = io::get_double_or(kv, "timing_bit1_source_on_s", t.bit1_source_on_s);
  t.bit1_dwell_s = io::get_double_or(kv, "timing_bit1_dwell_s", t.bit1_dwell_s);
  t.bit1_source_off_s = io::get_double_or(kv, "timing_bit1_source_off_s", t.bit1_source_off_s);
  t.tolerance_s = io::get_double_or(kv, "timing_tolerance_s", t.tolerance_s);
  return t;
}

void print_report_line(const limits::LimitReport& report) {
  std::printf("%s: excess_detected=%s", limits::to_string(report.dataset_tag).data(),
              report.excess_detected ? "true" : "false");
  if (report.epsilon_limit) {
    std::printf(", |epsilon| < %.3e at %.1f%% CL", *report.epsilon_limit,
                100.0 * report.cl);
  }
  std::printf("\n");
}

int run_generate_bits(std::int64_t n_classical, std::int64_t n_qubit_a,
                      std::int64_t n_qubit_b, const std::string& fidelity_file,
                      std::uint64_t seed, bool blind, const std::string& out) {
  bitgen::FidelityModel fidelity;
  if (!fidelity_file.empty()) fidelity = io::read_fidelity(fidelity_file);

  io::BitsBundle bundle;
  bundle.fidelity = fidelity;
  bundle.master_seed = seed;
  bundle.n_classical = n_classical;
  bundle.n_qubit_a = n_qubit_a;
  bundle.n_qubit_b = n_qubit_b;
  bundle.blind = blind;
  bundle.sample =
      bitgen::generate_mixed_sample(n_classical, n_qubit_a, n_qubit_b, fidelity, seed);

  io::write_bits(out, bundle);
  std::printf("wrote %zu mixed bits (%lld classical, %lld qubit_a, %lld qubit_b) to %s%s\n",
              bundle.sample.bits.size(), static_cast<long long>(n_classical),
              static_cast<long long>(n_qubit_a), static_cast<long long>(n_qubit_b),
              out.c_str(), blind ? " [quantum values withheld]" : "");
  return 0;
}

int run_simulate_run(const std::string& config_file, const std::string& bits_file,
                     double epsilon, std::uint64_t seed, bool blind,
                     const std::string& out_dir) {
  rfchain::ChainConfig cfg;
  runner::TimingProfile timing;
  if (!config_file.empty()) {
    const io::KeyValues kv = io::read_keyvalue(config_file);
    cfg = io::chain_config_from(kv);
    timing = timing_from_keyvalues(kv);
  }

  io::BitsBundle bits = io::read_bits(bits_file);
  const bool run_blind = blind || bits.blind;
  if (run_blind && !bits.has_sidecar) {
    throw IncompleteRunError(
        "blinded runs need bits generated with a sidecar (see generate-bits)");
  }

  runner::BlindingPolicy policy{run_blind};
  const runner::RunLedger ledger = runner::run_experiment(
      cfg, bits.sample, timing, epsilon, seed, out_dir, policy, bits.fidelity);

  // The run directory carries its own copy of the bit sample so analysis is
  // self-contained; quantum values stay withheld under blinding.
  bits.blind = run_blind;
  io::write_bits(fs::path(out_dir) / "bits.csv", bits);

  std::printf("ran %zu bits into %s (epsilon_true=%g, blinded=%s)\n",
              ledger.entries.size(), out_dir.c_str(), epsilon,
              run_blind ? "true" : "false");
  return 0;
}

int run_calibrate(double thermal_dbm, double thermal_rbw_hz, double t_dewar_k,
                  double gen_dbm, double gen_il_pre_db, double gen_sa_dbm,
                  double il_post_db, double hp_gain_db, double hp_gain_sigma_db,
                  double cable_error, bool apply_policy, double il_hp_path_db,
                  const std::string& out) {
  calibration::ThermalMeasurement thermal{dbm_to_watts(thermal_dbm), thermal_rbw_hz,
                                          t_dewar_k};
  calibration::GeneratorMeasurement gen{gen_dbm, gen_il_pre_db, dbm_to_watts(gen_sa_dbm)};

  calibration::CalibrationSolution sol =
      calibration::solve_hemt_calibration(thermal, gen, il_post_db);
  sol.effective_g_hp_db = calibration::effective_hp_gain_db(hp_gain_db, hp_gain_sigma_db);
  if (apply_policy) {
    const calibration::ErrorPolicy policy{cable_error};
    sol.effective_il_factors["post_hemt"] =
        calibration::apply_cable_policy(il_post_db, policy,
                                        calibration::PolicyDirection::toward_pm);
    sol.effective_il_factors["hp_path"] =
        calibration::apply_cable_policy(il_hp_path_db, policy,
                                        calibration::PolicyDirection::toward_pa);
  }

  io::write_calibration(out, sol);
  std::printf("G_HEMT = %.3f dB, T_HEMT_noise = %.3f K, effective HP gain = %.2f dB -> %s\n",
              sol.g_hemt_db, sol.t_hemt_noise_k, sol.effective_g_hp_db, out.c_str());
  return 0;
}

int run_analyze(const std::string& run_dir, const std::string& cal_file, bool blind,
                double cl, double sideband_exclude_hz, const std::string& sigma_mode,
                bool dump_quantum_ps) {
  runner::RunLedger ledger = runner::load_run(run_dir);
  const calibration::CalibrationSolution sol = io::read_calibration(cal_file);

  // A run recorded blind stays blind; the flag can only add blinding.
  runner::BlindingPolicy policy{blind || ledger.blinded};
  runner::AnalysisOptions options;
  options.cl = cl;
  options.sideband_exclude_halfwidth_hz = sideband_exclude_hz;
  options.limit_sigma = sigma_mode == "per-bit-spread"
                            ? limits::SigmaConvention::per_bit_spread
                            : limits::SigmaConvention::standard_error;

  const runner::AnalysisResult result = runner::analyze(ledger, sol, policy, options);

  const runner::ResultWriter writer(run_dir, policy);
  writer.write_classical_rows(result.classical_rows);
  writer.write_report(result);
  if (dump_quantum_ps) {
    writer.write_quantum_rows(result.quantum_rows);  // hard failure when blinded
  }

  print_report_line(result.classical);
  if (result.quantum) print_report_line(*result.quantum);
  return 0;
}

int run_limit(const std::string& analysis_file, const std::string& cal_file, double cl,
              double pa_watts, double fc, double fh, double bandwidth_fraction,
              bool apply_policy, double il_hp_path_db, const std::string& out) {
  if (!cal_file.empty()) (void)io::read_calibration(cal_file);  // validate if given

  std::ifstream in(analysis_file);
  if (!in) throw std::runtime_error("cannot open " + analysis_file);
  std::string line;
  if (!std::getline(in, line) || line != "id,p_s_w,sideband_mean_w,sideband_sigma_w") {
    throw std::runtime_error("bad analysis header in " + analysis_file);
  }
  std::vector<double> excesses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double p_s = 0, sb_mean = 0, sb_sigma = 0;
    long long id = 0;
    if (std::sscanf(line.c_str(), "%lld,%lg,%lg,%lg", &id, &p_s, &sb_mean, &sb_sigma) != 4) {
      throw std::runtime_error("bad analysis row: " + line);
    }
    excesses.push_back(p_s - sb_mean);
  }

  double pa_effective = pa_watts;
  if (apply_policy) {
    // Extra conservative loss on the applied-power path.
    const calibration::ErrorPolicy policy;
    pa_effective = pa_watts * db_to_linear(il_hp_path_db) /
                   calibration::apply_cable_policy(il_hp_path_db, policy,
                                                   calibration::PolicyDirection::toward_pa);
  }

  limits::LimitReport report;
  report.dataset_tag = limits::DatasetTag::classical;
  report.cl = cl;
  report.p_applied_w = pa_effective;
  report.corrections = {1.0 / std::sqrt(bandwidth_fraction), limits::readout_correction(fc),
                        limits::hadamard_correction(fh)};
  const double p_m = limits::power_upper_limit(excesses, cl);
  report.p_m_w = p_m;
  report.excess_detected = false;
  report.epsilon_limit =
      limits::epsilon_limit(p_m, pa_effective, bandwidth_fraction,
                            report.corrections.f_readout, report.corrections.f_hadamard);

  nlohmann::json j = {
      {"dataset_tag", "classical"},
      {"cl", report.cl},
      {"p_m_w", p_m},
      {"p_applied_w", report.p_applied_w},
      {"sigma_convention", std::string(limits::to_string(report.sigma_convention))},
      {"corrections",
       {{"f_bandwidth", report.corrections.f_bandwidth},
        {"f_readout", report.corrections.f_readout},
        {"f_hadamard", report.corrections.f_hadamard}}},
      {"epsilon_limit", *report.epsilon_limit},
      {"excess_detected", false},
  };
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream os(out);
    os << j.dump(2) << "\n";
  }
  std::fprintf(stderr, "P_M = %.3e W, |epsilon| < %.3e at %.1f%% CL\n", p_m,
               *report.epsilon_limit, 100.0 * cl);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and analysis pipeline for the NLQM RF experiment"};
  app.require_subcommand(1);

  // generate-bits
  auto* gen = app.add_subcommand("generate-bits", "Generate and mix the bit samples");
  std::int64_t n_classical = 25, n_qubit_a = 21, n_qubit_b = 20;
  std::string fidelity_file, bits_out = "bits.csv";
  std::uint64_t gen_seed = 1;
  bool gen_blind = false;
  gen->add_option("--n-classical", n_classical, "classical bit count");
  gen->add_option("--n-qubit-a", n_qubit_a, "qubit A bit count");
  gen->add_option("--n-qubit-b", n_qubit_b, "qubit B bit count");
  gen->add_option("--fidelity-file", fidelity_file, "key=value fidelity model");
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_flag("--blind", gen_blind, "withhold quantum bit values from bits.csv");
  gen->add_option("--out", bits_out, "output CSV path");

  // simulate-run
  auto* sim = app.add_subcommand("simulate-run", "Run the per-bit experiment loop");
  std::string sim_config, sim_bits = "bits.csv", sim_out = "run";
  double sim_epsilon = 0.0;
  std::uint64_t sim_seed = 1;
  bool sim_blind = false;
  sim->add_option("--config", sim_config, "key=value chain/timing configuration");
  sim->add_option("--bits", sim_bits, "mixed bit sample CSV");
  sim->add_option("--epsilon", sim_epsilon, "true nonlinearity parameter to inject");
  sim->add_option("--seed", sim_seed, "master seed for spectrum synthesis");
  sim->add_flag("--blind", sim_blind, "enforce the blinding policy");
  sim->add_option("--out", sim_out, "run directory");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Solve the HEMT calibration");
  double thermal_dbm = -154.6, thermal_rbw = 1.0, t_dewar = 1.921;
  double cal_gen_dbm = -130.0, gen_il_pre = 7.53, gen_sa_dbm = -101.33;
  double il_post = 1.89, hp_gain = 60.73, hp_sigma = 0.6, cable_error = 0.10;
  double il_hp_path = 7.10;
  bool apply_policy = false;
  std::string cal_out = "cal.cfg";
  cal->add_option("--thermal-dbm", thermal_dbm, "amplified thermal noise at the SA, dBm");
  cal->add_option("--thermal-rbw-hz", thermal_rbw, "thermal measurement RBW, Hz");
  cal->add_option("--t-dewar-k", t_dewar, "dewar temperature, K");
  cal->add_option("--gen-dbm", cal_gen_dbm, "generator output power, dBm");
  cal->add_option("--gen-il-pre-db", gen_il_pre, "generator-to-HEMT insertion loss, dB");
  cal->add_option("--gen-sa-dbm", gen_sa_dbm, "amplified generator tone at the SA, dBm");
  cal->add_option("--il-post-db", il_post, "assumed HEMT-to-SA insertion loss, dB");
  cal->add_option("--hp-gain-db", hp_gain, "HP amplifier nominal gain, dB");
  cal->add_option("--hp-gain-sigma-db", hp_sigma, "HP amplifier gain systematic, dB");
  cal->add_option("--cable-error", cable_error, "one-sided relative cable-loss error");
  cal->add_option("--hp-path-il-db", il_hp_path, "HP amp to HP load insertion loss, dB");
  cal->add_flag("--apply-cable-policy", apply_policy,
                "derate losses per the conservative one-sided policy");
  cal->add_option("--out", cal_out, "output calibration file");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Calibrate spectra and derive limits");
  std::string ana_run = "run", ana_cal = "cal.cfg", ana_sigma = "standard-error";
  bool ana_blind = false, dump_quantum = false;
  double ana_cl = 0.90, ana_sideband_hz = 0.010;
  ana->add_option("--run", ana_run, "run directory");
  ana->add_option("--cal", ana_cal, "calibration file");
  ana->add_flag("--blind", ana_blind, "enforce the blinding policy");
  ana->add_option("--cl", ana_cl, "confidence level");
  ana->add_option("--sideband-exclude-hz", ana_sideband_hz,
                  "half-width of the excluded signal region");
  ana->add_option("--limit-sigma", ana_sigma, "sigma entering the truncated normal")
      ->check(CLI::IsMember({"standard-error", "per-bit-spread"}));
  ana->add_flag("--dump-quantum-ps", dump_quantum,
                "write per-bit quantum powers (rejected under blinding)");

  // limit
  auto* lim = app.add_subcommand("limit", "Convert analysis rows into an epsilon limit");
  std::string lim_analysis = "run/analysis.csv", lim_cal, lim_out;
  double lim_cl = 0.90, pa_watts = 7.45, fc = 0.861, fh = 0.99, bw_fraction = 0.856;
  bool lim_policy = false;
  double lim_hp_path = 7.10;
  lim->add_option("--analysis", lim_analysis, "analysis.csv from `analyze`");
  lim->add_option("--cal", lim_cal, "calibration file");
  lim->add_option("--cl", lim_cl, "confidence level");
  lim->add_option("--pa-watts", pa_watts, "applied power P_A, W");
  lim->add_option("--fc", fc, "classical readout fidelity F_C");
  lim->add_option("--fh", fh, "Hadamard gate fidelity F_H");
  lim->add_option("--bandwidth-fraction", bw_fraction, "in-band signal fraction");
  lim->add_flag("--apply-cable-policy", lim_policy, "derate P_A per the cable policy");
  lim->add_option("--hp-path-il-db", lim_hp_path, "HP amp to HP load insertion loss, dB");
  lim->add_option("--out", lim_out, "report JSON path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return run_generate_bits(n_classical, n_qubit_a, n_qubit_b, fidelity_file, gen_seed,
                               gen_blind, bits_out);
    }
    if (sim->parsed()) {
      return run_simulate_run(sim_config, sim_bits, sim_epsilon, sim_seed, sim_blind,
                              sim_out);
    }
    if (cal->parsed()) {
      return run_calibrate(thermal_dbm, thermal_rbw, t_dewar, cal_gen_dbm, gen_il_pre,
                           gen_sa_dbm, il_post, hp_gain, hp_sigma, cable_error,
                           apply_policy, il_hp_path, cal_out);
    }
    if (ana->parsed()) {
      return run_analyze(ana_run, ana_cal, ana_blind, ana_cl, ana_sideband_hz,
                         ana_sigma, dump_quantum);
    }
    if (lim->parsed()) {
      return run_limit(lim_analysis, lim_cal, lim_cl, pa_watts, fc, fh, bw_fraction,
                       lim_policy, lim_hp_path, lim_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
