#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nlqm/bitgen.hpp"
#include "nlqm/calibration.hpp"
#include "nlqm/rfchain.hpp"

namespace nlqm::io {

using KeyValues = std::map<std::string, std::string>;

// Plain-text key=value files; '#' starts a comment, blank lines ignored.
KeyValues read_keyvalue(const std::filesystem::path& path);
void write_keyvalue(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& pairs);

double get_double(const KeyValues& kv, const std::string& key);
double get_double_or(const KeyValues& kv, const std::string& key, double fallback);

// Chain configuration (run.cfg keys carry units, e.g. t_dewar_k=1.921).
rfchain::ChainConfig chain_config_from(const KeyValues& kv);
std::vector<std::pair<std::string, std::string>> chain_config_pairs(
    const rfchain::ChainConfig& cfg);

// Spectrum CSV ("frequency_hz,power_dbm") plus a .meta.json sidecar holding
// plane, rbw, seed and switch state.
void write_spectrum(const std::filesystem::path& csv_path, const rfchain::Spectrum& spec);
rfchain::Spectrum read_spectrum(const std::filesystem::path& csv_path);

// Calibration file written by `calibrate`, read by `analyze`/`limit`.
void write_calibration(const std::filesystem::path& path,
                       const calibration::CalibrationSolution& sol);
calibration::CalibrationSolution read_calibration(const std::filesystem::path& path);

bitgen::FidelityModel read_fidelity(const std::filesystem::path& path);
void write_fidelity(const std::filesystem::path& path, const bitgen::FidelityModel& model);

// bits.csv (id,source,value) plus a .json sidecar with the generation
// parameters. Under blinding the CSV withholds quantum values; reading then
// regenerates them in memory from the recorded seeds.
struct BitsBundle {
  bitgen::MixedSample sample;  // values always populated in memory
  bitgen::FidelityModel fidelity;
  std::uint64_t master_seed = 0;
  std::int64_t n_classical = 0;
  std::int64_t n_qubit_a = 0;
  std::int64_t n_qubit_b = 0;
  bool blind = false;
  bool has_sidecar = false;  // regeneration parameters are on disk
};

void write_bits(const std::filesystem::path& csv_path, const BitsBundle& bundle);
BitsBundle read_bits(const std::filesystem::path& csv_path);

}  // namespace nlqm::io
