#include "nlqm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nlqm/errors.hpp"
#include "nlqm/units.hpp"

namespace nlqm::io {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("could not parse number for " + what + ": '" + text + "'");
  }
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path,
                                   const char* suffix) {
  std::filesystem::path p = csv_path;
  p.replace_extension();
  p += suffix;
  return p;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

json switch_state_to_json(const rfchain::SwitchState& st) {
  return {{"sw1", st.sw1 == rfchain::Sw1Port::port1_load ? "port1_load" : "port_signal"},
          {"sw2", st.sw2 == rfchain::Sw2Port::port1_signal ? "port1_signal" : "port2_hp_load"},
          {"source_on", st.source_on}};
}

rfchain::SwitchState switch_state_from_json(const json& j) {
  rfchain::SwitchState st;
  st.sw1 = j.at("sw1").get<std::string>() == "port1_load" ? rfchain::Sw1Port::port1_load
                                                          : rfchain::Sw1Port::port_signal;
  st.sw2 = j.at("sw2").get<std::string>() == "port1_signal"
               ? rfchain::Sw2Port::port1_signal
               : rfchain::Sw2Port::port2_hp_load;
  st.source_on = j.at("source_on").get<bool>();
  return st;
}

}  // namespace

KeyValues read_keyvalue(const std::filesystem::path& path) {
  auto in = open_in(path);
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("malformed line in " + path.string() + ": " + line);
    }
    kv[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }
  return kv;
}

void write_keyvalue(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& pairs) {
  auto out = open_out(path);
  for (const auto& [key, value] : pairs) out << key << "=" << value << "\n";
}

double get_double(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("missing config key: " + key);
  return parse_double(it->second, key);
}

double get_double_or(const KeyValues& kv, const std::string& key, double fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_double(it->second, key);
}

rfchain::ChainConfig chain_config_from(const KeyValues& kv) {
  rfchain::ChainConfig cfg;
  cfg.t_dewar_k = get_double_or(kv, "t_dewar_k", cfg.t_dewar_k);
  cfg.t_hemt_noise_k = get_double_or(kv, "t_hemt_noise_k", cfg.t_hemt_noise_k);
  cfg.g_hemt_db = get_double_or(kv, "g_hemt_db", cfg.g_hemt_db);
  cfg.g_hp_amp_db = get_double_or(kv, "g_hp_amp_db", cfg.g_hp_amp_db);
  cfg.g_hp_amp_sigma_db = get_double_or(kv, "g_hp_amp_sigma_db", cfg.g_hp_amp_sigma_db);
  cfg.il_pre_hemt_db = get_double_or(kv, "il_pre_hemt_db", cfg.il_pre_hemt_db);
  cfg.il_hp_path_db = get_double_or(kv, "il_hp_path_db", cfg.il_hp_path_db);
  cfg.il_post_hemt_db = get_double_or(kv, "il_post_hemt_db", cfg.il_post_hemt_db);
  cfg.rbw_data_hz = get_double_or(kv, "rbw_data_hz", cfg.rbw_data_hz);
  cfg.rbw_cal_hz = get_double_or(kv, "rbw_cal_hz", cfg.rbw_cal_hz);
  cfg.f0_hz = get_double_or(kv, "f0_hz", cfg.f0_hz);
  cfg.span_hz = get_double_or(kv, "span_hz", cfg.span_hz);
  cfg.p_generator_dbm = get_double_or(kv, "p_generator_dbm", cfg.p_generator_dbm);
  cfg.p_applied_w = get_double_or(kv, "p_applied_w", cfg.p_applied_w);
  cfg.inband_fraction = get_double_or(kv, "inband_fraction", cfg.inband_fraction);
  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> chain_config_pairs(
    const rfchain::ChainConfig& cfg) {
  return {
      {"t_dewar_k", format_g17(cfg.t_dewar_k)},
      {"t_hemt_noise_k", format_g17(cfg.t_hemt_noise_k)},
      {"g_hemt_db", format_g17(cfg.g_hemt_db)},
      {"g_hp_amp_db", format_g17(cfg.g_hp_amp_db)},
      {"g_hp_amp_sigma_db", format_g17(cfg.g_hp_amp_sigma_db)},
      {"il_pre_hemt_db", format_g17(cfg.il_pre_hemt_db)},
      {"il_hp_path_db", format_g17(cfg.il_hp_path_db)},
      {"il_post_hemt_db", format_g17(cfg.il_post_hemt_db)},
      {"rbw_data_hz", format_g17(cfg.rbw_data_hz)},
      {"rbw_cal_hz", format_g17(cfg.rbw_cal_hz)},
      {"f0_hz", format_g17(cfg.f0_hz)},
      {"span_hz", format_g17(cfg.span_hz)},
      {"p_generator_dbm", format_g17(cfg.p_generator_dbm)},
      {"p_applied_w", format_g17(cfg.p_applied_w)},
      {"inband_fraction", format_g17(cfg.inband_fraction)},
  };
}

void write_spectrum(const std::filesystem::path& csv_path, const rfchain::Spectrum& spec) {
  auto out = open_out(csv_path);
  out << "frequency_hz,power_dbm\n";
  for (Eigen::Index i = 0; i < spec.bins.size(); ++i) {
    out << format_g17(spec.bin_center_hz(static_cast<int>(i))) << ","
        << format_g17(watts_to_dbm(spec.bins[i])) << "\n";
  }

  json meta = {
      {"f_start_hz", spec.f_start_hz},
      {"bin_hz", spec.bin_hz},
      {"rbw_hz", spec.rbw_hz},
      {"plane", std::string(rfchain::to_string(spec.plane))},
      {"seed", spec.seed},
      {"outside_perturbative", spec.outside_perturbative},
  };
  if (spec.switch_state) meta["switch_state"] = switch_state_to_json(*spec.switch_state);
  auto meta_out = open_out(sidecar_path(csv_path, ".meta.json"));
  meta_out << meta.dump(2) << "\n";
}

rfchain::Spectrum read_spectrum(const std::filesystem::path& csv_path) {
  json meta;
  open_in(sidecar_path(csv_path, ".meta.json")) >> meta;

  rfchain::Spectrum spec;
  spec.f_start_hz = meta.at("f_start_hz").get<double>();
  spec.bin_hz = meta.at("bin_hz").get<double>();
  spec.rbw_hz = meta.at("rbw_hz").get<double>();
  spec.plane = rfchain::reference_plane_from(meta.at("plane").get<std::string>());
  spec.seed = meta.at("seed").get<std::uint64_t>();
  spec.outside_perturbative = meta.value("outside_perturbative", false);
  if (meta.contains("switch_state")) {
    spec.switch_state = switch_state_from_json(meta.at("switch_state"));
  }

  auto in = open_in(csv_path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "frequency_hz,power_dbm") {
    throw std::runtime_error("bad spectrum header in " + csv_path.string());
  }
  std::vector<double> powers;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw std::runtime_error("bad spectrum row in " + csv_path.string() + ": " + line);
    }
    powers.push_back(dbm_to_watts(parse_double(fields[1], "power_dbm")));
  }
  spec.bins = Eigen::Map<const Eigen::ArrayXd>(powers.data(),
                                               static_cast<Eigen::Index>(powers.size()));
  return spec;
}

void write_calibration(const std::filesystem::path& path,
                       const calibration::CalibrationSolution& sol) {
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"g_hemt_db", format_g17(sol.g_hemt_db)},
      {"t_hemt_noise_k", format_g17(sol.t_hemt_noise_k)},
      {"il_post_hemt_db", format_g17(sol.il_post_hemt_db)},
      {"effective_g_hp_db", format_g17(sol.effective_g_hp_db)},
  };
  for (const auto& [path_name, factor] : sol.effective_il_factors) {
    pairs.emplace_back("il_factor_" + path_name, format_g17(factor));
  }
  write_keyvalue(path, pairs);
}

calibration::CalibrationSolution read_calibration(const std::filesystem::path& path) {
  const KeyValues kv = read_keyvalue(path);
  calibration::CalibrationSolution sol;
  sol.g_hemt_db = get_double(kv, "g_hemt_db");
  sol.t_hemt_noise_k = get_double(kv, "t_hemt_noise_k");
  sol.il_post_hemt_db = get_double(kv, "il_post_hemt_db");
  sol.effective_g_hp_db = get_double_or(kv, "effective_g_hp_db", 0.0);
  for (const auto& [key, value] : kv) {
    if (key.rfind("il_factor_", 0) == 0) {
      sol.effective_il_factors[key.substr(10)] = parse_double(value, key);
    }
  }
  return sol;
}

bitgen::FidelityModel read_fidelity(const std::filesystem::path& path) {
  const KeyValues kv = read_keyvalue(path);
  bitgen::FidelityModel model;
  model.f_hadamard = get_double_or(kv, "f_hadamard", model.f_hadamard);
  model.f_readout = get_double_or(kv, "f_readout", model.f_readout);
  model.f_reset = get_double_or(kv, "f_reset", model.f_reset);
  model.validate();
  return model;
}

void write_fidelity(const std::filesystem::path& path, const bitgen::FidelityModel& model) {
  write_keyvalue(path, {{"f_hadamard", format_g17(model.f_hadamard)},
                        {"f_readout", format_g17(model.f_readout)},
                        {"f_reset", format_g17(model.f_reset)}});
}

void write_bits(const std::filesystem::path& csv_path, const BitsBundle& bundle) {
  auto out = open_out(csv_path);
  out << "id,source,value\n";
  for (const auto& bit : bundle.sample.bits) {
    const bool withhold = bundle.blind && bit.source != bitgen::BitSource::classical;
    out << bit.id << "," << bitgen::to_string(bit.source) << ",";
    if (!withhold) out << bit.value;
    out << "\n";
  }

  json meta = {
      {"master_seed", bundle.master_seed},
      {"n_classical", bundle.n_classical},
      {"n_qubit_a", bundle.n_qubit_a},
      {"n_qubit_b", bundle.n_qubit_b},
      {"blind", bundle.blind},
      {"provenance_seed", bundle.sample.provenance_seed},
      {"fidelity",
       {{"f_hadamard", bundle.fidelity.f_hadamard},
        {"f_readout", bundle.fidelity.f_readout},
        {"f_reset", bundle.fidelity.f_reset}}},
  };
  auto meta_out = open_out(sidecar_path(csv_path, ".json"));
  meta_out << meta.dump(2) << "\n";
}

BitsBundle read_bits(const std::filesystem::path& csv_path) {
  BitsBundle bundle;
  const auto meta_path = sidecar_path(csv_path, ".json");
  const bool have_meta = std::filesystem::exists(meta_path);
  bundle.has_sidecar = have_meta;
  if (have_meta) {
    json meta;
    open_in(meta_path) >> meta;
    bundle.master_seed = meta.at("master_seed").get<std::uint64_t>();
    bundle.n_classical = meta.at("n_classical").get<std::int64_t>();
    bundle.n_qubit_a = meta.at("n_qubit_a").get<std::int64_t>();
    bundle.n_qubit_b = meta.at("n_qubit_b").get<std::int64_t>();
    bundle.blind = meta.at("blind").get<bool>();
    bundle.sample.provenance_seed = meta.value("provenance_seed", std::uint64_t{0});
    const json& f = meta.at("fidelity");
    bundle.fidelity.f_hadamard = f.at("f_hadamard").get<double>();
    bundle.fidelity.f_readout = f.at("f_readout").get<double>();
    bundle.fidelity.f_reset = f.at("f_reset").get<double>();
  }

  struct Row {
    std::int64_t id;
    bitgen::BitSource source;
    std::optional<int> value;
  };
  std::vector<Row> rows;
  auto in = open_in(csv_path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "id,source,value") {
    throw std::runtime_error("bad bits header in " + csv_path.string());
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw std::runtime_error("bad bits row in " + csv_path.string() + ": " + line);
    }
    Row row;
    row.id = static_cast<std::int64_t>(parse_double(fields[0], "id"));
    row.source = bitgen::bit_source_from(trim(fields[1]));
    const std::string value = trim(fields[2]);
    if (!value.empty()) row.value = static_cast<int>(parse_double(value, "value"));
    rows.push_back(row);
  }

  const bool any_withheld =
      std::any_of(rows.begin(), rows.end(), [](const Row& r) { return !r.value; });
  if (any_withheld && !have_meta) {
    throw IncompleteRunError("bits file withholds values but has no sidecar to regenerate from");
  }

  if (have_meta && (bundle.blind || any_withheld)) {
    // Regenerate the sample from the recorded seeds and check it against the
    // visible rows.
    bundle.sample = bitgen::generate_mixed_sample(bundle.n_classical, bundle.n_qubit_a,
                                                  bundle.n_qubit_b, bundle.fidelity,
                                                  bundle.master_seed);
    if (bundle.sample.bits.size() != rows.size()) {
      throw IncompleteRunError("bits file row count does not match its sidecar");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& regen = bundle.sample.bits[i];
      if (rows[i].id != regen.id || rows[i].source != regen.source ||
          (rows[i].value && *rows[i].value != regen.value)) {
        throw IncompleteRunError("bits file disagrees with regeneration from its sidecar");
      }
    }
  } else {
    bundle.sample.bits.reserve(rows.size());
    for (const auto& row : rows) {
      if (!row.value) throw IncompleteRunError("bits file is missing values");
      bundle.sample.bits.push_back({row.id, row.source, *row.value});
      bundle.sample.counts.for_source(row.source) += 1;
    }
    if (!have_meta) {
      bundle.n_classical = bundle.sample.counts.classical;
      bundle.n_qubit_a = bundle.sample.counts.qubit_a;
      bundle.n_qubit_b = bundle.sample.counts.qubit_b;
    }
  }
  return bundle;
}

}  // namespace nlqm::io
