#ifndef MTMM_EXPERIMENT_HPP
#define MTMM_EXPERIMENT_HPP

// Experiment orchestration behind the command-line front end: JSON config
// parsing with field-path diagnostics, the four commands as pure functions
// returning tabular rows, and deterministic CSV serialization. Floats are
// printed as the shortest decimal that round-trips, so identical configs give
// byte-identical output.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mtmm.hpp"

namespace mtmm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // membrane
  double n = 0.0;
  double l_nm = 0.0;
  // array
  int count = 0;
  double spacing_nm = 0.0;
  ArrayModel model = ArrayModel::full_slab;
  // cavity (optional block; required by the cavity-based commands)
  bool has_cavity = false;
  double length_nm = 0.0;
  std::optional<double> finesse;
  std::optional<double> mirror_zeta;
  double center_offset_nm = 0.0;
  // scan
  double lambda_min_nm = 0.0;
  double lambda_max_nm = 0.0;
  int samples = 0;
  // numerics, all defaulted
  double fd_step_fraction = 1e-6;
  double root_tol = 1e-12;
  double degeneracy_eps = 1e-3;

  MembraneArray make_array() const {
    return MembraneArray(SlabMembrane(n, l_nm), count, spacing_nm, model);
  }

  CavityConfig make_cavity() const {
    if (!has_cavity) {
      throw ConfigError("config error at cavity: block is required for this command");
    }
    if (finesse) {
      return CavityConfig::with_finesse(length_nm, *finesse, make_array(),
                                        center_offset_nm);
    }
    return CavityConfig::with_mirror_zeta(length_nm, *mirror_zeta, make_array(),
                                          center_offset_nm);
  }
};

namespace cfgdetail {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& path,
                                     const std::string& key) {
  if (!j.contains(key)) {
    throw ConfigError("config error at " + path + key + ": missing required field");
  }
  return j.at(key);
}

inline double number_at(const nlohmann::json& j, const std::string& path,
                        const std::string& key) {
  const auto& v = require(j, path, key);
  if (!v.is_number()) {
    throw ConfigError("config error at " + path + key + ": expected a number");
  }
  return v.get<double>();
}

inline double positive_at(const nlohmann::json& j, const std::string& path,
                          const std::string& key) {
  const double v = number_at(j, path, key);
  if (!(v > 0.0)) {
    throw ConfigError("config error at " + path + key + ": must be positive");
  }
  return v;
}

inline int integer_at(const nlohmann::json& j, const std::string& path,
                      const std::string& key) {
  const auto& v = require(j, path, key);
  if (!v.is_number_integer()) {
    throw ConfigError("config error at " + path + key + ": expected an integer");
  }
  return v.get<int>();
}

}  // namespace cfgdetail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using namespace cfgdetail;
  ExperimentConfig c;

  const auto& membrane = require(j, "", "membrane");
  c.n = number_at(membrane, "membrane.", "n");
  if (!(c.n >= 1.0)) {
    throw ConfigError("config error at membrane.n: must be >= 1");
  }
  c.l_nm = positive_at(membrane, "membrane.", "l_nm");

  const auto& array = require(j, "", "array");
  c.count = integer_at(array, "array.", "count");
  if (c.count < 1) {
    throw ConfigError("config error at array.count: must be >= 1");
  }
  c.spacing_nm = positive_at(array, "array.", "spacing_nm");
  if (array.contains("model")) {
    const std::string m = array.at("model").get<std::string>();
    if (m == "full") {
      c.model = ArrayModel::full_slab;
    } else if (m == "thin-padded") {
      c.model = ArrayModel::thin_padded;
    } else {
      throw ConfigError("config error at array.model: must be full or thin-padded");
    }
  }

  if (j.contains("cavity")) {
    const auto& cavity = j.at("cavity");
    c.has_cavity = true;
    c.length_nm = positive_at(cavity, "cavity.", "length_nm");
    const bool has_f = cavity.contains("finesse");
    const bool has_z = cavity.contains("mirror_zeta");
    if (has_f == has_z) {
      throw ConfigError(
          "config error at cavity: exactly one of finesse or mirror_zeta is required");
    }
    if (has_f) c.finesse = positive_at(cavity, "cavity.", "finesse");
    if (has_z) c.mirror_zeta = positive_at(cavity, "cavity.", "mirror_zeta");
    if (cavity.contains("center_offset_nm")) {
      c.center_offset_nm = number_at(cavity, "cavity.", "center_offset_nm");
    }
  }

  const auto& scan = require(j, "", "scan");
  c.lambda_min_nm = positive_at(scan, "scan.", "lambda_min_nm");
  c.lambda_max_nm = positive_at(scan, "scan.", "lambda_max_nm");
  if (!(c.lambda_min_nm < c.lambda_max_nm)) {
    throw ConfigError(
        "config error at scan.lambda_max_nm: must exceed scan.lambda_min_nm");
  }
  if (scan.contains("samples")) {
    c.samples = cfgdetail::integer_at(scan, "scan.", "samples");
    if (c.samples < 2) {
      throw ConfigError("config error at scan.samples: must be >= 2");
    }
  }

  if (j.contains("numerics")) {
    const auto& num = j.at("numerics");
    if (num.contains("fd_step_fraction")) {
      c.fd_step_fraction = positive_at(num, "numerics.", "fd_step_fraction");
    }
    if (num.contains("root_tol")) {
      c.root_tol = positive_at(num, "numerics.", "root_tol");
    }
    if (num.contains("degeneracy_eps")) {
      c.degeneracy_eps = positive_at(num, "numerics.", "degeneracy_eps");
    }
  }
  return c;
}

// Echo lines from a previous run ("# key = value") can be fed back in place
// of a JSON config: every resolved field is present, so the rerun reproduces
// the original byte for byte.
inline nlohmann::json config_from_echo(std::istream& in) {
  nlohmann::json j = nlohmann::json::object();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') break;  // echo block ends at the CSV header
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;  // the schema line has no '='
    const std::string key = line.substr(2, eq - 2);
    const std::string value = line.substr(eq + 3);
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string section = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    if (section == "mode") continue;  // run metadata, not configuration
    if (field == "count" || field == "samples") {
      int iv = 0;
      std::from_chars(value.data(), value.data() + value.size(), iv);
      j[section][field] = iv;
    } else if (field == "model") {
      j[section][field] = value;
    } else {
      double dv = 0.0;
      std::from_chars(value.data(), value.data() + value.size(), dv);
      j[section][field] = dv;
    }
  }
  return j;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config error: cannot open " + path);
  }
  // peek: '#' means a config echo from a previous run, anything else is JSON
  const int first = in.peek();
  nlohmann::json j;
  if (first == '#') {
    j = config_from_echo(in);
  } else {
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config error: invalid JSON: ") + e.what());
    }
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// CSV output

// shortest decimal representation that parses back to the same double
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

using CsvValue = std::variant<double, std::string>;
using CsvRow = std::vector<CsvValue>;

struct OutputRecord {
  std::string schema_version = "v1";
  std::string command;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<std::string> columns;
  std::vector<CsvRow> rows;
};

inline std::vector<std::pair<std::string, std::string>> echo_config(
    const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("membrane.n", format_double(c.n));
  e.emplace_back("membrane.l_nm", format_double(c.l_nm));
  e.emplace_back("array.count", std::to_string(c.count));
  e.emplace_back("array.spacing_nm", format_double(c.spacing_nm));
  e.emplace_back("array.model",
                 c.model == ArrayModel::full_slab ? "full" : "thin-padded");
  if (c.has_cavity) {
    e.emplace_back("cavity.length_nm", format_double(c.length_nm));
    if (c.finesse) e.emplace_back("cavity.finesse", format_double(*c.finesse));
    if (c.mirror_zeta) {
      e.emplace_back("cavity.mirror_zeta", format_double(*c.mirror_zeta));
    }
    e.emplace_back("cavity.center_offset_nm", format_double(c.center_offset_nm));
  }
  e.emplace_back("scan.lambda_min_nm", format_double(c.lambda_min_nm));
  e.emplace_back("scan.lambda_max_nm", format_double(c.lambda_max_nm));
  if (c.samples > 0) e.emplace_back("scan.samples", std::to_string(c.samples));
  e.emplace_back("numerics.fd_step_fraction", format_double(c.fd_step_fraction));
  e.emplace_back("numerics.root_tol", format_double(c.root_tol));
  e.emplace_back("numerics.degeneracy_eps", format_double(c.degeneracy_eps));
  return e;
}

inline std::string render_csv(const OutputRecord& rec) {
  std::ostringstream out;
  out << "# mtmm " << rec.command << " " << rec.schema_version << "\n";
  for (const auto& [key, value] : rec.config_echo) {
    out << "# " << key << " = " << value << "\n";
  }
  for (std::size_t i = 0; i < rec.columns.size(); ++i) {
    if (i) out << ",";
    out << rec.columns[i];
  }
  out << "\n";
  for (const auto& row : rec.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      if (std::holds_alternative<double>(row[i])) {
        out << format_double(std::get<double>(row[i]));
      } else {
        out << std::get<std::string>(row[i]);
      }
    }
    out << "\n";
  }
  return out.str();
}

inline const char* branch_label(Branch b) {
  switch (b) {
    case Branch::plus:
      return "plus";
    case Branch::minus:
      return "minus";
    case Branch::unclassified:
      return "unclassified";
  }
  return "unclassified";
}

// ---------------------------------------------------------------------------
// Commands

inline OutputRecord cmd_spectrum(const ExperimentConfig& cfg) {
  if (cfg.samples < 2) {
    throw ConfigError("config error at scan.samples: required for spectrum, >= 2");
  }
  MembraneArray full = cfg.make_array();
  full.model = ArrayModel::full_slab;
  MembraneArray thin = cfg.make_array();
  thin.model = ArrayModel::thin_padded;

  OutputRecord rec;
  rec.command = "spectrum";
  rec.config_echo = echo_config(cfg);
  rec.columns = {"lambda_nm", "T_full", "T_thin_padded", "abs_diff"};
  const auto spec_full =
      transmittance_spectrum(full, cfg.lambda_min_nm, cfg.lambda_max_nm, cfg.samples);
  const auto spec_thin =
      transmittance_spectrum(thin, cfg.lambda_min_nm, cfg.lambda_max_nm, cfg.samples);
  for (std::size_t i = 0; i < spec_full.size(); ++i) {
    rec.rows.push_back(CsvRow{spec_full[i].first, spec_full[i].second,
                              spec_thin[i].second,
                              std::abs(spec_full[i].second - spec_thin[i].second)});
  }
  return rec;
}

inline OutputRecord cmd_transmissive(const ExperimentConfig& cfg) {
  const MembraneArray a = cfg.make_array();
  OutputRecord rec;
  rec.command = "transmissive";
  rec.config_echo = echo_config(cfg);
  rec.columns = {"lambda_nm", "branch", "zeta", "degenerate_flag"};
  const auto roots = find_transmissive_wavelengths(a, cfg.lambda_min_nm,
                                                   cfg.lambda_max_nm, cfg.degeneracy_eps);
  for (const auto& r : roots) {
    rec.rows.push_back(CsvRow{r.wavelength, std::string(branch_label(r.branch)),
                              r.zeta_at, std::string(r.degenerate ? "1" : "0")});
  }
  return rec;
}

inline OutputRecord cmd_couplings(const ExperimentConfig& cfg) {
  const CavityConfig cavity = cfg.make_cavity();
  OutputRecord rec;
  rec.command = "couplings";
  rec.config_echo = echo_config(cfg);
  rec.columns = {"lambda_nm", "branch", "parity",
                 "g_num_over_g", "g_ana_over_g", "rel_dev"};

  if (cfg.count == 2) {
    const ComparisonTable table =
        compare_numeric_analytic(cavity, cfg.lambda_min_nm, cfg.lambda_max_nm,
                                 cfg.degeneracy_eps, cfg.fd_step_fraction);
    // interleave comparison rows and degenerate roots in wavelength order
    std::size_t i = 0;
    std::size_t j = 0;
    auto push_row = [&](const ComparisonRow& row) {
      rec.rows.push_back(CsvRow{row.wavelength, std::string(branch_label(row.branch)),
                                std::string(to_string(row.parity)), row.g_numeric,
                                row.g_analytic, row.rel_deviation});
    };
    auto push_degenerate = [&](const TransmissiveWavelength& r) {
      rec.rows.push_back(CsvRow{r.wavelength, std::string("degenerate"),
                                std::string(""), std::string(""), std::string(""),
                                std::string("")});
    };
    while (i < table.rows.size() || j < table.degenerate.size()) {
      if (j >= table.degenerate.size() ||
          (i < table.rows.size() &&
           table.rows[i].wavelength < table.degenerate[j].wavelength)) {
        push_row(table.rows[i++]);
      } else {
        push_degenerate(table.degenerate[j++]);
      }
    }
    return rec;
  }

  // other membrane counts: numeric collective coupling only, no analytic pair
  const auto roots = find_transmissive_wavelengths(
      *cavity.array, cfg.lambda_min_nm, cfg.lambda_max_nm, cfg.degeneracy_eps);
  for (const auto& root : roots) {
    if (root.degenerate) {
      rec.rows.push_back(CsvRow{root.wavelength, std::string("degenerate"),
                                std::string(""), std::string(""), std::string(""),
                                std::string("")});
      continue;
    }
    const double k_t = 2.0 * kPi / root.wavelength;
    for (double l_star : tuned_resonant_lengths(cavity, k_t)) {
      const CavityConfig tuned = cavity.with_length(l_star);
      ResonanceRecord r;
      r.k_res = find_peak_near(tuned, k_t);
      r.peak_transmittance = cavity_transmittance(tuned, r.k_res);
      r.mode_parity = classify_parity(tuned, r.k_res);
      const CouplingResult num =
          extract_couplings(tuned, r, cfg.fd_step_fraction * root.wavelength);
      rec.rows.push_back(CsvRow{root.wavelength, std::string("unclassified"),
                                std::string(to_string(r.mode_parity)),
                                num.g_collective / num.g_reference, std::string(""),
                                std::string("")});
    }
  }
  return rec;
}

struct ModeSelector {
  std::optional<int> mode_index;
  std::optional<Branch> branch;
  std::optional<Parity> parity;
  std::optional<double> lambda_nm;
};

namespace cfgdetail {

// sampling positions for a field profile: at least 50 samples per local
// wavelength within two wavelengths of any interface or mirror, an eighth of
// a wavelength pitch in the long gap interiors
inline std::vector<double> profile_positions(const StackLayout& stack, double k) {
  const double lambda = 2.0 * kPi / k;
  std::vector<double> edges{0.0};
  for (const auto& e : stack.elements) edges.push_back(edges.back() + e.length);
  const double total = edges.back();

  std::vector<double> pos;
  double x = 0.0;
  std::size_t elem = 0;
  while (x <= total) {
    pos.push_back(x);
    // local pitch: dense near any edge, sparse deep inside a gap
    while (elem + 1 < edges.size() && x >= edges[elem + 1]) ++elem;
    double dist_edge = total;
    for (double e : edges) dist_edge = std::min(dist_edge, std::abs(x - e));
    const bool in_slab = elem < stack.elements.size() &&
                         stack.elements[elem].kind == ElementKind::slab;
    const double local_lambda = in_slab ? lambda / stack.elements[elem].n : lambda;
    const double pitch =
        (dist_edge < 2.0 * lambda) ? local_lambda / 50.0 : lambda / 8.0;
    x += pitch;
  }
  if (pos.back() < total) pos.push_back(total);
  return pos;
}

}  // namespace cfgdetail

inline OutputRecord cmd_field_profile(const ExperimentConfig& cfg,
                                      const ModeSelector& sel) {
  const CavityConfig cavity = cfg.make_cavity();
  const bool by_index = sel.mode_index.has_value();
  const bool by_branch = sel.branch.has_value() || sel.parity.has_value() ||
                         sel.lambda_nm.has_value();
  if (by_index == by_branch) {
    throw ConfigError(
        "config error: select a mode with either --mode-index or all of "
        "--branch, --parity, --lambda");
  }

  CavityConfig chosen = cavity;
  double k_res = 0.0;
  if (by_index) {
    const double k_lo = 2.0 * kPi / cfg.lambda_max_nm;
    const double k_hi = 2.0 * kPi / cfg.lambda_min_nm;
    const auto resonances =
        find_resonances(cavity, 0.5 * (k_lo + k_hi), k_hi - k_lo);
    if (*sel.mode_index < 0 ||
        *sel.mode_index >= static_cast<int>(resonances.size())) {
      throw ConfigError("config error: --mode-index " +
                        std::to_string(*sel.mode_index) + " out of range, scan found " +
                        std::to_string(resonances.size()) + " resonances");
    }
    k_res = resonances[static_cast<std::size_t>(*sel.mode_index)].k_res;
  } else {
    if (!sel.branch || !sel.parity || !sel.lambda_nm) {
      throw ConfigError(
          "config error: --branch, --parity and --lambda must be given together");
    }
    if (cfg.count != 2) {
      throw ConfigError(
          "config error: branch selection requires a two-membrane array");
    }
    const auto roots = find_transmissive_wavelengths(
        *cavity.array, cfg.lambda_min_nm, cfg.lambda_max_nm, cfg.degeneracy_eps);
    const TransmissiveWavelength* nearest = nullptr;
    for (const auto& r : roots) {
      if (r.degenerate) continue;
      if (!nearest || std::abs(r.wavelength - *sel.lambda_nm) <
                          std::abs(nearest->wavelength - *sel.lambda_nm)) {
        nearest = &r;
      }
    }
    if (!nearest) {
      throw ConfigError("config error: no non-degenerate transmissive root in the scan window");
    }
    const double k_t = 2.0 * kPi / nearest->wavelength;
    const ComparisonTable table = compare_numeric_analytic(
        cavity, nearest->wavelength - 1e-6, nearest->wavelength + 1e-6,
        cfg.degeneracy_eps, cfg.fd_step_fraction);
    const ComparisonRow* match = nullptr;
    for (const auto& row : table.rows) {
      if (row.branch == *sel.branch && row.parity == *sel.parity) match = &row;
    }
    if (!match) {
      throw ConfigError(
          "config error: requested branch and parity do not combine at lambda = " +
          format_double(nearest->wavelength) +
          " nm; the pair members carry opposite parity");
    }
    chosen = cavity.with_length(match->tuned_length);
    k_res = find_peak_near(chosen, k_t);
  }

  const StackLayout stack = cavity_stack(chosen);
  const auto positions = cfgdetail::profile_positions(stack, k_res);
  const auto samples = field_profile(stack, k_res, positions);

  OutputRecord rec;
  rec.command = "field-profile";
  rec.config_echo = echo_config(cfg);
  rec.config_echo.emplace_back("mode.k_res", format_double(k_res));
  rec.config_echo.emplace_back("mode.cavity_length_nm", format_double(chosen.length));
  rec.columns = {"position_nm", "re", "im", "intensity"};
  for (const auto& s : samples) {
    rec.rows.push_back(
        CsvRow{s.position, s.amplitude.real(), s.amplitude.imag(), s.intensity});
  }
  return rec;
}

}  // namespace mtmm

#endif  // MTMM_EXPERIMENT_HPP
