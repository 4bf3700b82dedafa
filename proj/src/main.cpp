// mtmm: transfer-matrix experiments on membrane arrays in a Fabry-Perot
// cavity. Four subcommands compute transmission spectra, transmissive
// wavelengths, optomechanical couplings, and intracavity field profiles from
// a JSON config, emitting deterministic CSV with a reproducible config echo.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <mtmm/experiment.hpp>

namespace {

// validation failures (bad config, bad selector, bad ranges) exit 1;
// numerical failures inside a computation exit 2
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

void write_output(const mtmm::OutputRecord& rec, const std::string& out_path) {
  const std::string text = mtmm::render_csv(rec);
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw mtmm::ConfigError("config error: cannot write " + out_path);
  }
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transfer-matrix optics for membrane arrays in a cavity"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  int mode_index = -1;
  std::string branch_str;
  std::string parity_str;
  double lambda_sel = 0.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "path to a JSON config file")->required();
    cmd->add_option("--out", out_path, "write CSV here instead of standard output");
  };

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "transmittance of both membrane models over the scan window");
  add_common(spectrum);

  CLI::App* transmissive = app.add_subcommand(
      "transmissive", "wavelengths where the array transmits perfectly");
  add_common(transmissive);

  CLI::App* couplings = app.add_subcommand(
      "couplings", "optomechanical couplings at the transmissive wavelengths");
  add_common(couplings);

  CLI::App* field = app.add_subcommand(
      "field-profile", "intracavity field of one selected cavity mode");
  add_common(field);
  field->add_option("--mode-index", mode_index,
                    "resonance ordinal from the scan window");
  field->add_option("--branch", branch_str, "coupling branch: plus or minus");
  field->add_option("--parity", parity_str, "mode parity: odd or even");
  field->add_option("--lambda", lambda_sel,
                    "transmissive wavelength the branch selector refers to, nm");

  CLI11_PARSE(app, argc, argv);

  try {
    const mtmm::ExperimentConfig cfg = mtmm::load_config(config_path);
    mtmm::OutputRecord rec;
    if (spectrum->parsed()) {
      rec = mtmm::cmd_spectrum(cfg);
    } else if (transmissive->parsed()) {
      rec = mtmm::cmd_transmissive(cfg);
    } else if (couplings->parsed()) {
      rec = mtmm::cmd_couplings(cfg);
    } else {
      mtmm::ModeSelector sel;
      if (field->count("--mode-index") > 0) sel.mode_index = mode_index;
      if (!branch_str.empty()) {
        if (branch_str == "plus") {
          sel.branch = mtmm::Branch::plus;
        } else if (branch_str == "minus") {
          sel.branch = mtmm::Branch::minus;
        } else {
          throw mtmm::ConfigError("config error: --branch must be plus or minus");
        }
      }
      if (!parity_str.empty()) {
        if (parity_str == "odd") {
          sel.parity = mtmm::Parity::odd;
        } else if (parity_str == "even") {
          sel.parity = mtmm::Parity::even;
        } else {
          throw mtmm::ConfigError("config error: --parity must be odd or even");
        }
      }
      if (field->count("--lambda") > 0) sel.lambda_nm = lambda_sel;
      rec = mtmm::cmd_field_profile(cfg, sel);
    }
    write_output(rec, out_path);
  } catch (const mtmm::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
