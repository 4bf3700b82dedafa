#ifndef MTMM_OPTOMECH_HPP
#define MTMM_OPTOMECH_HPP

// Optomechanical couplings of the membranes to the cavity field: numerical
// extraction by finite differences of the resonance wavenumber under
// per-membrane displacements, closed-form two-membrane couplings at
// transmissive wavelengths, and the comparison between the two.
//
// Couplings are quoted per unit displacement (the zero-point amplitude is
// factored out) and normalized by the single-membrane bound g = 2 omega / L.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "array.hpp"
#include "cavity.hpp"
#include "tmm.hpp"

namespace mtmm {

struct PoleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotTransmissiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CouplingResult {
  std::vector<double> g_per_membrane;  // rad/s per nm of displacement
  double g_collective = 0.0;           // sqrt(sum g_j^2), rad/s per nm
  double g_reference = 0.0;            // g = 2 omega / L, rad/s per nm
  std::vector<double> normalized;      // g_j / g
  Branch branch = Branch::unclassified;
  Parity parity = Parity::even;
  double wavelength = 0.0;  // nm
};

// closed-form couplings of the two transparency families, in units of g
struct AnalyticCoupling {
  double zeta = 0.0;
  double nu = 0.0;  // k * d_eff at the evaluation point, radians
  double d_over_L = 0.0;
  double g_plus = 0.0;
  double g_minus = 0.0;
};

// detuning function of the two-membrane array in the thin-membrane picture
inline double chi_of_nu(double zeta, double nu) {
  return 2.0 * zeta * (std::cos(nu) - zeta * std::sin(nu));
}

struct AnalyticGPair {
  double g_plus = 0.0;
  double g_minus = 0.0;
};

// g_pm / g = sqrt(2) zeta (pm sqrt(1+zeta^2) + zeta) / (1 pm 4 (d/L) zeta sqrt(1+zeta^2))
inline AnalyticGPair analytic_g_pm(double zeta, double d_over_L) {
  const double s = std::sqrt(1.0 + zeta * zeta);
  const double den_plus = 1.0 + 4.0 * d_over_L * zeta * s;
  const double den_minus = 1.0 - 4.0 * d_over_L * zeta * s;
  if (std::abs(den_minus) < 1e-12 || std::abs(den_plus) < 1e-12) {
    throw PoleError("analytic_g_pm: branch denominator vanishes at zeta = " +
                    std::to_string(zeta));
  }
  const double root2 = std::sqrt(2.0);
  return AnalyticGPair{root2 * zeta * (s + zeta) / den_plus,
                       root2 * zeta * (-s + zeta) / den_minus};
}

inline AnalyticCoupling make_analytic_coupling(double zeta, double nu, double d_over_L) {
  if (std::abs(chi_of_nu(zeta, nu)) > 1e-9) {
    throw NotTransmissiveError(
        "make_analytic_coupling: chi(nu) does not vanish at the evaluation point");
  }
  const AnalyticGPair g = analytic_g_pm(zeta, d_over_L);
  return AnalyticCoupling{zeta, nu, d_over_L, g.g_plus, g.g_minus};
}

// Resonance wavenumber response to an antisymmetric displacement of the two
// membranes, evaluated from the loaded-cavity round-trip condition:
//   dk/d(dx1) = -Im{beta - e^{i nu} alpha} / (L + 2 d dchi/dnu)
// with alpha = 2 i k zeta^2 e^{-i nu} and beta = -2 k zeta (1 - i zeta) e^{-i nu}.
// Valid only at a transmissive point, chi(nu) = 0; antisymmetry gives
// dk/d(dx2) = -dk/d(dx1).
inline double analytic_frequency_pull(double zeta, double nu, double d, double L,
                                      double k) {
  if (std::abs(chi_of_nu(zeta, nu)) > 1e-9) {
    throw NotTransmissiveError(
        "analytic_frequency_pull: chi(nu) does not vanish, not a transmissive point");
  }
  const Complex phase = std::polar(1.0, -nu);
  const Complex alpha = Complex{0.0, 2.0 * k * zeta * zeta} * phase;
  const Complex beta = -2.0 * k * zeta * Complex{1.0, -zeta} * phase;
  const double dchi_dnu = 2.0 * zeta * (-std::sin(nu) - zeta * std::cos(nu));
  const Complex num = beta - std::polar(1.0, nu) * alpha;
  return -num.imag() / (L + 2.0 * d * dchi_dnu);
}

// Per-membrane couplings by central finite differences of the resonance
// wavenumber. The step starts at 1e-6 of the wavelength and is raised
// automatically until the probed shift clears the peak-finder resolution by a
// wide margin; a half-step recomputation must then agree to 0.1%.
inline CouplingResult extract_couplings(const CavityConfig& c, const ResonanceRecord& r,
                                        double step = 0.0) {
  if (!c.array) {
    throw std::invalid_argument("extract_couplings: cavity holds no membranes");
  }
  const MembraneArray& a = *c.array;
  const int n_mem = a.count;
  const double k0 = r.k_res;
  const double lambda = 2.0 * kPi / k0;
  const double bracket = 1e-13 * k0;  // peak-finder bracket width

  double dx = (step > 0.0) ? step : 1e-6 * lambda;
  const double dx_cap = a.spacing / 8.0;

  auto peak_with = [&](int j, double delta) {
    std::vector<double> disp(static_cast<std::size_t>(n_mem), 0.0);
    disp[static_cast<std::size_t>(j)] = delta;
    return find_peak_near(c, k0, disp);
  };

  // probe on the first membrane and widen the step until the shift is
  // comfortably above the bracket resolution
  double k_plus = peak_with(0, dx);
  double k_minus = peak_with(0, -dx);
  double shift = 0.5 * std::abs(k_plus - k_minus);
  if (shift < 3e3 * bracket) {
    const double scale = 3e3 * bracket / std::max(shift, 1e-300) * 1.2;
    dx = std::min(dx * scale, dx_cap);
    k_plus = peak_with(0, dx);
    k_minus = peak_with(0, -dx);
    shift = 0.5 * std::abs(k_plus - k_minus);
    if (shift < 10.0 * bracket) {
      throw StepDegenerateError(
          "extract_couplings: resonance shift is below the finder resolution "
          "even at the largest admissible step");
    }
  }

  std::vector<double> normalized(static_cast<std::size_t>(n_mem), 0.0);
  for (int j = 0; j < n_mem; ++j) {
    const double kp = (j == 0) ? k_plus : peak_with(j, dx);
    const double km = (j == 0) ? k_minus : peak_with(j, -dx);
    normalized[static_cast<std::size_t>(j)] =
        (kp - km) / (2.0 * dx) * c.length / (2.0 * k0);
  }

  // half-step agreement check
  double g_scale = 1e-12;
  for (double g : normalized) g_scale = std::max(g_scale, std::abs(g));
  for (int j = 0; j < n_mem; ++j) {
    const double kp = peak_with(j, 0.5 * dx);
    const double km = peak_with(j, -0.5 * dx);
    const double g_half = (kp - km) / dx * c.length / (2.0 * k0);
    const double denom = std::max(std::abs(normalized[static_cast<std::size_t>(j)]),
                                  1e-3 * g_scale);
    if (std::abs(g_half - normalized[static_cast<std::size_t>(j)]) > 1e-3 * denom) {
      throw StepDegenerateError(
          "extract_couplings: half-step estimate disagrees beyond 0.1% on membrane " +
          std::to_string(j + 1));
    }
  }

  CouplingResult out;
  out.normalized = normalized;
  out.g_reference = 2.0 * kSpeedOfLight * k0 / c.length;
  out.g_per_membrane.resize(static_cast<std::size_t>(n_mem));
  double sum_sq = 0.0;
  for (int j = 0; j < n_mem; ++j) {
    const double g = normalized[static_cast<std::size_t>(j)] * out.g_reference;
    out.g_per_membrane[static_cast<std::size_t>(j)] = g;
    sum_sq += g * g;
  }
  out.g_collective = std::sqrt(sum_sq);
  out.parity = r.mode_parity;
  out.wavelength = lambda;
  return out;
}

// one member of the numeric-versus-analytic comparison at a transmissive
// wavelength; couplings are normalized by g
struct ComparisonRow {
  double wavelength = 0.0;
  Branch branch = Branch::unclassified;
  Parity parity = Parity::even;
  double g_numeric = 0.0;   // signed breathing coupling (g1 - g2)/sqrt(2), units of g
  double g_analytic = 0.0;  // matched closed-form branch value, units of g
  double rel_deviation = 0.0;  // | |g_numeric| - |g_analytic| | / |g_analytic|
  double zeta = 0.0;
  double g1 = 0.0;  // per-membrane normalized couplings
  double g2 = 0.0;
  double intensity_ratio = 0.0;  // mean intermembrane over mean outer intensity
  double tuned_length = 0.0;     // cavity length used for this member, nm
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // ordered by wavelength, then branch
  std::vector<TransmissiveWavelength> degenerate;  // excluded roots
};

namespace detail {

// mean field intensity between the two membranes and in the outer gaps
inline std::pair<double, double> inner_outer_intensity(const CavityConfig& c,
                                                       double k) {
  const MembraneArray& a = *c.array;
  const double l = a.membrane.l;
  const double d = a.spacing;
  const double left = c.left_gap();
  const int n_pts = 301;
  std::vector<double> pos;
  pos.reserve(2 * n_pts);
  for (int i = 0; i < n_pts; ++i) {
    pos.push_back(left + l + d * (0.05 + 0.9 * i / (n_pts - 1)));
  }
  for (int i = 0; i < n_pts; ++i) {
    pos.push_back(left * (0.05 + 0.9 * i / (n_pts - 1)));
  }
  const auto samples = field_profile(cavity_stack(c), k, pos);
  double inner = 0.0;
  double outer = 0.0;
  for (int i = 0; i < n_pts; ++i) inner += samples[static_cast<std::size_t>(i)].intensity;
  for (int i = n_pts; i < 2 * n_pts; ++i) {
    outer += samples[static_cast<std::size_t>(i)].intensity;
  }
  return {inner / n_pts, outer / n_pts};
}

}  // namespace detail

// Full two-membrane comparison over a wavelength window: find every
// transmissive root, place the cavity exactly on resonance at each root for
// both members of the mode pair, extract the numeric couplings, and match
// each member to a closed-form branch. The member with the enhanced
// intermembrane field carries the branch of larger magnitude. Degenerate
// roots are excluded from the comparison and reported separately.
inline ComparisonTable compare_numeric_analytic(const CavityConfig& c,
                                                double lambda_min, double lambda_max,
                                                double degeneracy_eps = 1e-3,
                                                double fd_step_fraction = 1e-6) {
  if (!c.array || c.array->count != 2) {
    throw std::invalid_argument(
        "compare_numeric_analytic: requires a two-membrane cavity");
  }
  const MembraneArray& a = *c.array;
  ComparisonTable table;

  const auto roots =
      find_transmissive_wavelengths(a, lambda_min, lambda_max, degeneracy_eps);
  for (const auto& root : roots) {
    if (root.degenerate) {
      table.degenerate.push_back(root);
      continue;
    }
    const double k_t = 2.0 * kPi / root.wavelength;
    const double zeta = root.zeta_at;
    const double phi = padding_phase(a.membrane, k_t);
    const double d_eff = a.spacing + 2.0 * phi / k_t;
    const AnalyticGPair ana = analytic_g_pm(zeta, d_eff / c.length);
    const bool plus_is_larger = std::abs(ana.g_plus) > std::abs(ana.g_minus);

    ComparisonRow member[2];
    const auto lengths = tuned_resonant_lengths(c, k_t);
    for (int i = 0; i < 2; ++i) {
      const CavityConfig tuned = c.with_length(lengths[static_cast<std::size_t>(i)]);
      ResonanceRecord r;
      r.k_res = find_peak_near(tuned, k_t);
      r.peak_transmittance = cavity_transmittance(tuned, r.k_res);
      r.mode_parity = classify_parity(tuned, r.k_res);
      const CouplingResult num =
          extract_couplings(tuned, r, fd_step_fraction * root.wavelength);
      const auto [inner, outer] = detail::inner_outer_intensity(tuned, r.k_res);

      ComparisonRow row;
      row.wavelength = root.wavelength;
      row.parity = r.mode_parity;
      row.zeta = zeta;
      row.g1 = num.normalized[0];
      row.g2 = num.normalized[1];
      row.g_numeric = (num.normalized[0] - num.normalized[1]) / std::sqrt(2.0);
      row.intensity_ratio = inner / outer;
      row.tuned_length = tuned.length;
      member[i] = row;
    }

    const bool first_enhanced = member[0].intensity_ratio > member[1].intensity_ratio;
    ComparisonRow& enhanced = first_enhanced ? member[0] : member[1];
    ComparisonRow& suppressed = first_enhanced ? member[1] : member[0];
    enhanced.branch = plus_is_larger ? Branch::plus : Branch::minus;
    enhanced.g_analytic = plus_is_larger ? ana.g_plus : ana.g_minus;
    suppressed.branch = plus_is_larger ? Branch::minus : Branch::plus;
    suppressed.g_analytic = plus_is_larger ? ana.g_minus : ana.g_plus;
    for (ComparisonRow* row : {&member[0], &member[1]}) {
      row->rel_deviation = std::abs(std::abs(row->g_numeric) - std::abs(row->g_analytic)) /
                           std::abs(row->g_analytic);
    }
    if (member[0].branch == Branch::minus) std::swap(member[0], member[1]);
    table.rows.push_back(member[0]);
    table.rows.push_back(member[1]);
  }
  return table;
}

}  // namespace mtmm

#endif  // MTMM_OPTOMECH_HPP
