#ifndef MTMM_CAVITY_HPP
#define MTMM_CAVITY_HPP

// Symmetric Fabry-Perot cavity with a membrane array at its center: assembly
// with per-membrane displacements, mirror strength from finesse, resonance
// search in wavenumber at fixed length, mode parity, and helpers for placing
// the cavity exactly on resonance at a chosen wavenumber.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "array.hpp"
#include "tmm.hpp"

namespace mtmm {

struct InvalidFinesseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClassificationConflictError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrackingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Parity { even, odd };

inline const char* to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

// Solve pi sqrt(R)/(1-R) = F for the mirror intensity reflectance R, then
// convert to the thin-scatterer polarizability zeta_c = sqrt(R/(1-R)).
// The quadratic in sqrt(R) gives sqrt(R) = (-pi + sqrt(pi^2 + 4F^2))/(2F).
inline double mirror_zeta_from_finesse(double finesse) {
  if (!(finesse > 1.0)) {
    throw InvalidFinesseError("mirror_zeta_from_finesse: finesse must be > 1");
  }
  const double sqrt_r =
      (-kPi + std::sqrt(kPi * kPi + 4.0 * finesse * finesse)) / (2.0 * finesse);
  const double r = sqrt_r * sqrt_r;
  return std::sqrt(r / (1.0 - r));
}

// exact inverse of the above: F = pi zeta_c sqrt(1 + zeta_c^2)
inline double finesse_from_mirror_zeta(double zeta_c) {
  return kPi * zeta_c * std::sqrt(1.0 + zeta_c * zeta_c);
}

struct CavityConfig {
  double length = 0.0;       // end-mirror to end-mirror distance L in nm
  double mirror_zeta = 0.0;  // end-mirror polarizability zeta_c
  std::optional<double> finesse;  // set when built from a finesse value
  std::optional<MembraneArray> array;
  double array_center_offset = 0.0;  // nm, positive moves the array right

  static CavityConfig with_finesse(double length, double finesse,
                                   std::optional<MembraneArray> array = std::nullopt,
                                   double array_center_offset = 0.0) {
    CavityConfig c;
    c.length = length;
    c.finesse = finesse;
    c.mirror_zeta = mirror_zeta_from_finesse(finesse);
    c.array = std::move(array);
    c.array_center_offset = array_center_offset;
    c.validate();
    return c;
  }

  static CavityConfig with_mirror_zeta(double length, double mirror_zeta,
                                       std::optional<MembraneArray> array = std::nullopt,
                                       double array_center_offset = 0.0) {
    CavityConfig c;
    c.length = length;
    c.mirror_zeta = mirror_zeta;
    c.array = std::move(array);
    c.array_center_offset = array_center_offset;
    c.validate();
    return c;
  }

  CavityConfig with_length(double new_length) const {
    CavityConfig c = *this;
    c.length = new_length;
    c.validate();
    return c;
  }

  double array_extent() const { return array ? array->extent() : 0.0; }

  // gap between the left mirror and the array front face
  double left_gap() const {
    return 0.5 * (length - array_extent()) + array_center_offset;
  }

  double right_gap() const {
    return 0.5 * (length - array_extent()) - array_center_offset;
  }

  // optical path length at equilibrium, used for the ordinal mode index
  double optical_length() const {
    if (!array) return length;
    return length + array->count * array->membrane.l * (array->membrane.n - 1.0);
  }

  // effective finesse for linewidth estimates, exact when built from finesse
  double effective_finesse() const {
    return finesse ? *finesse : finesse_from_mirror_zeta(mirror_zeta);
  }

  void validate() const {
    if (!(length > 0.0)) {
      throw std::invalid_argument("CavityConfig: length must be > 0");
    }
    if (!(mirror_zeta > 0.0)) {
      throw std::invalid_argument("CavityConfig: mirror zeta must be > 0");
    }
    if (array && !(length > 10.0 * array->extent())) {
      throw std::invalid_argument(
          "CavityConfig: length must exceed 10x the array extent");
    }
    if (!(left_gap() > 0.0) || !(right_gap() > 0.0)) {
      throw std::invalid_argument(
          "CavityConfig: array offset pushes the array outside the cavity");
    }
  }
};

struct ResonanceRecord {
  double k_res = 0.0;  // rad/nm
  Parity mode_parity = Parity::even;
  double peak_transmittance = 0.0;
  int index = 0;  // ordinal within the scan window, ascending in k
};

// Stack for the cavity with membrane j displaced by delta_x[j] (positive
// toward the right mirror). Displacing a membrane lengthens the gap on its
// left and shortens the one on its right, so the total length is invariant.
inline StackLayout cavity_stack(const CavityConfig& c,
                                const std::vector<double>& displacements = {}) {
  StackLayout stack;
  stack.elements.push_back(StackElement::make_mirror(c.mirror_zeta));
  if (!c.array) {
    if (!displacements.empty()) {
      throw GeometryError("cavity_stack: displacements given for an empty cavity");
    }
    stack.elements.push_back(StackElement::make_gap(c.length));
    stack.elements.push_back(StackElement::make_mirror(c.mirror_zeta));
    return stack;
  }

  const MembraneArray& a = *c.array;
  const int n_mem = a.count;
  std::vector<double> dx(displacements);
  if (dx.empty()) dx.assign(static_cast<std::size_t>(n_mem), 0.0);
  if (static_cast<int>(dx.size()) != n_mem) {
    throw GeometryError("cavity_stack: displacement count does not match membranes");
  }
  for (double v : dx) {
    if (!(std::abs(v) < 0.5 * a.spacing)) {
      throw GeometryError("cavity_stack: displacement exceeds half the gap");
    }
  }

  std::vector<double> gaps(static_cast<std::size_t>(n_mem) + 1);
  gaps.front() = c.left_gap() + dx.front();
  for (int j = 1; j < n_mem; ++j) gaps[j] = a.spacing - dx[j - 1] + dx[j];
  gaps.back() = c.right_gap() - dx.back();
  for (double g : gaps) {
    if (!(g > 0.0)) {
      throw GeometryError("cavity_stack: a gap collapsed to non-positive length");
    }
  }

  stack.elements.push_back(StackElement::make_gap(gaps[0]));
  for (int j = 0; j < n_mem; ++j) {
    stack.elements.push_back(StackElement::make_slab(a.membrane.n, a.membrane.l));
    stack.elements.push_back(StackElement::make_gap(gaps[j + 1]));
  }
  stack.elements.push_back(StackElement::make_mirror(c.mirror_zeta));
  return stack;
}

inline TransferMatrix cavity_matrix(const CavityConfig& c, double k,
                                    const std::vector<double>& displacements = {}) {
  return stack_matrix(cavity_stack(c, displacements), k);
}

inline double cavity_transmittance(const CavityConfig& c, double k,
                                   const std::vector<double>& displacements = {}) {
  return transmittance(cavity_matrix(c, k, displacements));
}

namespace detail {

// golden-section maximization of f on [a, b] down to interval width tol
template <typename F>
double golden_max(F&& f, double a, double b, double tol) {
  constexpr double gr = 0.6180339887498948482;  // (sqrt(5)-1)/2
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Refine the transmittance peak nearest k_guess. The search window spans
// +-halfwidth linewidths; a coarse scan locates the maximum and golden-section
// search narrows it to a bracket of 1e-13 * k_guess. If the coarse maximum
// sits on the window edge the peak has escaped and tracking fails.
inline double find_peak_near(const CavityConfig& c, double k_guess,
                             const std::vector<double>& displacements = {},
                             double halfwidth_linewidths = 6.0) {
  const double linewidth = (kPi / c.length) / c.effective_finesse();
  const double half = halfwidth_linewidths * linewidth;
  const int npts = 400;
  const double lo = k_guess - half;
  const double hi = k_guess + half;
  const double step = (hi - lo) / (npts - 1);
  int best = 0;
  double best_t = -1.0;
  for (int i = 0; i < npts; ++i) {
    const double t = cavity_transmittance(c, lo + step * i, displacements);
    if (t > best_t) {
      best_t = t;
      best = i;
    }
  }
  if (best == 0 || best == npts - 1) {
    throw TrackingError("find_peak_near: peak left the search window around k = " +
                        std::to_string(k_guess));
  }
  auto f = [&](double k) { return cavity_transmittance(c, k, displacements); };
  return detail::golden_max(f, lo + step * (best - 1), lo + step * (best + 1),
                            1e-13 * k_guess);
}

// Mode parity from two independent classifiers that must agree: the ordinal
// mode index m = round(k L_opt / pi) with L_opt the equilibrium optical path
// (odd m puts an antinode at the cavity center), and the measured field at
// the center (antinode versus node against the local quarter-wave scan).
inline Parity classify_parity(const CavityConfig& c, double k_res) {
  const double l_opt = c.optical_length();
  const long long m = std::llround(k_res * l_opt / kPi);
  const Parity by_index = (m % 2 != 0) ? Parity::odd : Parity::even;

  const StackLayout stack = cavity_stack(c);
  const double center = 0.5 * c.length;
  const double lambda = 2.0 * kPi / k_res;
  std::vector<double> probes;
  const int n_probe = 33;
  for (int i = 0; i < n_probe; ++i) {
    probes.push_back(center - 0.25 * lambda + 0.5 * lambda * i / (n_probe - 1));
  }
  probes.push_back(center);
  const auto samples = field_profile(stack, k_res, probes);
  double local_max = 0.0;
  for (int i = 0; i < n_probe; ++i) {
    local_max = std::max(local_max, std::sqrt(samples[i].intensity));
  }
  const double at_center = std::sqrt(samples.back().intensity);
  const bool antinode = at_center > 0.5 * local_max;
  const Parity by_field = antinode ? Parity::odd : Parity::even;

  if (by_field != by_index) {
    throw ClassificationConflictError(
        "classify_parity: index and field-symmetry classifiers disagree at k = " +
        std::to_string(k_res));
  }
  return by_index;
}

// All transmittance maxima with T > 0.5 * max in [k_center - window/2,
// k_center + window/2]; the window must span at least two free spectral
// ranges. Coarse sampling at a quarter linewidth, golden-section refinement.
inline std::vector<ResonanceRecord> find_resonances(const CavityConfig& c,
                                                    double k_center, double window) {
  const double fsr = kPi / c.length;
  if (!(window >= 2.0 * fsr)) {
    throw InvalidRangeError(
        "find_resonances: window must cover at least two free spectral ranges");
  }
  const double linewidth = fsr / c.effective_finesse();
  const double lo = k_center - 0.5 * window;
  const double hi = k_center + 0.5 * window;
  const int npts =
      std::max(64, static_cast<int>(std::ceil((hi - lo) / (0.25 * linewidth))) + 1);
  const double step = (hi - lo) / (npts - 1);

  std::vector<double> t(static_cast<std::size_t>(npts));
  for (int i = 0; i < npts; ++i) t[i] = cavity_transmittance(c, lo + step * i);
  const double t_max = *std::max_element(t.begin(), t.end());

  std::vector<ResonanceRecord> out;
  auto f = [&](double k) { return cavity_transmittance(c, k); };
  for (int i = 1; i + 1 < npts; ++i) {
    if (t[i] > t[i - 1] && t[i] > t[i + 1] && t[i] > 0.5 * t_max) {
      const double k_res = detail::golden_max(f, lo + step * (i - 1),
                                              lo + step * (i + 1), 1e-13 * k_center);
      ResonanceRecord r;
      r.k_res = k_res;
      r.peak_transmittance = f(k_res);
      r.index = static_cast<int>(out.size());
      r.mode_parity = classify_parity(c, k_res);
      out.push_back(r);
    }
  }
  return out;
}

// The two cavity lengths nearest the configured one that are exactly resonant
// at wavenumber k_t. When the array is transparent at k_t with transmission
// phase theta, the resonance condition for the loaded symmetric cavity is
//   k_t (L - extent) + theta = arctan(1/zeta_c) + m pi,
// so consecutive m give the two lengths, one per mode parity.
inline std::array<double, 2> tuned_resonant_lengths(const CavityConfig& c, double k_t) {
  double theta = 0.0;
  double ext = 0.0;
  if (c.array) {
    const TransferMatrix m = array_matrix(*c.array, k_t);
    theta = std::arg(reflectivity_transmissivity(m).t);
    ext = c.array->extent();
  }
  const double base = std::atan2(1.0, c.mirror_zeta);
  const double m_frac = (k_t * (c.length - ext) + theta - base) / kPi;
  const double m0 = std::floor(m_frac);
  std::array<double, 4> candidates{};
  for (int i = 0; i < 4; ++i) {
    const double mi = m0 - 1.0 + i;
    candidates[static_cast<std::size_t>(i)] = (base + mi * kPi - theta) / k_t + ext;
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](double x, double y) { return std::abs(x - c.length) < std::abs(y - c.length); });
  return {candidates[0], candidates[1]};
}

}  // namespace mtmm

#endif  // MTMM_CAVITY_HPP
