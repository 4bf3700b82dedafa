#ifndef MTMM_ARRAY_HPP
#define MTMM_ARRAY_HPP

// Periodic arrays of identical membranes: assembly, transmission spectra,
// and the search for transmissive wavelengths where the array as a whole is
// perfectly transparent.
//
// For a lossless palindromic stack the transfer matrix has the form
// [[mu, i chi], [-i chi, mu*]]-like structure with a purely imaginary
// off-diagonal entry, so T = 1/|m22|^2 = 1/(1 + chi^2) with chi = Im(m12)
// real. chi changes sign at every transmissive point, which makes it the
// right function to bracket and bisect; 1 - T itself touches zero without a
// sign change and cannot be bracketed.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "membrane.hpp"
#include "tmm.hpp"

namespace mtmm {

struct InvalidRangeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ArrayModel { full_slab, thin_padded };

struct MembraneArray {
  SlabMembrane membrane;
  int count = 1;         // number of membranes, >= 1
  double spacing = 0.0;  // surface-to-surface vacuum gap d in nm, > 0
  ArrayModel model = ArrayModel::full_slab;

  MembraneArray(SlabMembrane membrane_, int count_, double spacing_,
                ArrayModel model_ = ArrayModel::full_slab)
      : membrane(membrane_), count(count_), spacing(spacing_), model(model_) {
    if (count < 1) {
      throw std::invalid_argument("MembraneArray: count must be >= 1");
    }
    if (!(spacing > 0.0)) {
      throw std::invalid_argument("MembraneArray: spacing must be > 0");
    }
  }

  // geometric footprint of the physical array; the thin-padded model is a
  // drop-in matrix replacement and occupies the same footprint
  double extent() const {
    return count * membrane.l + (count - 1) * spacing;
  }
};

enum class Branch { plus, minus, unclassified };

struct TransmissiveWavelength {
  double wavelength = 0.0;  // nm
  Branch branch = Branch::unclassified;
  double zeta_at = 0.0;     // membrane polarizability at this wavelength
  bool degenerate = false;  // |zeta| below the degeneracy threshold
};

// alternating product of N membrane matrices and N-1 gap propagations
inline TransferMatrix array_matrix(const MembraneArray& a, double k) {
  const TransferMatrix mm = (a.model == ArrayModel::full_slab)
                                ? slab_matrix(a.membrane, k)
                                : padded_thin_matrix(a.membrane, k);
  TransferMatrix m = mm;
  const TransferMatrix gap = free_space(k, a.spacing);
  for (int i = 1; i < a.count; ++i) m = m * gap * mm;
  return m;
}

inline double array_transmittance(const MembraneArray& a, double lambda) {
  return transmittance(array_matrix(a, 2.0 * kPi / lambda));
}

// Im(m12) of the array matrix; real-valued detuning function whose zeros are
// the transmissive wavelengths (Re(m12) vanishes for these palindromic
// lossless stacks)
inline double array_chi(const MembraneArray& a, double lambda) {
  return array_matrix(a, 2.0 * kPi / lambda).m12.imag();
}

inline std::vector<std::pair<double, double>> transmittance_spectrum(
    const MembraneArray& a, double lambda_min, double lambda_max, int samples) {
  if (!(lambda_min > 0.0) || !(lambda_min < lambda_max)) {
    throw InvalidRangeError("transmittance_spectrum: need 0 < lambda_min < lambda_max");
  }
  if (samples < 2) {
    throw InvalidRangeError("transmittance_spectrum: need samples >= 2");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(samples));
  const double step = (lambda_max - lambda_min) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double lambda = lambda_min + step * i;
    out.emplace_back(lambda, array_transmittance(a, lambda));
  }
  return out;
}

namespace detail {

// bisect chi to machine precision inside a sign-change bracket; the final
// bracket width is far below the 1e-9 nm contract
inline double bisect_chi(const MembraneArray& a, double lo, double hi, double f_lo) {
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // ulp-level bracket reached
    const double f_mid = array_chi(a, mid);
    if (f_lo * f_mid <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  return 0.5 * (lo + hi);
}

// classification of a two-membrane root against the analytic transparency
// families: with nu = k d + 2 phi the root satisfies cos nu = -zeta/sqrt(1+zeta^2)
// (plus family) or cos nu = +zeta/sqrt(1+zeta^2) (minus family)
inline Branch classify_branch(const MembraneArray& a, double lambda, double zeta) {
  const double k = 2.0 * kPi / lambda;
  const double nu = k * a.spacing + 2.0 * padding_phase(a.membrane, k);
  const double target = zeta / std::hypot(1.0, zeta);
  const double res_plus = std::abs(std::cos(nu) + target);
  const double res_minus = std::abs(std::cos(nu) - target);
  return (res_plus < res_minus) ? Branch::plus : Branch::minus;
}

}  // namespace detail

// Locate all wavelengths of unity transmission in (lambda_min, lambda_max) by
// bracketing sign changes of chi on a uniform grid (20000 samples per decade)
// and bisecting each bracket. Cells that come close to transparency without a
// visible sign change (|1-T| < 1e-3 at an endpoint) are subdivided to catch
// root pairs sharing a cell. Two-membrane roots are cross-checked against the
// analytic families and labeled plus/minus; roots with |zeta| < degeneracy_eps
// are flagged degenerate and left unclassified.
inline std::vector<TransmissiveWavelength> find_transmissive_wavelengths(
    const MembraneArray& a, double lambda_min, double lambda_max,
    double degeneracy_eps = 1e-3) {
  if (!(lambda_min > 0.0) || !(lambda_min < lambda_max)) {
    throw InvalidRangeError(
        "find_transmissive_wavelengths: need 0 < lambda_min < lambda_max");
  }

  const double decades = std::log10(lambda_max / lambda_min);
  const int samples = std::max(64, static_cast<int>(std::ceil(20000.0 * decades)) + 1);
  const double step = (lambda_max - lambda_min) / (samples - 1);

  std::vector<double> grid(static_cast<std::size_t>(samples));
  std::vector<double> chi(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    grid[i] = lambda_min + step * i;
    chi[i] = array_chi(a, grid[i]);
  }

  std::vector<double> roots;
  auto scan_cell = [&](double lo, double hi, double f_lo, double f_hi, int depth,
                       auto&& self) -> void {
    if (f_lo == 0.0) {
      if (lo > lambda_min) roots.push_back(lo);
      return;
    }
    if (f_lo * f_hi < 0.0) {
      roots.push_back(detail::bisect_chi(a, lo, hi, f_lo));
      return;
    }
    if (depth <= 0) return;
    // near-transparent cell without a sign change: refine to expose possible
    // paired roots
    const double t_lo = 1.0 / (1.0 + f_lo * f_lo);
    const double t_hi = 1.0 / (1.0 + f_hi * f_hi);
    if (std::max(t_lo, t_hi) < 1.0 - 1e-3) return;
    const int pieces = 8;
    double x0 = lo;
    double v0 = f_lo;
    for (int j = 1; j <= pieces; ++j) {
      const double x1 = (j == pieces) ? hi : lo + (hi - lo) * j / pieces;
      const double v1 = (j == pieces) ? f_hi : array_chi(a, x1);
      self(x0, x1, v0, v1, depth - 1, self);
      x0 = x1;
      v0 = v1;
    }
  };
  for (int i = 0; i + 1 < samples; ++i) {
    scan_cell(grid[i], grid[i + 1], chi[i], chi[i + 1], 2, scan_cell);
  }
  if (chi.back() == 0.0 && grid.back() < lambda_max) {
    // endpoint roots on the upper boundary are excluded by the open-interval
    // convention, same as the lower one; nothing to do
  }

  std::vector<TransmissiveWavelength> out;
  out.reserve(roots.size());
  for (double lambda : roots) {
    if (!(lambda > lambda_min && lambda < lambda_max)) continue;
    TransmissiveWavelength tw;
    tw.wavelength = lambda;
    tw.zeta_at = polarizability(a.membrane, 2.0 * kPi / lambda);
    tw.degenerate = std::abs(tw.zeta_at) < degeneracy_eps;
    if (a.count == 2 && !tw.degenerate) {
      tw.branch = detail::classify_branch(a, lambda, tw.zeta_at);
    }
    out.push_back(tw);
  }
  return out;
}

}  // namespace mtmm

#endif  // MTMM_ARRAY_HPP
