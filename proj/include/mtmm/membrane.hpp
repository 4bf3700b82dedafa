#ifndef MTMM_MEMBRANE_HPP
#define MTMM_MEMBRANE_HPP

// Two models of a dielectric membrane and their exact matrix equivalence.
//
// A membrane of index n and thickness l can be written either as a full slab
// (interface, internal propagation, interface) or as an infinitely thin
// scatterer of polarizability zeta padded on both sides by a free-space
// phase phi. With zeta = (n^2-1)/(2n) sin(knl) and the padding phase chosen
// below, the two transfer matrices are equal element-wise, so every external
// field computed from one model is identical in the other.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tmm.hpp"

namespace mtmm {

struct SlabMembrane {
  double n = 1.0;  // refractive index, real and >= 1
  double l = 0.0;  // thickness in nm, > 0

  SlabMembrane(double n_, double l_) : n(n_), l(l_) {
    if (!(n >= 1.0)) {
      throw std::invalid_argument("SlabMembrane: refractive index must be >= 1");
    }
    if (!(l > 0.0)) {
      throw std::invalid_argument("SlabMembrane: thickness must be > 0");
    }
  }
};

struct ThinMembrane {
  double zeta = 0.0;           // dimensionless polarizability
  double padding_phase = 0.0;  // radians, >= 0
};

// amplitude coefficients of the two faces of a slab; the left and right
// interface reflections differ only in sign
struct FresnelPair {
  double rho = 0.0;    // left-face amplitude reflection (1-n)/(1+n)
  double tau_l = 0.0;  // transmission entering the slab
  double tau_r = 0.0;  // transmission leaving the slab

  static FresnelPair from_index(double n) {
    return FresnelPair{(1.0 - n) / (1.0 + n), 2.0 / (1.0 + n), 2.0 * n / (1.0 + n)};
  }
};

inline TransferMatrix slab_matrix(const SlabMembrane& m, double k) {
  return slab_element_matrix(m.n, m.l, k);
}

// zeta = (n^2 - 1)/(2n) sin(knl); equals -i r/t of the slab and is purely
// real for a lossless membrane
inline double polarizability(const SlabMembrane& m, double k) {
  return (m.n * m.n - 1.0) / (2.0 * m.n) * std::sin(k * m.n * m.l);
}

// Padding phase phi making the padded thin model equal the slab model. The
// equivalence condition is e^{2i phi} = (1 - i zeta) t_m with t_m the slab
// transmissivity. Writing t_m = (1 - rho^2) e^{iknl} / (1 - rho^2 e^{2iknl})
// gives
//   2 phi = knl + arg[(1 - i zeta) / (1 - rho^2 e^{2iknl})],
// and the argument on the right lies strictly inside (-pi, pi) because each
// factor contributes strictly less than pi/2, so the principal value unwraps
// the phase exactly. phi is continuous in both k and l, grows by pi per full
// wave of optical thickness, and interpolates between half the geometric
// thickness (weak membrane) and half the optical thickness (half-wave
// resonance) in units of 1/k.
inline double padding_phase(const SlabMembrane& m, double k) {
  const double knl = k * m.n * m.l;
  const double rho = (1.0 - m.n) / (1.0 + m.n);
  const Complex denom = 1.0 - rho * rho * std::polar(1.0, 2.0 * knl);
  const Complex w = Complex{1.0, -polarizability(m, k)} / denom;
  return 0.5 * (knl + std::arg(w));
}

inline ThinMembrane thin_equivalent(const SlabMembrane& m, double k) {
  return ThinMembrane{polarizability(m, k), padding_phase(m, k)};
}

// without padding: the bare thin-scatterer matrix; with padding: the same
// matrix sandwiched between free-space propagations of phase phi on each side
inline TransferMatrix thin_matrix(const ThinMembrane& t, double k, bool include_padding) {
  const TransferMatrix core = thin_scatterer(t.zeta);
  if (!include_padding) return core;
  const TransferMatrix pad = free_space(k, t.padding_phase / k);
  return pad * core * pad;
}

inline TransferMatrix padded_thin_matrix(const SlabMembrane& m, double k) {
  return thin_matrix(thin_equivalent(m, k), k, true);
}

// maximum element-wise deviation between the slab matrix and the padded thin
// matrix; the equivalence contract keeps this below 1e-12 everywhere
inline double verify_equivalence(const SlabMembrane& m, double k) {
  const TransferMatrix a = slab_matrix(m, k);
  const TransferMatrix b = padded_thin_matrix(m, k);
  double worst = 0.0;
  worst = std::max(worst, std::abs(a.m11 - b.m11));
  worst = std::max(worst, std::abs(a.m12 - b.m12));
  worst = std::max(worst, std::abs(a.m21 - b.m21));
  worst = std::max(worst, std::abs(a.m22 - b.m22));
  return worst;
}

}  // namespace mtmm

#endif  // MTMM_MEMBRANE_HPP
