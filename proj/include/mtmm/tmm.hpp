#ifndef MTMM_TMM_HPP
#define MTMM_TMM_HPP

// Core 2x2 transfer-matrix algebra for one-dimensional lossless optics.
//
// Convention: a state vector holds (backward, forward) amplitudes, and a
// transfer matrix M relates the state on the left of an element to the state
// on its right, left = M * right. Stacks compose by plain matrix product in
// left-to-right geometric order. All lengths are in nanometres and
// wavenumbers in rad/nm, so typical magnitudes stay near unity.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtmm {

using Complex = std::complex<double>;

// speed of light in nm/s, for converting wavenumber shifts to rad/s
inline constexpr double kSpeedOfLight = 2.99792458e17;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// |m22| below this is treated as a degenerate (non-physical) stack; this is
// an underflow guard, not a physics tolerance
inline constexpr double kDegenerateM22 = 1e-300;

struct DegenerateMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PositionRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransferMatrix {
  Complex m11{1.0, 0.0};
  Complex m12{0.0, 0.0};
  Complex m21{0.0, 0.0};
  Complex m22{1.0, 0.0};

  static TransferMatrix identity() { return TransferMatrix{}; }

  Complex det() const { return m11 * m22 - m12 * m21; }
};

struct WaveState {
  Complex backward{0.0, 0.0};
  Complex forward{0.0, 0.0};
};

struct FieldSample {
  double position = 0.0;  // nm, measured from the left edge of the stack
  Complex amplitude{0.0, 0.0};
  double intensity = 0.0;  // |amplitude|^2
};

inline TransferMatrix multiply(const TransferMatrix& a, const TransferMatrix& b) {
  return TransferMatrix{
      a.m11 * b.m11 + a.m12 * b.m21,
      a.m11 * b.m12 + a.m12 * b.m22,
      a.m21 * b.m11 + a.m22 * b.m21,
      a.m21 * b.m12 + a.m22 * b.m22,
  };
}

inline TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b) {
  return multiply(a, b);
}

inline WaveState apply(const TransferMatrix& m, const WaveState& s) {
  return WaveState{m.m11 * s.backward + m.m12 * s.forward,
                   m.m21 * s.backward + m.m22 * s.forward};
}

// free-space propagation over distance d: diag(e^{ikd}, e^{-ikd});
// negative d is the algebraic inverse and is used internally
inline TransferMatrix free_space(double k, double d) {
  const Complex ep = std::polar(1.0, k * d);
  return TransferMatrix{ep, {0.0, 0.0}, {0.0, 0.0}, 1.0 / ep};
}

// infinitely thin lossless scatterer of polarizability zeta; also the end
// mirror model
inline TransferMatrix thin_scatterer(double zeta) {
  const Complex iz{0.0, zeta};
  return TransferMatrix{1.0 + iz, iz, -iz, 1.0 - iz};
}

// single dielectric interface written as (1/tau) [[1, rho], [rho, 1]]
inline TransferMatrix interface_matrix(double rho, double tau) {
  const double inv = 1.0 / tau;
  return TransferMatrix{{inv, 0.0}, {rho * inv, 0.0}, {rho * inv, 0.0}, {inv, 0.0}};
}

// full slab of index n and thickness l: entry interface, internal propagation
// over optical length n*l, exit interface
inline TransferMatrix slab_element_matrix(double n, double l, double k) {
  const double rho = (1.0 - n) / (1.0 + n);
  const double tau_l = 2.0 / (1.0 + n);
  const double tau_r = 2.0 * n / (1.0 + n);
  return interface_matrix(rho, tau_l) * free_space(k, n * l) *
         interface_matrix(-rho, tau_r);
}

struct ReflectionTransmission {
  Complex r{0.0, 0.0};
  Complex t{0.0, 0.0};
};

inline ReflectionTransmission reflectivity_transmissivity(const TransferMatrix& m) {
  if (std::abs(m.m22) < kDegenerateM22) {
    throw DegenerateMatrixError("transfer matrix is degenerate: |m22| underflows");
  }
  return ReflectionTransmission{m.m12 / m.m22, 1.0 / m.m22};
}

// reflection for incidence from the right; convention-sensitive, see README
inline Complex reflectivity_reversed(const TransferMatrix& m) {
  if (std::abs(m.m22) < kDegenerateM22) {
    throw DegenerateMatrixError("transfer matrix is degenerate: |m22| underflows");
  }
  return -m.m21 / m.m22;
}

inline double transmittance(const TransferMatrix& m) {
  if (std::abs(m.m22) < kDegenerateM22) {
    throw DegenerateMatrixError("transfer matrix is degenerate: |m22| underflows");
  }
  const double a = std::abs(m.m22);
  return 1.0 / (a * a);
}

// ---------------------------------------------------------------------------
// Stack layout and field propagation

enum class ElementKind { gap, slab, thin_scatterer, mirror };

struct StackElement {
  ElementKind kind = ElementKind::gap;
  double length = 0.0;  // nm extent: gap or slab; zero for thin elements
  double n = 1.0;       // refractive index, slabs only
  double zeta = 0.0;    // polarizability, thin scatterers and mirrors

  static StackElement make_gap(double d) {
    return StackElement{ElementKind::gap, d, 1.0, 0.0};
  }
  static StackElement make_slab(double n, double l) {
    return StackElement{ElementKind::slab, l, n, 0.0};
  }
  static StackElement make_thin(double zeta) {
    return StackElement{ElementKind::thin_scatterer, 0.0, 1.0, zeta};
  }
  static StackElement make_mirror(double zeta) {
    return StackElement{ElementKind::mirror, 0.0, 1.0, zeta};
  }
};

struct StackLayout {
  std::vector<StackElement> elements;

  double extent() const {
    double total = 0.0;
    for (const auto& e : elements) total += e.length;
    return total;
  }
};

inline TransferMatrix element_matrix(const StackElement& e, double k) {
  switch (e.kind) {
    case ElementKind::gap:
      return free_space(k, e.length);
    case ElementKind::slab:
      return slab_element_matrix(e.n, e.length, k);
    case ElementKind::thin_scatterer:
    case ElementKind::mirror:
      return thin_scatterer(e.zeta);
  }
  return TransferMatrix::identity();
}

// left-to-right product in geometric order; kept strictly sequential so
// results are bit-reproducible across runs
inline TransferMatrix stack_matrix(const StackLayout& stack, double k) {
  TransferMatrix m = TransferMatrix::identity();
  for (const auto& e : stack.elements) m = m * element_matrix(e, k);
  return m;
}

// Field profile for a unit-amplitude forward wave incident from the left and
// no backward input at the right boundary. The right-side state is then
// (backward, forward) = (0, t) with t = 1/m22, and the state at the left edge
// of every element follows by accumulating element matrices right to left.
// Each sample reports the total field, the sum of the forward and backward
// amplitudes referenced to the sample plane; inside a slab the local
// wavenumber is n*k. The total field is continuous across every interface.
inline std::vector<FieldSample> field_profile(const StackLayout& stack, double k,
                                              const std::vector<double>& positions) {
  const std::size_t count = stack.elements.size();
  std::vector<TransferMatrix> mats(count);
  std::vector<double> left_edge(count + 1, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    mats[i] = element_matrix(stack.elements[i], k);
    left_edge[i + 1] = left_edge[i] + stack.elements[i].length;
  }
  const double total = left_edge[count];

  TransferMatrix m_tot = TransferMatrix::identity();
  for (std::size_t i = 0; i < count; ++i) m_tot = m_tot * mats[i];
  const Complex t = reflectivity_transmissivity(m_tot).t;

  // state at the left edge of element i, with states[count] the output state
  std::vector<WaveState> states(count + 1);
  states[count] = WaveState{{0.0, 0.0}, t};
  for (std::size_t i = count; i-- > 0;) {
    states[i] = apply(mats[i], states[i + 1]);
  }

  std::vector<FieldSample> out;
  out.reserve(positions.size());
  for (double x : positions) {
    if (!(x >= 0.0 && x <= total)) {
      throw PositionRangeError("field_profile: sample position " + std::to_string(x) +
                               " nm is outside the stack extent [0, " +
                               std::to_string(total) + "] nm");
    }
    // find the element containing x; zero-extent elements match only exact
    // boundary hits, where continuity makes either side equivalent
    std::size_t i = 0;
    while (i < count && !(x >= left_edge[i] && x <= left_edge[i + 1])) ++i;

    Complex amplitude;
    if (i == count) {
      // x == total past the last element: output state plane
      amplitude = states[count].backward + states[count].forward;
    } else {
      const StackElement& e = stack.elements[i];
      const double u = x - left_edge[i];
      if (e.kind == ElementKind::slab) {
        // strip the entry interface to get the internal state, then
        // propagate at the internal wavenumber n*k
        const double rho = (1.0 - e.n) / (1.0 + e.n);
        const double tau_l = 2.0 / (1.0 + e.n);
        // inverse of (1/tau)[[1, rho],[rho, 1]] is (tau/(1-rho^2))[[1, -rho],[-rho, 1]]
        const double f = tau_l / (1.0 - rho * rho);
        const WaveState& s = states[i];
        const WaveState inside{f * (s.backward - rho * s.forward),
                               f * (s.forward - rho * s.backward)};
        const Complex ep = std::polar(1.0, e.n * k * u);
        amplitude = inside.backward / ep + inside.forward * ep;
      } else {
        const WaveState& s = states[i];
        const Complex ep = std::polar(1.0, k * u);
        amplitude = s.backward / ep + s.forward * ep;
      }
    }
    out.push_back(FieldSample{x, amplitude, std::norm(amplitude)});
  }
  return out;
}

}  // namespace mtmm

#endif  // MTMM_TMM_HPP
