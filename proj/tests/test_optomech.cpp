#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <mtmm/optomech.hpp>

using namespace mtmm;

namespace {

MembraneArray paper_array(int count) {
  return MembraneArray(SlabMembrane(2.0, 100.0), count, 9000.0);
}

CavityConfig paper_cavity(int count) {
  return CavityConfig::with_finesse(5.0e6, 3000.0, paper_array(count));
}

// resonance record of the tuned cavity sitting exactly on the transmissive
// wavenumber k_t; parity picks which of the two adjacent tuned lengths is used
struct TunedMode {
  CavityConfig cavity;
  ResonanceRecord record;
};

TunedMode tuned_mode(const CavityConfig& c, double k_t, Parity parity) {
  const auto lengths = tuned_resonant_lengths(c, k_t);
  for (double length : lengths) {
    const CavityConfig tuned = c.with_length(length);
    const double k_res = find_peak_near(tuned, k_t);
    const Parity p = classify_parity(tuned, k_res);
    if (p == parity) {
      return TunedMode{tuned,
                       ResonanceRecord{k_res, p, cavity_transmittance(tuned, k_res), 0}};
    }
  }
  throw std::logic_error("tuned_mode: requested parity not found");
}

}  // namespace

TEST_CASE("closed-form branch couplings at frozen points") {
  const AnalyticGPair zero = analytic_g_pm(0.0, 0.0018);
  CHECK(zero.g_plus == 0.0);
  CHECK(zero.g_minus == 0.0);

  const AnalyticGPair a = analytic_g_pm(0.5, 0.0018);
  CHECK(a.g_plus == doctest::Approx(1.139536260660376).epsilon(1e-14));
  CHECK(a.g_minus == doctest::Approx(-0.43878208828691506).epsilon(1e-14));

  const AnalyticGPair b = analytic_g_pm(-1.2, 0.0018);
  CHECK(b.g_plus == doctest::Approx(-0.6228248275883967).epsilon(1e-14));
  CHECK(b.g_minus == doctest::Approx(4.624935528644945).epsilon(1e-14));

  // the plus branch carries the sign of zeta and the minus branch opposes it
  for (double z : {-2.0, -0.3, 0.4, 1.7}) {
    const AnalyticGPair g = analytic_g_pm(z, 0.0018);
    CHECK(g.g_plus * z > 0.0);
    CHECK(g.g_minus * z < 0.0);
  }
}

TEST_CASE("closed-form couplings approach their large-zeta limits") {
  const AnalyticGPair g = analytic_g_pm(30.0, 0.0);
  CHECK(g.g_plus == doctest::Approx(2.0 * std::sqrt(2.0) * 900.0).epsilon(5e-4));
  CHECK(g.g_minus == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(5e-4));
}

TEST_CASE("pole of the minus branch denominator is reported") {
  // 4 (d/L) zeta sqrt(1+zeta^2) = 1 exactly at zeta = 1, d/L = 1/(4 sqrt 2)
  CHECK_THROWS_AS(analytic_g_pm(1.0, 1.0 / (4.0 * std::sqrt(2.0))), PoleError);
  CHECK_NOTHROW(analytic_g_pm(1.0, 0.9 / (4.0 * std::sqrt(2.0))));
}

TEST_CASE("detuning function vanishes on both transparency families") {
  for (double z : {-1.5, -0.44, 0.25, 0.8, 2.0}) {
    // both families satisfy tan nu = 1/zeta, pi apart
    const double nu_minus = std::atan2(1.0, z);
    const double nu_plus = nu_minus + kPi;
    CHECK(std::abs(chi_of_nu(z, nu_minus)) < 1e-14);
    CHECK(std::abs(chi_of_nu(z, nu_plus)) < 1e-14);
    // family labels follow the sign of cos nu against zeta
    CHECK(std::cos(nu_minus) * z >= 0.0);
    CHECK(std::cos(nu_plus) * z <= 0.0);
    // off the families chi does not vanish
    CHECK(std::abs(chi_of_nu(z, nu_minus + 0.3)) > 1e-3);
  }
  CHECK_THROWS_AS(make_analytic_coupling(0.5, 0.3, 0.0018), NotTransmissiveError);
  CHECK_NOTHROW(make_analytic_coupling(0.5, std::atan2(1.0, 0.5), 0.0018));
}

TEST_CASE("frequency pull identity reproduces the closed forms") {
  // the breathing-mode coupling assembled from the round-trip frequency pull
  // must match the closed-form branch values at every transmissive point
  const double d = 9000.0;
  const double L = 5.0e6;
  const double k = 2.0 * kPi / 500.0;
  double worst = 0.0;
  for (double z : {-3.0, -1.1, -0.44, -0.05, 0.2, 0.75, 1.9, 4.0}) {
    const double nu_minus = std::atan2(1.0, z);
    const double nu_plus = nu_minus + kPi;
    const AnalyticGPair g = analytic_g_pm(z, d / L);

    const double from_pull_minus =
        analytic_frequency_pull(z, nu_minus, d, L, k) * L / (std::sqrt(2.0) * k);
    const double from_pull_plus =
        analytic_frequency_pull(z, nu_plus, d, L, k) * L / (std::sqrt(2.0) * k);
    worst = std::max(worst, std::abs(from_pull_minus - g.g_minus));
    worst = std::max(worst, std::abs(from_pull_plus - g.g_plus));
  }
  CHECK(worst < 1e-10);

  CHECK_THROWS_AS(analytic_frequency_pull(0.5, 0.3, d, L, 0.0126), NotTransmissiveError);
}

TEST_CASE("extracted couplings at a frozen transmissive point") {
  const double lambda_t = 503.62750280080945;
  const double k_t = 2.0 * kPi / lambda_t;
  const CavityConfig c = paper_cavity(2);

  // the even member of this pair is the enhanced plus-branch mode
  const TunedMode even = tuned_mode(c, k_t, Parity::even);
  const CouplingResult g_even = extract_couplings(even.cavity, even.record);
  REQUIRE(g_even.normalized.size() == 2);
  // breathing pair: equal magnitude, opposite sign
  CHECK(std::abs(g_even.normalized[0] + g_even.normalized[1]) <
        1e-4 * std::abs(g_even.normalized[0]));
  const double breathing_even =
      (g_even.normalized[0] - g_even.normalized[1]) / std::sqrt(2.0);
  CHECK(breathing_even == doctest::Approx(0.987080700071508).epsilon(1e-6));
  CHECK(g_even.g_collective ==
        doctest::Approx(std::abs(breathing_even) * g_even.g_reference).epsilon(1e-9));
  CHECK(g_even.wavelength == doctest::Approx(lambda_t).epsilon(1e-9));
  // g = 2 omega / L with omega = c k
  CHECK(g_even.g_reference ==
        doctest::Approx(2.0 * kSpeedOfLight * even.record.k_res / even.cavity.length)
            .epsilon(1e-12));

  const TunedMode odd = tuned_mode(c, k_t, Parity::odd);
  const CouplingResult g_odd = extract_couplings(odd.cavity, odd.record);
  const double breathing_odd =
      (g_odd.normalized[0] - g_odd.normalized[1]) / std::sqrt(2.0);
  CHECK(breathing_odd == doctest::Approx(-0.4128600915936225).epsilon(1e-6));
}

TEST_CASE("explicit finite-difference steps agree with the automatic one") {
  const double lambda_t = 503.62750280080945;
  const double k_t = 2.0 * kPi / lambda_t;
  const TunedMode mode = tuned_mode(paper_cavity(2), k_t, Parity::even);
  const CouplingResult auto_step = extract_couplings(mode.cavity, mode.record);
  const CouplingResult big_step = extract_couplings(mode.cavity, mode.record, 0.1);
  CHECK(big_step.normalized[0] ==
        doctest::Approx(auto_step.normalized[0]).epsilon(1e-3));
  CHECK(big_step.normalized[1] ==
        doctest::Approx(auto_step.normalized[1]).epsilon(1e-3));
}

TEST_CASE("degenerate transparency points cannot be probed") {
  // at the half-wave resonance the membranes decouple from the field and the
  // resonance does not respond to displacement at any usable step
  const double k_t = 2.0 * kPi / 400.0;
  const CavityConfig c = paper_cavity(2);
  const TunedMode mode = tuned_mode(c, k_t, Parity::even);
  CHECK_THROWS_AS(extract_couplings(mode.cavity, mode.record), StepDegenerateError);
}

TEST_CASE("extraction requires an array") {
  const CavityConfig bare = CavityConfig::with_finesse(5.0e6, 3000.0);
  CHECK_THROWS_AS(extract_couplings(bare, ResonanceRecord{0.0126, Parity::even, 1.0, 0}),
                  std::invalid_argument);
}

TEST_CASE("numeric to analytic comparison over a frozen window") {
  const CavityConfig c = paper_cavity(2);
  const ComparisonTable table = compare_numeric_analytic(c, 490.0, 540.0);
  CHECK(table.degenerate.empty());
  REQUIRE(table.rows.size() == 8);

  const double lambdas[4] = {490.22528967484584, 503.62750280080945,
                             517.7931630864177, 532.7890919292031};
  const double g_plus[4] = {0.8621224335278317, 0.987080700071508,
                            1.1129646440935954, 1.2382117596325435};
  const double g_minus[4] = {-0.389248782734401, -0.4128600915936225,
                             -0.43334912712234624, -0.4511265431425552};
  const double g_plus_ana[4] = {0.8612879968689623, 0.9860654646602396,
                                1.1117916167992843, 1.2368634058716832};

  for (int i = 0; i < 4; ++i) {
    const ComparisonRow& plus = table.rows[static_cast<std::size_t>(2 * i)];
    const ComparisonRow& minus = table.rows[static_cast<std::size_t>(2 * i + 1)];
    CHECK(plus.branch == Branch::plus);
    CHECK(minus.branch == Branch::minus);
    CHECK(plus.wavelength == doctest::Approx(lambdas[i]).epsilon(1e-12));
    CHECK(minus.wavelength == doctest::Approx(lambdas[i]).epsilon(1e-12));
    CHECK(plus.g_numeric == doctest::Approx(g_plus[i]).epsilon(1e-6));
    CHECK(minus.g_numeric == doctest::Approx(g_minus[i]).epsilon(1e-6));
    CHECK(plus.g_analytic == doctest::Approx(g_plus_ana[i]).epsilon(1e-9));
    CHECK(plus.rel_deviation < 0.01);
    CHECK(minus.rel_deviation < 0.01);

    // pair members sit on opposite-parity modes of the same wavelength
    CHECK(plus.parity != minus.parity);
    // the enhanced intermembrane field belongs to the stronger coupling
    CHECK(plus.intensity_ratio > 1.0);
    CHECK(minus.intensity_ratio < 1.0);
    CHECK(std::abs(plus.g_numeric) > std::abs(minus.g_numeric));
    // both members were measured on a cavity retuned within one wavelength
    CHECK(std::abs(plus.tuned_length - c.length) < lambdas[i]);
    CHECK(std::abs(minus.tuned_length - c.length) < lambdas[i]);
  }

  // the field buildup of the enhanced member follows (|z| + sqrt(1+z^2))^2
  const ComparisonRow& mid = table.rows[2];
  const double z = std::abs(mid.zeta);
  const double buildup = (z + std::sqrt(1.0 + z * z)) * (z + std::sqrt(1.0 + z * z));
  CHECK(mid.intensity_ratio == doctest::Approx(buildup).epsilon(0.15));

  // parity of the enhanced member alternates from one root to the next
  for (int i = 1; i < 4; ++i) {
    CHECK(table.rows[static_cast<std::size_t>(2 * i)].parity !=
          table.rows[static_cast<std::size_t>(2 * (i - 1))].parity);
  }
}

TEST_CASE("comparison requires exactly two membranes") {
  CHECK_THROWS_AS(compare_numeric_analytic(paper_cavity(4), 490.0, 540.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(compare_numeric_analytic(CavityConfig::with_finesse(5.0e6, 3000.0),
                                           490.0, 540.0),
                  std::invalid_argument);
}

TEST_CASE("four-membrane couplings mirror about the array center") {
  const CavityConfig c = paper_cavity(4);
  // frozen transmissive point of the four-membrane array
  const double k_t = 2.0 * kPi / 480.3903626366838;
  for (Parity parity : {Parity::even, Parity::odd}) {
    const TunedMode mode = tuned_mode(c, k_t, parity);
    const CouplingResult g = extract_couplings(mode.cavity, mode.record);
    REQUIRE(g.normalized.size() == 4);
    // membranes j and N+1-j couple with equal strength
    CHECK(std::abs(g.normalized[0]) ==
          doctest::Approx(std::abs(g.normalized[3])).epsilon(5e-3));
    CHECK(std::abs(g.normalized[1]) ==
          doctest::Approx(std::abs(g.normalized[2])).epsilon(5e-3));
    // frozen collective values, one per parity
    const double expect =
        (parity == Parity::even) ? 0.8804282709124246 : 0.32038633365864394;
    double collective = 0.0;
    for (double gj : g.normalized) collective += gj * gj;
    CHECK(std::sqrt(collective) == doctest::Approx(expect).epsilon(1e-6));
  }
}
