#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "posmom/classical.hpp"
#include "posmom/photon.hpp"
#include "posmom/random.hpp"

#include "helpers.hpp"

using namespace posmom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::size_t count_from(double p, std::size_t n) {
  return static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
}

}  // namespace

TEST_CASE("point masses ride exact straight lines") {
  const auto ctx = ref_ctx();
  const auto par = ref_params();
  const double L = par.slit_L;
  const double B = par.momentum_B;
  const double t = 1.4 * par.t_M;

  SECTION("a walker at the origin satisfies everything") {
    const PointMassMixture origin{{PointMass{1.0, 0.0, 0.0}}};
    const auto ens = sample_joint(origin, 1000, 7u);
    for (const auto& s : ens.samples) {
      REQUIRE(s.x0 == 0.0);
      REQUIRE(s.px == 0.0);
    }
    const auto rep = straightline_report(ens, L, B, t, ctx);
    REQUIRE(rep.report.p_L == 1.0);
    REQUIRE(rep.report.p_B == 1.0);
    REQUIRE(rep.report.p_M == 1.0);
    REQUIRE(rep.report.defect == 0.0);
    REQUIRE(rep.sigma_defect == 0.0);
    REQUIRE(rep.inclusion_violations == 0);
    REQUIRE(rep.n_samples == 1000);
    REQUIRE(rep.distribution_tag == "point_mass_mixture_1");
    REQUIRE(rep.seed == 7u);
  }

  SECTION("just inside both slits stays just inside the window") {
    const double eps = 1e-9;
    const PointMassMixture corner{
        {PointMass{1.0, L / 2.0 * (1.0 - eps), B / 2.0 * (1.0 - eps)}}};
    const auto rep =
        straightline_report(sample_joint(corner, 100, 1u), L, B, t, ctx);
    REQUIRE(rep.report.p_L == 1.0);
    REQUIRE(rep.report.p_B == 1.0);
    REQUIRE(rep.report.p_M == 1.0);
    REQUIRE(rep.report.defect == 0.0);
    REQUIRE(rep.inclusion_violations == 0);
  }

  SECTION("membership is strict on the boundary") {
    const PointMassMixture edge{{PointMass{1.0, L / 2.0, 0.0}}};
    const auto rep =
        straightline_report(sample_joint(edge, 100, 1u), L, B, t, ctx);
    REQUIRE(rep.report.p_L == 0.0);  // sits exactly on the slit edge
    REQUIRE(rep.report.p_B == 1.0);
    REQUIRE(rep.report.p_M == 1.0);  // the window has grown past it
    REQUIRE(rep.report.defect == -1.0);
  }
}

TEST_CASE("sampling is reproducible by seed") {
  const ProductUniform u{-1.0, 1.0, -2.0, 2.0};
  const auto a = sample_joint(u, 1000, 42u);
  const auto b = sample_joint(u, 1000, 42u);
  const auto c = sample_joint(u, 1000, 43u);

  REQUIRE(a.samples.size() == b.samples.size());
  bool identical = true;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    identical = identical && a.samples[i].x0 == b.samples[i].x0 &&
                a.samples[i].px == b.samples[i].px;
  }
  REQUIRE(identical);

  bool differs = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    differs = differs || a.samples[i].x0 != c.samples[i].x0;
  }
  REQUIRE(differs);
}

TEST_CASE("samplers follow their laws") {
  const auto par = ref_params();
  const double L = par.slit_L;
  const double B = par.momentum_B;

  SECTION("uniform over both slits") {
    const std::size_t n = 100000;
    const ProductUniform u{-L / 2.0, L / 2.0, -B / 2.0, B / 2.0};
    const auto ens = sample_joint(u, n, 11u);

    double mx = 0.0, mp = 0.0;
    for (const auto& s : ens.samples) {
      mx += s.x0;
      mp += s.px;
    }
    mx /= static_cast<double>(n);
    mp /= static_cast<double>(n);
    const double se_x = L / std::sqrt(12.0 * static_cast<double>(n));
    const double se_p = B / std::sqrt(12.0 * static_cast<double>(n));
    REQUIRE(std::abs(mx) < 5.0 * se_x);
    REQUIRE(std::abs(mp) < 5.0 * se_p);
  }

  SECTION("correlated gaussian matches mean, spread, and correlation") {
    const std::size_t n = 200000;
    const CorrelatedGaussian g{0.0, 0.0, 1.0, 2.0, 0.6};
    const auto ens = sample_joint(g, n, 13u);

    double mx = 0.0, mp = 0.0;
    for (const auto& s : ens.samples) {
      mx += s.x0;
      mp += s.px;
    }
    const auto nd = static_cast<double>(n);
    mx /= nd;
    mp /= nd;
    double vx = 0.0, vp = 0.0, cxp = 0.0;
    for (const auto& s : ens.samples) {
      vx += (s.x0 - mx) * (s.x0 - mx);
      vp += (s.px - mp) * (s.px - mp);
      cxp += (s.x0 - mx) * (s.px - mp);
    }
    vx /= nd;
    vp /= nd;
    cxp /= nd;

    REQUIRE(std::abs(mx) < 5.0 / std::sqrt(nd));
    REQUIRE(std::abs(mp) < 10.0 / std::sqrt(nd));
    REQUIRE_THAT(std::sqrt(vx), WithinRel(1.0, 0.02));
    REQUIRE_THAT(std::sqrt(vp), WithinRel(2.0, 0.02));
    REQUIRE_THAT(cxp / (std::sqrt(vx) * std::sqrt(vp)), WithinAbs(0.6, 0.01));
  }

  SECTION("mixture weights set the component frequencies") {
    const std::size_t n = 100000;
    const PointMassMixture mix{
        {PointMass{1.0, -1.0, 0.0}, PointMass{3.0, 1.0, 0.0}}};
    const auto ens = sample_joint(mix, n, 17u);
    std::size_t hits = 0;
    for (const auto& s : ens.samples) hits += s.x0 > 0.0;
    const double frac = static_cast<double>(hits) / static_cast<double>(n);
    REQUIRE_THAT(frac, WithinAbs(0.75, 5.0 * std::sqrt(0.1875 / static_cast<double>(n))));
  }
}

TEST_CASE("straight-line inequality holds for every sampled law") {
  const auto ctx = ref_ctx();
  const auto par = ref_params();
  const double L = par.slit_L;
  const double B = par.momentum_B;
  const double t = 1.4 * par.t_M;

  Rng master(20250816u);
  std::uint64_t split_state = 918273645u;
  double max_p_L = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = make_random_spec(master, L, B);
    const auto ens = sample_joint(spec, 100000, splitmix64(split_state));
    const auto rep = straightline_report(ens, L, B, t, ctx);

    REQUIRE(rep.inclusion_violations == 0);
    REQUIRE(rep.report.defect <= 1e-12);

    // exact integer form of the same statement
    const std::size_t nL = count_from(rep.report.p_L, rep.n_samples);
    const std::size_t nB = count_from(rep.report.p_B, rep.n_samples);
    const std::size_t nM = count_from(rep.report.p_M, rep.n_samples);
    REQUIRE(nL + nB <= nM + rep.n_samples);

    max_p_L = std::max(max_p_L, rep.report.p_L);
  }
  // the battery is only meaningful if the laws actually populate the slits
  REQUIRE(max_p_L > 0.3);
}

TEST_CASE("zero flight time reduces the bound to the momentum marginal") {
  const auto ctx = ref_ctx();
  const auto par = ref_params();
  const CorrelatedGaussian g{0.0, 0.0, par.slit_L, par.momentum_B, 0.3};
  const auto ens = sample_joint(g, 50000, 29u);
  const auto rep = straightline_report(ens, par.slit_L, par.momentum_B, 0.0, ctx);

  // at t = 0 the window equals the slit, so the position terms cancel
  REQUIRE(rep.report.p_M == rep.report.p_L);
  REQUIRE_THAT(rep.report.defect, WithinAbs(rep.report.p_B - 1.0, 1e-15));
  REQUIRE(rep.report.defect <= 0.0);
}

TEST_CASE("adversarial search cannot break the inequality") {
  const auto ctx = ref_ctx();
  const auto par = ref_params();
  const auto result =
      adversarial_search(par.slit_L, par.momentum_B, 1.4 * par.t_M, ctx, 200);

  REQUIRE(result.report.inclusion_violations == 0);
  REQUIRE(result.worst_defect <= 1e-12);
  // sigma can be exactly zero when the champion pins every sample inside all
  // three windows, leaving only rounding residue in the defect
  REQUIRE(result.worst_defect <= 3.0 * result.sigma_defect + 1e-12);
  REQUIRE(result.sigma_defect >= 0.0);
  REQUIRE(result.report.n_samples == 100000);
  REQUIRE(distribution_tag(result.spec) == "point_mass_mixture_4");

  REQUIRE_THROWS_AS(
      adversarial_search(par.slit_L, par.momentum_B, 1.4 * par.t_M, ctx, 0),
      invalid_argument);
  REQUIRE_THROWS_AS(adversarial_search(-1.0, par.momentum_B, 0.0, ctx, 10),
                    invalid_argument);
}

TEST_CASE("sampler input validation") {
  const double nan = std::nan("");

  REQUIRE_THROWS_AS(sample_joint(ProductUniform{0.0, 1.0, 0.0, 1.0}, 0, 1u),
                    invalid_argument);
  REQUIRE_THROWS_AS(sample_joint(ProductUniform{1.0, 1.0, 0.0, 1.0}, 10, 1u),
                    invalid_argument);
  REQUIRE_THROWS_AS(sample_joint(ProductUniform{2.0, 1.0, 0.0, 1.0}, 10, 1u),
                    invalid_argument);
  REQUIRE_THROWS_AS(sample_joint(ProductUniform{nan, 1.0, 0.0, 1.0}, 10, 1u),
                    invalid_argument);

  REQUIRE_THROWS_AS(sample_joint(CorrelatedGaussian{0.0, 0.0, 0.0, 1.0, 0.0}, 10, 1u),
                    invalid_argument);
  REQUIRE_THROWS_AS(sample_joint(CorrelatedGaussian{0.0, 0.0, 1.0, -1.0, 0.0}, 10, 1u),
                    invalid_argument);
  REQUIRE_THROWS_AS(sample_joint(CorrelatedGaussian{0.0, 0.0, 1.0, 1.0, 1.5}, 10, 1u),
                    invalid_argument);
  REQUIRE_THROWS_AS(sample_joint(CorrelatedGaussian{nan, 0.0, 1.0, 1.0, 0.0}, 10, 1u),
                    invalid_argument);

  REQUIRE_THROWS_AS(sample_joint(PointMassMixture{}, 10, 1u), invalid_argument);
  REQUIRE_THROWS_AS(
      sample_joint(PointMassMixture{{PointMass{-1.0, 0.0, 0.0}}}, 10, 1u),
      invalid_argument);
  REQUIRE_THROWS_AS(
      sample_joint(PointMassMixture{{PointMass{0.0, 0.0, 0.0}}}, 10, 1u),
      invalid_argument);

  const auto ctx = ref_ctx();
  const ClassicalEnsemble empty;
  REQUIRE_THROWS_AS(straightline_report(empty, 1.0, 1.0, 0.0, ctx), invalid_argument);
}
