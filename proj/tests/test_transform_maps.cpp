#include <doctest.h>

#include <cmath>
#include <vector>

#include "kspacings/errors.hpp"
#include "kspacings/gamma_kernel.hpp"
#include "kspacings/transform_maps.hpp"
#include "oracles.hpp"

using namespace kspacings;

namespace {
double oracle_quantile(int k, double s) {
  return oracle::bisect([&](double x) { return oracle::gamma_cdf_series(k, x) - s; }, 0.0, 500.0);
}
}  // namespace

TEST_SUITE("transform_maps") {
  TEST_CASE("psi point values") {
    CHECK(psi_eval(PsiMap{3, 1.0}, 0.37) == 0.37);
    CHECK(psi_eval(PsiMap{1, 2.0}, 0.75) == doctest::Approx(0.9375).epsilon(1e-14));
    const double v = psi_eval(PsiMap{2, 1.01}, 0.5);
    CHECK((v > 0.5 && v < 0.52));
    CHECK(v == doctest::Approx(0.50524067590095625799).epsilon(1e-12));
    CHECK(v == doctest::Approx(oracle::gamma_cdf_series(2, 1.01 * oracle_quantile(2, 0.5))).epsilon(1e-12));
  }

  TEST_CASE("phi point values") {
    CHECK(phi_eval(PhiMap{1}, 1.0 - std::exp(-1.0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    CHECK(phi_eval(PhiMap{1}, 0.5) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
    const double x = oracle_quantile(3, 0.9);
    const double composed = x * x * x * std::exp(-x) / 2.0;
    CHECK(std::abs(phi_eval(PhiMap{3}, 0.9) - composed) <= 1e-10);
    CHECK(phi_eval(PhiMap{3}, 0.9) == doctest::Approx(0.36797531112024370267).epsilon(1e-12));
    CHECK(phi_eval(PhiMap{3}, 0.0) == 0.0);
  }

  TEST_CASE("psi increment supremum") {
    const IncrementReport id = psi_increment_sup(PsiMap{2, 1.0}, 1e-3);
    CHECK(id.ratio == 1.0);
    CHECK(id.sup_value == doctest::Approx(1e-3).epsilon(1e-15));

    const IncrementReport k1 = psi_increment_sup(PsiMap{1, 1.1}, 1e-3);
    CHECK((k1.ratio >= 0.99 && k1.ratio <= 1.2));
    CHECK(k1.sup_value == doctest::Approx(1.0 - std::pow(1.0 - 1e-3, 1.1)).epsilon(1e-12));

    // High-precision endpoint values at h = a.
    struct Row {
      std::uint32_t k;
      double mu, a, ratio;
      Endpoint end;
    };
    const Row rows[] = {
        {2, 1.1, 1e-3, 1.2063576594147393791, Endpoint::left},
        {2, 0.9, 1e-3, 2.2905225719466663563, Endpoint::right},
        {3, 1.05, 1e-5, 1.1559134107222189349, Endpoint::left},
    };
    for (const Row& r : rows) {
      const IncrementReport rep = psi_increment_sup(PsiMap{r.k, r.mu}, r.a);
      CHECK(rep.ratio == doctest::Approx(r.ratio).epsilon(1e-11));
      CHECK(rep.argmax_h == r.a);
      CHECK(rep.a == r.a);
      CHECK(rep.argmax_end == r.end);
      CHECK(rep.sup_value > 0.0);
    }
  }

  TEST_CASE("psi ratio at the normalizer's fluctuation scale") {
    const double dm = std::sqrt(2.0 * std::log(std::log(199999.0)) / 199999.0);
    const double up[] = {1.0095349580766556251, 1.0099811103185600523, 1.0100241452250069282};
    const double down[] = {1.0292682354087322517, 1.0556790783457948177, 1.0819275654353870409};
    const double grid[] = {1e-2, 1e-4, 1e-6};
    for (int i = 0; i < 3; ++i) {
      const IncrementReport hi = psi_increment_sup(PsiMap{2, 1.0 + dm}, grid[i]);
      const IncrementReport lo = psi_increment_sup(PsiMap{2, 1.0 - dm}, grid[i]);
      CHECK(hi.ratio == doctest::Approx(up[i]).epsilon(1e-11));
      CHECK(lo.ratio == doctest::Approx(down[i]).epsilon(1e-11));
    }
    // mu > 1 stays within 5% of 1; for mu < 1 the right end grows like
    // a^{mu - 1} and the ratio drifts away from 1 as a decreases.
    CHECK(std::abs(psi_increment_sup(PsiMap{2, 1.0 + dm}, 1e-6).ratio - 1.0) < 0.05);
    CHECK(psi_increment_sup(PsiMap{2, 1.0 - dm}, 1e-6).ratio > 1.05);
  }

  TEST_CASE("phi increment supremum") {
    const IncrementReport k1 = phi_increment_sup(PhiMap{1}, 1e-4);
    CHECK((k1.ratio >= 0.9 && k1.ratio <= 1.1));
    const IncrementReport k1_deep = phi_increment_sup(PhiMap{1}, 1e-8);
    CHECK(std::abs(k1_deep.ratio - 1.0) <= std::abs(k1.ratio - 1.0) + 1e-12);

    CHECK(phi_increment_sup(PhiMap{1}, 1e-3).ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(phi_increment_sup(PhiMap{2}, 1e-3).ratio == doctest::Approx(1.2060549692911996826).epsilon(1e-11));
    CHECK(phi_increment_sup(PhiMap{4}, 1e-6).ratio == doctest::Approx(1.3388282384590825875).epsilon(1e-11));

    const IncrementReport k20 = phi_increment_sup(PhiMap{20}, 1e-4);
    REQUIRE(k20.competing_scale.has_value());
    CHECK(*k20.competing_scale == doctest::Approx(2e-3).epsilon(1e-13));
    CHECK(k20.sup_value / *k20.competing_scale == doctest::Approx(1.1390632086436132925).epsilon(1e-11));
    CHECK_THROWS_AS((void)phi_increment_sup(PhiMap{2}, 0.5), DomainError);
  }

  TEST_CASE("deep-tail bandwidths stay finite") {
    for (std::uint32_t k : {3u, 4u, 6u}) {
      const double log_a = std::log(0.5) + gamma::tail_threshold(k, 2.1).log_value;
      const IncrementReport psi = psi_increment_sup_log(PsiMap{k, 1.02}, log_a);
      CHECK(std::isfinite(psi.log_sup));
      CHECK(std::isfinite(psi.ratio));
      const IncrementReport phi = phi_increment_sup_log(PhiMap{k}, log_a);
      CHECK(std::isfinite(phi.log_sup));
      CHECK(std::isfinite(phi.ratio));
    }
    const IncrementReport tiny = psi_increment_sup_log(PsiMap{3, 0.98}, -5000.0);
    CHECK(std::isfinite(tiny.log_sup));
    CHECK(tiny.sup_value == 0.0);
    // Either side of the switch to the leading-order lower tail.
    const double shallow = psi_increment_sup_log(PsiMap{2, 1.3}, -80.0).ratio;
    const double deep = psi_increment_sup_log(PsiMap{2, 1.3}, -100.0).ratio;
    CHECK(shallow == doctest::Approx(1.69).epsilon(1e-12));
    CHECK(deep == doctest::Approx(1.69).epsilon(1e-12));
  }

  TEST_CASE("grid points") {
    CHECK(GridPoint::parse("1e-4").kind == GridPoint::Kind::absolute);
    CHECK(GridPoint::parse("1e-4").value == 1e-4);
    CHECK(GridPoint::parse("t*0.5").kind == GridPoint::Kind::threshold_fraction);
    CHECK(GridPoint::parse("kd").kind == GridPoint::Kind::k_delta);
    CHECK_THROWS_AS((void)GridPoint::parse("2"), DomainError);
    CHECK_THROWS_AS((void)GridPoint::parse("t*abc"), DomainError);
    CHECK(resolve_log_bandwidth(GridPoint::parse("kd"), 4, 2.5) == doctest::Approx(-16.0).epsilon(1e-15));
    CHECK(resolve_log_bandwidth(GridPoint::parse("t*0.5"), 4, 2.5) ==
          doctest::Approx(std::log(0.5) + std::log(16.0) - 16.0).epsilon(1e-14));
  }

  TEST_CASE("lemma diagnostics") {
    const std::vector<std::uint32_t> ks{1, 2};
    const std::vector<GridPoint> grid{GridPoint::parse("1e-2"), GridPoint::parse("1e-4"),
                                      GridPoint::parse("1e-6")};
    const auto a1 = lemma_diagnostics(Lemma::A1, ks, grid, FixedMu{1.0}, std::nullopt);
    for (const IncrementReport& r : a1) CHECK(r.ratio == 1.0);
    CHECK(a1[0].a == 1e-2);
    CHECK(a1[2].a == 1e-6);
    const std::vector<std::uint32_t> k1{1};
    const auto a2 = lemma_diagnostics(Lemma::A2, k1, grid, FixedMu{1.0}, std::nullopt);
    REQUIRE(a2.size() == 3);
    for (std::size_t i = 1; i < a2.size(); ++i) {
      CHECK(std::abs(a2[i].ratio - 1.0) <= std::abs(a2[i - 1].ratio - 1.0) + 1e-12);
    }

    const std::vector<std::uint32_t> k48{4, 8};
    const std::vector<GridPoint> kd{GridPoint::parse("kd")};
    const auto p1 = lemma_diagnostics(Lemma::P1, k48, kd, FixedMu{1.0}, 2.5);
    REQUIRE(p1.size() == 2);
    const double err4 = 0.49075216492750576225;
    const double err8 = 0.27365389805307103101;
    CHECK(p1[0].sup_value == doctest::Approx(err4).epsilon(1e-12));
    CHECK(p1[1].sup_value == doctest::Approx(err8).epsilon(1e-12));
    CHECK(p1[0].ratio == doctest::Approx(err4 / (std::log(4.0) * std::pow(4.0, -1.5))).epsilon(1e-12));
    CHECK(p1[1].ratio == doctest::Approx(err8 / (std::log(8.0) * std::pow(8.0, -1.5))).epsilon(1e-12));
    CHECK(p1[1].sup_value <= p1[0].sup_value);
    CHECK(p1[1].ratio < 3.0);

    const std::vector<std::uint32_t> k3{3};
    CHECK_THROWS_AS((void)lemma_diagnostics(Lemma::A3, k3, grid, FixedMu{1.0}, 2.1), PreconditionError);
    CHECK_THROWS_AS((void)lemma_diagnostics(Lemma::A3, k3, kd, FixedMu{1.0}, std::nullopt), PreconditionError);
    const std::vector<GridPoint> rising{GridPoint::parse("1e-4"), GridPoint::parse("1e-2")};
    CHECK_THROWS_AS((void)lemma_diagnostics(Lemma::A1, k3, rising, FixedMu{1.0}, std::nullopt), PreconditionError);

    const auto sim = lemma_diagnostics(Lemma::A1, k1, grid, SimulatedMu{3, 1000}, std::nullopt);
    CHECK(sim.front().mu != 1.0);
    CHECK(sim.front().mu == sim.back().mu);
  }

  TEST_CASE("lemma names") {
    CHECK(parse_lemma("a3") == Lemma::A3);
    CHECK(parse_lemma("P1") == Lemma::P1);
    CHECK_THROWS_AS((void)parse_lemma("a5"), DomainError);
  }
}
