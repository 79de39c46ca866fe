#include <doctest.h>

#include <cmath>

#include "oligo_rd/equilibrium.hpp"
#include "oligo_rd/errors.hpp"
#include "oligo_rd/reactions.hpp"
#include "oracles.hpp"

using namespace oligo_rd;
using doctest::Approx;

namespace {

ModelSpec linear_spec(int n = 2, double s = 0.5) {
  ModelSpec spec;
  spec.params.n = n;
  spec.demand = LinearSubstitutes{2.0, s};
  return spec;
}

}  // namespace

TEST_SUITE("reactions") {
  TEST_CASE("slope inversion, duopoly") {
    const auto d = invert_symmetric_slopes(-1.0, -0.5, 2);
    CHECK(d.q_p_own == Approx(-4.0 / 3.0));
    CHECK(d.q_p_cross == Approx(2.0 / 3.0));
  }

  TEST_CASE("slope inversion, independent goods") {
    const auto d = invert_symmetric_slopes(-1.0, 0.0, 2);
    CHECK(d.q_p_own == Approx(-1.0));
    CHECK(d.q_p_cross == 0.0);
  }

  TEST_CASE("slope inversion, three firms") {
    const auto d = invert_symmetric_slopes(-1.0, -0.5, 3);
    CHECK(d.q_p_own == Approx(-1.5));
    CHECK(d.q_p_cross == Approx(0.5));
  }

  TEST_CASE("singular slope matrices") {
    CHECK_THROWS_AS(invert_symmetric_slopes(-1.0, -1.0, 2), SingularityError);
    CHECK_THROWS_AS(invert_symmetric_slopes(-1.0, 1.0, 2), SingularityError);
  }

  TEST_CASE("property: closed-form inversion matches dense inversion") {
    oracle::Sampler rng(3);
    for (int i = 0; i < 300; ++i) {
      const int n = rng.integer(2, 10);
      const double own = -rng.uniform(0.2, 3.0);
      const double cross = own * rng.uniform(0.0, 0.95);
      const auto d = invert_symmetric_slopes(own, cross, n);
      const auto dense = oracle::invert_dense(own, cross, n);
      CHECK(oracle::rel_err(d.q_p_own, dense(0, 0)) < 1e-12);
      if (cross != 0.0) CHECK(oracle::rel_err(d.q_p_cross, dense(0, 1)) < 1e-11);
    }
  }

  TEST_CASE("slope product gap, both forms") {
    DemandPartials d;
    d.p_q_own = -1.0;
    d.p_q_cross = -0.5;
    d.q_p_own = -4.0 / 3.0;
    CHECK(slope_product_gap(d, 2) == Approx(-1.0 / 3.0));
    CHECK(slope_product_gap_factored(-1.0, -0.5, 2) == Approx(-1.0 / 3.0));
    CHECK(slope_product_gap_factored(-1.0, -0.5, 3) == Approx(-0.5));
    CHECK(slope_product_gap_factored(-1.0, 0.0, 4) == 0.0);
  }

  TEST_CASE("price reaction on the linear duopoly") {
    const auto spec = linear_spec();
    const auto eq = bertrand_static(spec, 1.0);
    const auto r = price_reaction(spec, eq.point);
    CHECK(r.cross_reaction == Approx(2.0 / 15.0).epsilon(1e-9));
    CHECK(r.own_reaction == Approx(8.0 / 15.0).epsilon(1e-9));
    CHECK(r.strategic_class == StrategicClass::Complements);
  }

  TEST_CASE("quantity reaction on the linear duopoly") {
    const auto spec = linear_spec();
    const auto eq = cournot_static(spec, 1.0);
    const auto r = quantity_reaction(spec, eq.point);
    CHECK(r.determinant == Approx(3.75));
    CHECK(r.own_reaction == Approx(-8.0 / 15.0).epsilon(1e-9));
    CHECK(r.cross_reaction == Approx(2.0 / 15.0).epsilon(1e-9));
    CHECK(r.strategic_class == StrategicClass::Substitutes);
  }

  TEST_CASE("independent goods give a degenerate class") {
    const auto spec = linear_spec(2, 0.0);
    for (Regime regime : {Regime::Bertrand, Regime::Cournot}) {
      const auto eq = static_equilibrium(spec, regime, 1.0);
      const auto r = reaction(spec, regime, eq.point);
      CHECK(r.strategic_class == StrategicClass::Degenerate);
      CHECK(std::abs(r.cross_reaction) < 1e-12);
    }
  }

  TEST_CASE("price reaction off the equilibrium is a precondition error") {
    const auto spec = linear_spec();
    const SymmetricPoint off{1.0, 1.9, symmetric_quantity(spec, 1.9)};
    CHECK_THROWS_AS(price_reaction(spec, off), PreconditionError);
  }

  TEST_CASE("property: reactions match re-solved finite differences") {
    oracle::Sampler rng(17);
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
      ModelSpec spec = linear_spec(rng.integer(2, 5), rng.uniform(0.1, 0.8));
      if (rng.integer(0, 1)) spec.cost = PowerCost{rng.uniform(1.0, 2.0)};
      const double m = rng.uniform(0.2, 1.4);
      StaticEquilibrium eb, ec;
      try {
        eb = bertrand_static(spec, m);
        ec = cournot_static(spec, m);
      } catch (const NoSolutionError&) {
        continue;
      }
      const auto rb = price_reaction(spec, eb.point);
      const auto fb = oracle::fd_price_reaction(spec, m, eb.point.p);
      CHECK(std::abs(rb.own_reaction - fb.own) < 1e-6);
      CHECK(std::abs(rb.cross_reaction - fb.cross) < 1e-6);

      const auto rc = quantity_reaction(spec, ec.point);
      const auto fc = oracle::fd_quantity_reaction(spec, m, ec.point.q);
      CHECK(std::abs(rc.own_reaction - fc.own) < 1e-6);
      CHECK(std::abs(rc.cross_reaction - fc.cross) < 1e-6);
      ++checked;
    }
    CHECK(checked > 40);
  }
}
