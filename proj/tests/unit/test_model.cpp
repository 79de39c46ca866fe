#include <doctest.h>

#include <cmath>
#include <vector>

#include "oligo_rd/errors.hpp"
#include "oligo_rd/model.hpp"
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

ModelSpec power_spec(double eta = 2.0) {
  ModelSpec spec;
  spec.demand = PowerInverse{2.0, 0.5, eta};
  return spec;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("linear inverse demand") {
    const auto spec = linear_spec();
    const std::vector<double> q{0.4, 0.4};
    const auto p = inverse_demand(spec, q);
    CHECK(p[0] == Approx(1.4));
    CHECK(p[1] == Approx(1.4));

    const std::vector<double> zero{0.0, 0.0};
    const auto p0 = inverse_demand(spec, zero);
    CHECK(p0[0] == 2.0);
    CHECK(p0[1] == 2.0);
  }

  TEST_CASE("negative quantity is rejected") {
    const std::vector<double> q{-0.1, 0.4};
    CHECK_THROWS_AS(inverse_demand(linear_spec(), q), DomainError);
  }

  TEST_CASE("power inverse demand and its round trip") {
    const auto spec = power_spec();
    const std::vector<double> q{0.5, 0.5};
    const auto p = inverse_demand(spec, q);
    CHECK(p[0] == Approx(1.5));
    const auto back = direct_demand(spec, p);
    CHECK(back[0] == Approx(0.5).epsilon(1e-10));
    CHECK(back[1] == Approx(0.5).epsilon(1e-10));
  }

  TEST_CASE("power round trip at an asymmetric point") {
    const auto spec = power_spec(1.5);
    const std::vector<double> q{0.3, 0.6};
    const auto back = direct_demand(spec, inverse_demand(spec, q));
    CHECK(back[0] == Approx(0.3).epsilon(1e-10));
    CHECK(back[1] == Approx(0.6).epsilon(1e-10));
  }

  TEST_CASE("linear direct demand") {
    const std::vector<double> p{4.0 / 3.0, 4.0 / 3.0};
    const auto q = direct_demand(linear_spec(), p);
    CHECK(q[0] == Approx(4.0 / 9.0));
    CHECK(q[1] == Approx(4.0 / 9.0));
  }

  TEST_CASE("symmetric price and quantity are inverse to each other") {
    for (const auto& spec : {linear_spec(3, 0.3), power_spec(2.5)}) {
      for (double q : {0.05, 0.2, 0.45}) {
        CHECK(symmetric_quantity(spec, symmetric_price(spec, q)) == Approx(q).epsilon(1e-10));
      }
    }
    const auto spec = linear_spec();
    CHECK(symmetric_price(spec, max_symmetric_quantity(spec)) == Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("linear demand partials") {
    const auto d = demand_partials(linear_spec(), {1.0, 4.0 / 3.0, 4.0 / 9.0});
    CHECK(d.p_q_own == Approx(-1.0));
    CHECK(d.p_q_cross == Approx(-0.5));
    CHECK(d.q_p_own == Approx(-4.0 / 3.0));
    CHECK(d.q_p_cross == Approx(2.0 / 3.0));
    CHECK(d.p_qq_own == 0.0);
    CHECK(d.q_pp_own == Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("power demand with unit exponent matches linear") {
    const SymmetricPoint pt{1.0, 1.2, 0.5};
    const auto lin = demand_partials(linear_spec(), pt);
    const auto pow1 = demand_partials(power_spec(1.0), pt);
    CHECK(pow1.p_q_own == Approx(lin.p_q_own));
    CHECK(pow1.p_q_cross == Approx(lin.p_q_cross));
    CHECK(pow1.q_p_own == Approx(lin.q_p_own));
    CHECK(pow1.q_p_cross == Approx(lin.q_p_cross));
  }

  TEST_CASE("direct slopes match a dense inverse of the Jacobian") {
    const auto spec = power_spec(1.8);
    const double q = 0.4;
    const std::vector<double> qs(2, q);
    const auto d = demand_partials(spec, {0.5, symmetric_price(spec, q), q});
    const Eigen::MatrixXd inv = inverse_demand_jacobian(spec, qs).inverse();
    CHECK(d.q_p_own == Approx(inv(0, 0)).epsilon(1e-12));
    CHECK(d.q_p_cross == Approx(inv(0, 1)).epsilon(1e-12));
  }

  TEST_CASE("inverse demand Jacobian agrees with finite differences") {
    const auto spec = power_spec(2.0);
    const std::vector<double> q{0.3, 0.5};
    const auto jac = inverse_demand_jacobian(spec, q);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
      auto up = q, dn = q;
      up[j] += h;
      dn[j] -= h;
      const auto pu = inverse_demand(spec, up);
      const auto pd = inverse_demand(spec, dn);
      for (int i = 0; i < 2; ++i) CHECK(jac(i, j) == Approx((pu[i] - pd[i]) / (2 * h)).epsilon(1e-7));
    }
  }

  TEST_CASE("linear cost partials") {
    ModelSpec spec;
    const auto c = cost_partials(spec, 1.0, 0.4);
    CHECK(c.C == Approx(0.4));
    CHECK(c.C_q == Approx(1.0));
    CHECK(c.C_m == Approx(0.4));
    CHECK(c.C_qq == 0.0);
    CHECK(c.C_qm == Approx(1.0));
  }

  TEST_CASE("power cost partials") {
    ModelSpec spec;
    spec.cost = PowerCost{2.0};
    const auto c = cost_partials(spec, 1.0, 0.5);
    CHECK(c.C == Approx(0.25));
    CHECK(c.C_q == Approx(1.0));
    CHECK(c.C_m == Approx(0.25));
    CHECK(c.C_qq == Approx(2.0));
    CHECK(c.C_qm == Approx(1.0));
  }

  TEST_CASE("linear technology") {
    const auto t = tech_partials(RnDTech{1.0, 0.5, 1.0, 2.0}, 0.1, 0.2);
    CHECK(t.Gamma == Approx(0.2));
    CHECK(t.Gamma_k == Approx(1.0));
    CHECK(t.Gamma_K == Approx(0.5));
    CHECK(t.Gamma_kk == 0.0);
  }

  TEST_CASE("concave technology") {
    const auto t = tech_partials(RnDTech{0.5, 0.0, 1.0, 2.0}, 0.25, 0.25);
    CHECK(t.Gamma == Approx(0.5));
    CHECK(t.Gamma_k == Approx(1.0));
    CHECK(t.Gamma_kk == Approx(-2.0));
    CHECK(t.gamma == Approx(0.0625));
    CHECK(t.gamma_p == Approx(0.5));
    CHECK(t.gamma_pp == Approx(2.0));
  }

  TEST_CASE("technology domain errors") {
    CHECK_THROWS_AS(tech_partials(RnDTech{}, 0.0, 0.1), DomainError);
    CHECK_THROWS_AS(tech_partials(RnDTech{1.0, 1.5, 1.0, 2.0}, 0.1, 0.1), DomainError);
    CHECK_NOTHROW(tech_partials_unchecked(RnDTech{1.0, 1.5, 1.0, 2.0}, 0.1, 0.1));
  }

  TEST_CASE("parameter checks") {
    CHECK_NOTHROW(check_parameters(linear_spec()));
    CHECK_NOTHROW(check_parameters(linear_spec(2, 0.0)));

    auto bad = linear_spec();
    bad.params.n = 1;
    CHECK_THROWS_AS(check_parameters(bad), DomainError);

    bad = linear_spec();
    bad.params.delta = 1.0;
    CHECK_THROWS_AS(check_parameters(bad), DomainError);

    bad = linear_spec();
    bad.params.rho = 0.0;
    CHECK_THROWS_AS(check_parameters(bad), DomainError);

    bad = linear_spec(2, 1.0);
    CHECK_THROWS_AS(check_parameters(bad), DomainError);

    bad = linear_spec();
    bad.cost = PowerCost{0.5};
    CHECK_THROWS_AS(check_parameters(bad), DomainError);
  }

  TEST_CASE("validation of the reference model passes") {
    const auto report = validate_model(linear_spec());
    CHECK(report.all_pass());
    CHECK(report.first_failure() == nullptr);
    for (const auto& c : report.checks) CHECK(c.points_checked > 0);
  }

  TEST_CASE("independent goods are degenerate") {
    const auto report = validate_model(linear_spec(2, 0.0));
    CHECK_FALSE(report.all_pass());
    REQUIRE(report.first_failure() != nullptr);
    CHECK(report.first_failure()->status == CheckStatus::Degenerate);
  }

  TEST_CASE("spillover beyond the direct effect is reported with a location") {
    auto spec = linear_spec();
    spec.tech.alpha = 0.5;
    spec.tech.beta = 0.9;
    const auto report = validate_model(spec);
    REQUIRE(report.first_failure() != nullptr);
    CHECK(report.first_failure()->status == CheckStatus::Violated);
    CHECK_FALSE(report.first_failure()->location.empty());
  }

  TEST_CASE("property: random linear points satisfy own-slope dominance in the direct slopes") {
    oracle::Sampler rng(11);
    for (int i = 0; i < 200; ++i) {
      const int n = rng.integer(2, 8);
      const double s = rng.uniform(0.05, 0.95);
      const auto spec = linear_spec(n, s);
      const double q = rng.uniform(0.01, 0.9 * max_symmetric_quantity(spec));
      const auto d = demand_partials(spec, {0.5, symmetric_price(spec, q), q});
      CHECK(d.q_p_own < 0.0);
      CHECK(d.q_p_cross > 0.0);
      CHECK(std::abs(d.q_p_own) > d.q_p_cross);
    }
  }
}
