#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "oligo_rd/dynamics.hpp"
#include "oligo_rd/errors.hpp"

using namespace oligo_rd;
using doctest::Approx;

namespace {

ModelSpec reference() {
  ModelSpec spec;
  spec.params = {2, 0.1, 0.2};
  spec.tech = {1.0, 0.0, 1.0, 2.0};
  return spec;
}

SteadyState target(double m_star) {
  SteadyState ss;
  ss.m_star = m_star;
  ss.k_star = 0.2;
  return ss;
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("investment at k star keeps cost constant") {
    const std::vector<double> m0{1.3, 0.7};
    const auto tr = integrate(reference(), SteadyStateK{}, m0, 5.0, 0.1);
    CHECK(tr.m[0].back() == Approx(1.3).epsilon(1e-14));
    CHECK(tr.m[1].back() == Approx(0.7).epsilon(1e-14));
    CHECK(tr.terminal_residual < 1e-14);
  }

  TEST_CASE("investment above k star lowers cost exponentially") {
    const std::vector<double> m0{1.0, 1.0};
    const auto tr = integrate(reference(), ConstantK{{0.3}}, m0, 1.0, 0.01);
    CHECK(tr.times.back() == 1.0);
    CHECK(tr.m[0].back() == Approx(std::exp(-0.1)).epsilon(1e-12));
    CHECK(tr.terminal_residual == Approx(0.1));
  }

  TEST_CASE("investment below k star raises cost") {
    const std::vector<double> m0{1.0, 1.0};
    const auto tr = integrate(reference(), ConstantK{{0.1}}, m0, 2.0, 0.01);
    CHECK(tr.m[1].back() == Approx(std::exp(0.2)).epsilon(1e-12));
  }

  TEST_CASE("last step is shortened to land on the horizon") {
    const std::vector<double> m0{1.0, 1.0};
    const auto tr = integrate(reference(), ConstantK{{0.3}}, m0, 1.05, 0.1);
    CHECK(tr.times.back() == Approx(1.05).epsilon(1e-15));
    CHECK(tr.times.size() == 12);
    CHECK(tr.m[0].back() == Approx(std::exp(-0.105)).epsilon(1e-8));
  }

  TEST_CASE("table policy switches at the breakpoints") {
    const TableK table{{0.0, 1.0}, {0.3, 0.1}};
    CHECK(policy_investment(reference(), table, 0.5)[0] == 0.3);
    CHECK(policy_investment(reference(), table, 1.0)[0] == 0.1);
    const std::vector<double> m0{1.0, 1.0};
    const auto exact = exact_cost_levels(reference(), table, m0, 2.0);
    CHECK(exact[0] == Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("breakpoints between grid points are honoured") {
    const TableK table{{0.0, 0.333, 1.275}, {0.3, 0.1, 0.25}};
    const std::vector<double> m0{1.0, 0.8};
    const auto tr = integrate(reference(), table, m0, 2.0, 0.01);
    const auto exact = exact_cost_levels(reference(), table, m0, 2.0);
    CHECK(tr.m[0].back() == Approx(exact[0]).epsilon(1e-12));
    CHECK(tr.m[1].back() == Approx(exact[1]).epsilon(1e-12));
    CHECK(tr.times.size() == 203);
  }

  TEST_CASE("spillover couples the firms") {
    auto spec = reference();
    spec.tech.beta = 0.2;
    const ConstantK policy{{0.1, 0.3}};
    const std::vector<double> m0{1.0, 1.0};
    const auto tr = integrate(spec, policy, m0, 1.0, 0.005);
    const auto exact = exact_cost_levels(spec, policy, m0, 1.0);
    CHECK(tr.m[0].back() == Approx(exact[0]).epsilon(1e-12));
    CHECK(tr.m[1].back() == Approx(exact[1]).epsilon(1e-12));
  }

  TEST_CASE("invalid inputs") {
    const std::vector<double> m0{1.0, 1.0};
    const std::vector<double> short_m0{1.0};
    const auto spec = reference();
    CHECK_THROWS_AS(integrate(spec, SteadyStateK{}, m0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(integrate(spec, SteadyStateK{}, m0, -1.0, 0.1), DomainError);
    CHECK_THROWS_AS(integrate(spec, SteadyStateK{}, short_m0, 1.0, 0.1), DomainError);
    CHECK_THROWS_AS(policy_investment(spec, ConstantK{{0.1, 0.2, 0.3}}, 0.0), DomainError);
    CHECK_THROWS_AS(policy_investment(spec, TableK{{0.5}, {0.1}}, 0.0), DomainError);
  }

  TEST_CASE("convergence at the steady state") {
    const std::vector<double> m0{1.0, 1.0};
    const auto tr = integrate(reference(), SteadyStateK{}, m0, 1.0, 0.1);
    const auto rep = convergence_report(tr, target(1.0));
    CHECK(rep.converged);
    CHECK(rep.final_gap == 0.0);
  }

  TEST_CASE("below k star the gap grows at the depreciation shortfall") {
    const std::vector<double> m0{1.0, 1.0};
    const auto tr = integrate(reference(), ConstantK{{0.1}}, m0, 10.0, 0.01);
    const auto rep = convergence_report(tr, target(1.0));
    CHECK_FALSE(rep.converged);
    CHECK(rep.final_gap == Approx(std::exp(1.0) - 1.0).epsilon(1e-9));
    CHECK(std::isinf(rep.half_life));
  }

  TEST_CASE("at k star every level is a rest point") {
    const std::vector<double> m0{2.0, 2.0};
    const auto tr = integrate(reference(), ConstantK{{0.2}}, m0, 10.0, 0.1);
    const auto rep = convergence_report(tr, target(1.0));
    CHECK_FALSE(rep.converged);
    CHECK(rep.final_gap == Approx(1.0));
    CHECK(std::isinf(rep.half_life));
  }

  TEST_CASE("csv layout") {
    const std::vector<double> m0{1.0, 1.0};
    const auto tr = integrate(reference(), ConstantK{{0.3}}, m0, 0.2, 0.1);
    std::ostringstream os;
    write_csv(os, tr);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,m_1,m_2,k_1,k_2");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 3);
    CHECK(os.str().find('\r') == std::string::npos);
  }

  TEST_CASE("property: halving the step cuts the error about sixteen-fold") {
    auto spec = reference();
    spec.params.delta = 0.5;
    spec.tech.beta = 0.2;
    const ConstantK policy{{2.0, 2.5}};
    const std::vector<double> m0{1.0, 1.5};
    const auto exact = exact_cost_levels(spec, policy, m0, 1.0);
    const auto coarse = integrate(spec, policy, m0, 1.0, 0.02);
    const auto fine = integrate(spec, policy, m0, 1.0, 0.01);
    const double e1 = std::abs(coarse.m[0].back() - exact[0]);
    const double e2 = std::abs(fine.m[0].back() - exact[0]);
    CHECK(e1 / e2 == Approx(16.0).epsilon(0.1));
  }
}
