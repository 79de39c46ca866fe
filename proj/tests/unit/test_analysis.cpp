#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "oligo_rd/analysis.hpp"
#include "oligo_rd/errors.hpp"

using namespace oligo_rd;
using doctest::Approx;

namespace {

ModelSpec reference() {
  ModelSpec spec;
  spec.params = {2, 0.1, 0.2};
  spec.demand = LinearSubstitutes{2.0, 0.5};
  spec.tech = {1.0, 0.0, 1.0, 2.0};
  return spec;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("verdicts") {
    CHECK(verdict_greater(2.0, 1.0) == Verdict::Pass);
    CHECK(verdict_greater(1.0, 2.0) == Verdict::Fail);
    CHECK(verdict_greater(1.0, 1.0 + 1e-12) == Verdict::Indistinguishable);
    CHECK(verdict_negative(-0.1) == Verdict::Pass);
    CHECK(verdict_negative(1e-13) == Verdict::Indistinguishable);
    CHECK(verdict_equal(3.0, 3.0 * (1 + 1e-12)) == Verdict::Pass);
    CHECK(verdict_equal(3.0, 3.1) == Verdict::Fail);
    CHECK(to_string(Verdict::NotApplicable) == "n/a");
  }

  TEST_CASE("regime comparison on the reference") {
    const auto r = compare_regimes(reference(), 1.0);
    CHECK(r.q_B == Approx(4.0 / 9.0));
    CHECK(r.q_C == Approx(0.4));
    CHECK(r.k_B == Approx(20.0 / 9.0));
    CHECK(r.k_C == Approx(2.0));
    CHECK(r.slope_gap == Approx(-1.0 / 3.0));
    CHECK(r.cournot_foc_at_bertrand == Approx(r.cournot_foc_at_bertrand_factored).epsilon(1e-12));
    CHECK(r.all_pass());
  }

  TEST_CASE("n statics") {
    auto spec = reference();
    spec.params.n = 3;
    spec.tech.beta = 0.5;
    const auto s = n_statics(spec);
    CHECK(s.k_star == Approx(0.1));
    CHECK(s.nk_star == Approx(0.3));
    CHECK(s.dk_nonpositive == Verdict::Pass);
    CHECK(s.dnk_positive == Verdict::Pass);

    spec.tech.beta = 0.0;
    const auto flat = n_statics(spec);
    CHECK(flat.dk_nonpositive == Verdict::Pass);
    CHECK(flat.all_pass());
  }

  TEST_CASE("loop comparison follows the strategic class") {
    const auto b = compare_loops(reference(), Regime::Bertrand, 1.0, true);
    CHECK(b.k_open == Approx(20.0 / 9.0));
    CHECK(b.k_closed == Approx(44.0 / 27.0).epsilon(1e-10));
    CHECK(b.strategic_class == StrategicClass::Complements);
    CHECK(b.sign_rule == Verdict::Pass);
    CHECK(b.linear_rule == Verdict::Pass);
    CHECK(b.feedback_match == Verdict::Pass);
    REQUIRE(b.k_feedback.has_value());

    const auto c = compare_loops(reference(), Regime::Cournot, 1.0);
    CHECK(c.k_closed == Approx(32.0 / 15.0).epsilon(1e-10));
    CHECK(c.strategic_class == StrategicClass::Substitutes);
    CHECK(c.sign_rule == Verdict::Pass);
    CHECK_FALSE(c.k_feedback.has_value());
  }

  TEST_CASE("closed-loop corner is recorded, not thrown") {
    const auto b = compare_loops(reference(), Regime::Bertrand, 1.9);
    CHECK(b.closed_corner);
    CHECK(b.k_closed == 0.0);
    CHECK(b.sign_rule == Verdict::Pass);
  }

  TEST_CASE("loop comparison needs zero spillover") {
    auto spec = reference();
    spec.tech.beta = 0.2;
    CHECK_THROWS_AS(compare_loops(spec, Regime::Cournot, 1.0), PreconditionError);
    const auto row = compare_all(spec, 1.0, {Mode::OpenLoop, Mode::ClosedLoop});
    CHECK(row.loops.empty());
    CHECK(row.regimes.has_value());
  }

  TEST_CASE("compare_all records a failing part") {
    const auto row = compare_all(reference(), 2.5, {Mode::OpenLoop});
    CHECK(row.failed());
    CHECK(row.error.rfind("regimes:", 0) == 0);
    CHECK(row.statics.has_value());
  }

  TEST_CASE("grid expansion order") {
    SweepGrid g;
    g.n = std::vector<int>{2, 3};
    g.s = std::vector<double>{0.2, 0.4, 0.6};
    const auto cells = expand_grid(reference(), g);
    REQUIRE(cells.size() == 6);
    CHECK(cells[0].first.params.n == 2);
    CHECK(std::get<LinearSubstitutes>(cells[1].first.demand).s == 0.4);
    CHECK(cells[3].first.params.n == 3);
    CHECK(cells[0].second == 1.0);  // half the intercept
  }

  TEST_CASE("empty grids") {
    CHECK_THROWS_AS(expand_grid(reference(), SweepGrid{}), DomainError);
    SweepGrid g;
    g.n = std::vector<int>{};
    CHECK_THROWS_WITH_AS(expand_grid(reference(), g), doctest::Contains("empty grid"), DomainError);
  }

  TEST_CASE("sweep over n, s and m") {
    SweepGrid g;
    g.n = std::vector<int>{2, 3, 4};
    g.s = std::vector<double>{0.3, 0.7};
    g.m = std::vector<double>{0.5, 1.0};
    g.modes = {Mode::OpenLoop, Mode::ClosedLoop, Mode::Feedback};
    const auto rows = sweep(reference(), g, {2});
    REQUIRE(rows.size() == 12);
    const auto sum = summarize(rows);
    CHECK(sum.rows == 12);
    CHECK(sum.failures == 0);
    CHECK(sum.regimes_pass == sum.regimes_total);
    CHECK(sum.statics_pass == sum.statics_total);
    CHECK(sum.loops_pass == sum.loops_total);
    CHECK(sum.loops_total == 12);
    CHECK(sum.gap_min > 0.0);
    CHECK(summary_line(sum).rfind("rows=12 failures=0", 0) == 0);
  }

  TEST_CASE("sweep is deterministic across thread counts") {
    SweepGrid g;
    g.n = std::vector<int>{2, 3, 5};
    g.beta = std::vector<double>{0.0, 0.3};
    std::ostringstream one, many;
    write_rows_csv(one, sweep(reference(), g, {1}));
    write_rows_csv(many, sweep(reference(), g, {4}));
    CHECK(one.str() == many.str());
    CHECK(count_lines(one.str()) == 7);
  }

  TEST_CASE("json report") {
    SweepGrid g;
    g.m = std::vector<double>{0.5, 1.0};
    std::ostringstream os;
    write_rows_json(os, sweep(reference(), g), "null");
    const auto doc = nlohmann::json::parse(os.str());
    CHECK(doc["scenario"].is_null());
    CHECK(doc["rows"].size() == 2);
    CHECK(doc["summary"]["rows"] == 2);
  }
}
