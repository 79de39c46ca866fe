#include "oligo_rd/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "oligo_rd/equilibrium.hpp"
#include "oligo_rd/errors.hpp"
#include "oligo_rd/format.hpp"

namespace oligo_rd {

using json_t = nlohmann::ordered_json;

namespace {

bool indistinguishable(double lhs, double rhs) {
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return std::abs(lhs - rhs) <= kVerdictTolerance * scale;
}

bool linear_family(const ModelSpec& spec) {
  return std::holds_alternative<LinearSubstitutes>(spec.demand) &&
         std::holds_alternative<LinearCost>(spec.cost);
}

bool wants_loops(const std::vector<Mode>& modes) {
  return std::any_of(modes.begin(), modes.end(), [](Mode m) { return m != Mode::OpenLoop; });
}

bool wants_feedback(const std::vector<Mode>& modes) {
  return std::find(modes.begin(), modes.end(), Mode::Feedback) != modes.end();
}

void set_substitutability(DemandFamily& demand, double s) {
  std::visit([&](auto& d) { d.s = s; }, demand);
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indistinguishable: return "indistinguishable";
    case Verdict::NotApplicable: return "n/a";
  }
  return "unknown";
}

Verdict verdict_greater(double lhs, double rhs) {
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) return Verdict::Fail;
  if (indistinguishable(lhs, rhs)) return Verdict::Indistinguishable;
  return lhs > rhs ? Verdict::Pass : Verdict::Fail;
}

Verdict verdict_negative(double x) { return verdict_greater(0.0, x); }

Verdict verdict_equal(double lhs, double rhs) {
  return std::isfinite(lhs) && std::isfinite(rhs) && indistinguishable(lhs, rhs) ? Verdict::Pass
                                                                                  : Verdict::Fail;
}

bool RegimeComparison::all_pass() const {
  return output_order == Verdict::Pass && investment_order == Verdict::Pass &&
         foc_sign == Verdict::Pass && gap_sign == Verdict::Pass;
}

bool NStatics::all_pass() const {
  return dk_nonpositive == Verdict::Pass && dnk_positive == Verdict::Pass;
}

RegimeComparison compare_regimes(const ModelSpec& spec, double m) {
  RegimeComparison rc;
  const auto bertrand = k_given_m(spec, Regime::Bertrand, Mode::OpenLoop, m);
  const auto cournot = k_given_m(spec, Regime::Cournot, Mode::OpenLoop, m);
  const auto& pb = bertrand.equilibrium.point;
  rc.q_B = pb.q;
  rc.q_C = cournot.equilibrium.point.q;
  rc.k_B = bertrand.k;
  rc.k_C = cournot.k;

  const auto d = demand_partials(spec, pb);
  rc.cournot_foc_at_bertrand = pb.p + d.p_q_own * pb.q - cost_partials(spec, m, pb.q).C_q;
  rc.slope_gap = slope_product_gap(d, spec.params.n);
  rc.cournot_foc_at_bertrand_factored =
      -pb.q * slope_product_gap_factored(d.p_q_own, d.p_q_cross, spec.params.n) / d.q_p_own;

  rc.output_order = verdict_greater(rc.q_B, rc.q_C);
  rc.investment_order = verdict_greater(rc.k_B, rc.k_C);
  rc.foc_sign = verdict_negative(rc.cournot_foc_at_bertrand);
  rc.gap_sign = verdict_negative(rc.slope_gap);
  return rc;
}

NStatics n_statics(const ModelSpec& spec) {
  NStatics st;
  const auto cs = comparative_statics_n(spec.params, spec.tech);
  st.k_star = cs.k_star;
  st.dk_dn = cs.dk_dn;
  st.dnk_dn = cs.dnk_dn;
  st.nk_star = spec.params.n * cs.k_star;
  // Weak inequality: beta = 0 gives dk/dn = 0 exactly.
  st.dk_nonpositive = verdict_greater(st.dk_dn, 0.0) == Verdict::Pass ? Verdict::Fail : Verdict::Pass;
  st.dnk_positive = verdict_greater(st.dnk_dn, 0.0);
  return st;
}

LoopComparison compare_loops(const ModelSpec& spec, Regime regime, double m, bool with_feedback) {
  if (spec.tech.beta != 0.0) throw PreconditionError("loop comparison requires zero spillover");
  LoopComparison lc;
  lc.regime = regime;
  lc.k_open = k_given_m(spec, regime, Mode::OpenLoop, m).k;
  const auto eq = static_equilibrium(spec, regime, m);
  const auto r = reaction(spec, regime, eq.point);
  lc.strategic_class = r.strategic_class;
  lc.cross_reaction = r.cross_reaction;
  try {
    lc.k_closed = k_given_m(spec, regime, Mode::ClosedLoop, m).k;
  } catch (const CornerSolution&) {
    lc.k_closed = 0.0;
    lc.closed_corner = true;
  }

  switch (lc.strategic_class) {
    case StrategicClass::Substitutes: lc.sign_rule = verdict_greater(lc.k_closed, lc.k_open); break;
    case StrategicClass::Complements: lc.sign_rule = verdict_greater(lc.k_open, lc.k_closed); break;
    case StrategicClass::Degenerate: lc.sign_rule = verdict_equal(lc.k_closed, lc.k_open); break;
  }
  if (linear_family(spec) && substitutability(spec.demand) > 0.0) {
    lc.linear_rule = regime == Regime::Bertrand ? verdict_greater(lc.k_open, lc.k_closed)
                                                : verdict_greater(lc.k_closed, lc.k_open);
  }
  if (with_feedback) {
    try {
      lc.k_feedback = k_given_m(spec, regime, Mode::Feedback, m).k;
    } catch (const CornerSolution&) {
      lc.k_feedback = 0.0;
    }
    lc.feedback_match = verdict_equal(*lc.k_feedback, lc.k_closed);
  }
  return lc;
}

ComparisonRow compare_bertrand_cournot(const ModelSpec& spec, double m) {
  ComparisonRow row;
  row.spec = spec;
  row.m = m;
  row.regimes = compare_regimes(spec, m);
  row.statics = n_statics(spec);
  return row;
}

ComparisonRow compare_loops_row(const ModelSpec& spec, Regime regime, double m, bool with_feedback) {
  ComparisonRow row;
  row.spec = spec;
  row.m = m;
  row.loops.push_back(compare_loops(spec, regime, m, with_feedback));
  return row;
}

ComparisonRow compare_all(const ModelSpec& spec, double m, const std::vector<Mode>& modes) {
  ComparisonRow row;
  row.spec = spec;
  row.m = m;
  const auto attempt = [&](const char* part, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      if (row.error.empty()) row.error = std::string(part) + ": " + e.what();
    }
  };
  attempt("parameters", [&] { check_parameters(spec); });
  if (row.failed()) return row;
  attempt("regimes", [&] { row.regimes = compare_regimes(spec, m); });
  attempt("statics", [&] { row.statics = n_statics(spec); });
  if (wants_loops(modes) && spec.tech.beta == 0.0) {
    for (Regime r : {Regime::Bertrand, Regime::Cournot}) {
      attempt("loops", [&] { row.loops.push_back(compare_loops(spec, r, m, wants_feedback(modes))); });
    }
  }
  return row;
}

std::vector<std::pair<ModelSpec, double>> expand_grid(const ModelSpec& tmpl, const SweepGrid& grid) {
  const bool any_axis = grid.n || grid.s || grid.m || grid.beta || grid.delta || grid.rho;
  const auto empty_axis = [](const auto& axis) { return axis && axis->empty(); };
  if (!any_axis || empty_axis(grid.n) || empty_axis(grid.s) || empty_axis(grid.m) ||
      empty_axis(grid.beta) || empty_axis(grid.delta) || empty_axis(grid.rho)) {
    throw DomainError("empty grid");
  }
  const double m0 = grid.base_m.value_or(0.5 * demand_intercept(tmpl.demand));
  const auto ns = grid.n.value_or(std::vector<int>{tmpl.params.n});
  const auto ss = grid.s.value_or(std::vector<double>{substitutability(tmpl.demand)});
  const auto ms = grid.m.value_or(std::vector<double>{m0});
  const auto betas = grid.beta.value_or(std::vector<double>{tmpl.tech.beta});
  const auto deltas = grid.delta.value_or(std::vector<double>{tmpl.params.delta});
  const auto rhos = grid.rho.value_or(std::vector<double>{tmpl.params.rho});

  std::vector<std::pair<ModelSpec, double>> cells;
  cells.reserve(ns.size() * ss.size() * ms.size() * betas.size() * deltas.size() * rhos.size());
  for (int n : ns)
    for (double s : ss)
      for (double m : ms)
        for (double beta : betas)
          for (double delta : deltas)
            for (double rho : rhos) {
              ModelSpec spec = tmpl;
              spec.params.n = n;
              set_substitutability(spec.demand, s);
              spec.tech.beta = beta;
              spec.params.delta = delta;
              spec.params.rho = rho;
              cells.emplace_back(spec, m);
            }
  return cells;
}

std::vector<ComparisonRow> sweep(const ModelSpec& tmpl, const SweepGrid& grid, const SweepOptions& options) {
  const auto cells = expand_grid(tmpl, grid);
  std::vector<ComparisonRow> rows(cells.size());

  unsigned workers = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(cells.size()));

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      rows[i] = compare_all(cells[i].first, cells[i].second, grid.modes);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return rows;
}

SweepSummary summarize(const std::vector<ComparisonRow>& rows) {
  SweepSummary s;
  s.rows = static_cast<int>(rows.size());
  double gap_sum = 0.0;
  int gaps = 0;
  for (const auto& row : rows) {
    if (row.failed()) ++s.failures;
    if (row.statics) {
      ++s.statics_total;
      if (row.statics->all_pass()) ++s.statics_pass;
    }
    if (row.regimes) {
      ++s.regimes_total;
      if (row.regimes->all_pass()) ++s.regimes_pass;
      const double gap = row.regimes->k_B - row.regimes->k_C;
      s.gap_min = gaps == 0 ? gap : std::min(s.gap_min, gap);
      s.gap_max = gaps == 0 ? gap : std::max(s.gap_max, gap);
      gap_sum += gap;
      ++gaps;
    }
    const bool decided = std::any_of(row.loops.begin(), row.loops.end(), [](const LoopComparison& l) {
      return l.strategic_class != StrategicClass::Degenerate;
    });
    if (decided) {
      ++s.loops_total;
      const bool ok = std::all_of(row.loops.begin(), row.loops.end(), [](const LoopComparison& l) {
        return l.strategic_class == StrategicClass::Degenerate || l.sign_rule == Verdict::Pass;
      });
      if (ok) ++s.loops_pass;
    }
  }
  if (gaps > 0) s.gap_mean = gap_sum / gaps;
  return s;
}

std::string summary_line(const SweepSummary& s) {
  const auto frac = [](int pass, int total) { return std::to_string(pass) + "/" + std::to_string(total); };
  std::string line = "rows=" + std::to_string(s.rows) + " failures=" + std::to_string(s.failures) +
                     " statics=" + frac(s.statics_pass, s.statics_total) +
                     " regimes=" + frac(s.regimes_pass, s.regimes_total) +
                     " loops=" + frac(s.loops_pass, s.loops_total);
  if (s.regimes_total > 0) {
    line += " gap_min=" + format_number(s.gap_min) + " gap_max=" + format_number(s.gap_max) +
            " gap_mean=" + format_number(s.gap_mean);
  }
  return line;
}

namespace {

const char* const kRegimeColumns[] = {"k_open", "k_closed", "closed_corner", "k_feedback", "class",
                                      "sign_rule", "linear_rule", "feedback_match"};

const LoopComparison* find_loop(const ComparisonRow& row, Regime regime) {
  for (const auto& l : row.loops) {
    if (l.regime == regime) return &l;
  }
  return nullptr;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

json_t number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_to_digits(v);
}

json_t loop_json(const LoopComparison& l) {
  json_t j;
  j["regime"] = to_string(l.regime);
  j["k_open"] = number(l.k_open);
  j["k_closed"] = number(l.k_closed);
  j["k_feedback"] = l.k_feedback ? number(*l.k_feedback) : json_t(nullptr);
  j["closed_corner"] = l.closed_corner;
  j["strategic_class"] = to_string(l.strategic_class);
  j["cross_reaction"] = number(l.cross_reaction);
  j["verdicts"] = {{"sign_rule", to_string(l.sign_rule)},
                   {"linear_rule", to_string(l.linear_rule)},
                   {"feedback_match", to_string(l.feedback_match)}};
  return j;
}

json_t row_json(const ComparisonRow& row) {
  json_t j;
  j["parameters"] = {{"n", row.spec.params.n},
                     {"s", number(substitutability(row.spec.demand))},
                     {"m", number(row.m)},
                     {"beta", number(row.spec.tech.beta)},
                     {"delta", number(row.spec.params.delta)},
                     {"rho", number(row.spec.params.rho)}};
  json_t verdicts = json_t::object();
  if (row.regimes) {
    const auto& r = *row.regimes;
    j["q_B"] = number(r.q_B);
    j["q_C"] = number(r.q_C);
    j["k_B"] = number(r.k_B);
    j["k_C"] = number(r.k_C);
    j["cournot_foc_at_bertrand"] = number(r.cournot_foc_at_bertrand);
    j["cournot_foc_at_bertrand_factored"] = number(r.cournot_foc_at_bertrand_factored);
    j["slope_gap"] = number(r.slope_gap);
    verdicts["output_order"] = to_string(r.output_order);
    verdicts["investment_order"] = to_string(r.investment_order);
    verdicts["foc_sign"] = to_string(r.foc_sign);
    verdicts["gap_sign"] = to_string(r.gap_sign);
  }
  if (row.statics) {
    const auto& st = *row.statics;
    j["k_star"] = number(st.k_star);
    j["dk_dn"] = number(st.dk_dn);
    j["dnk_dn"] = number(st.dnk_dn);
    j["nk_star"] = number(st.nk_star);
    verdicts["dk_nonpositive"] = to_string(st.dk_nonpositive);
    verdicts["dnk_positive"] = to_string(st.dnk_positive);
  }
  j["verdicts"] = verdicts;
  j["loops"] = json_t::array();
  for (const auto& l : row.loops) j["loops"].push_back(loop_json(l));
  j["error"] = row.failed() ? json_t(row.error) : json_t(nullptr);
  return j;
}

}  // namespace

void write_rows_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "n,s,m,beta,delta,rho,q_B,q_C,k_B,k_C,cournot_foc_at_bertrand,"
         "cournot_foc_at_bertrand_factored,slope_gap,k_star,dk_dn,dnk_dn,nk_star,"
         "output_order,investment_order,foc_sign,gap_sign,dk_nonpositive,dnk_positive";
  for (const char* regime : {"bertrand", "cournot"}) {
    for (const char* col : kRegimeColumns) out << ',' << regime << '_' << col;
  }
  out << ",error\n";

  for (const auto& row : rows) {
    std::vector<std::string> f;
    f.push_back(std::to_string(row.spec.params.n));
    f.push_back(format_number(substitutability(row.spec.demand)));
    f.push_back(format_number(row.m));
    f.push_back(format_number(row.spec.tech.beta));
    f.push_back(format_number(row.spec.params.delta));
    f.push_back(format_number(row.spec.params.rho));
    if (row.regimes) {
      const auto& r = *row.regimes;
      for (double v : {r.q_B, r.q_C, r.k_B, r.k_C, r.cournot_foc_at_bertrand,
                       r.cournot_foc_at_bertrand_factored, r.slope_gap}) {
        f.push_back(format_number(v));
      }
    } else {
      f.insert(f.end(), 7, "");
    }
    if (row.statics) {
      for (double v : {row.statics->k_star, row.statics->dk_dn, row.statics->dnk_dn, row.statics->nk_star}) {
        f.push_back(format_number(v));
      }
    } else {
      f.insert(f.end(), 4, "");
    }
    if (row.regimes) {
      for (Verdict v : {row.regimes->output_order, row.regimes->investment_order, row.regimes->foc_sign,
                        row.regimes->gap_sign}) {
        f.push_back(to_string(v));
      }
    } else {
      f.insert(f.end(), 4, "");
    }
    if (row.statics) {
      f.push_back(to_string(row.statics->dk_nonpositive));
      f.push_back(to_string(row.statics->dnk_positive));
    } else {
      f.insert(f.end(), 2, "");
    }
    for (Regime regime : {Regime::Bertrand, Regime::Cournot}) {
      if (const auto* l = find_loop(row, regime)) {
        f.push_back(format_number(l->k_open));
        f.push_back(format_number(l->k_closed));
        f.push_back(l->closed_corner ? "yes" : "no");
        f.push_back(l->k_feedback ? format_number(*l->k_feedback) : "");
        f.push_back(to_string(l->strategic_class));
        f.push_back(to_string(l->sign_rule));
        f.push_back(to_string(l->linear_rule));
        f.push_back(to_string(l->feedback_match));
      } else {
        f.insert(f.end(), std::size(kRegimeColumns), "");
      }
    }
    f.push_back(csv_field(row.error));

    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
    out << '\n';
  }
}

void write_rows_json(std::ostream& out, const std::vector<ComparisonRow>& rows,
                     const std::string& scenario_json) {
  json_t doc;
  doc["scenario"] = json_t::parse(scenario_json);
  doc["rows"] = json_t::array();
  for (const auto& row : rows) doc["rows"].push_back(row_json(row));
  const auto s = summarize(rows);
  doc["summary"] = {{"rows", s.rows},
                    {"failures", s.failures},
                    {"statics", {{"pass", s.statics_pass}, {"total", s.statics_total}}},
                    {"regimes", {{"pass", s.regimes_pass}, {"total", s.regimes_total}}},
                    {"loops", {{"pass", s.loops_pass}, {"total", s.loops_total}}},
                    {"gap", {{"min", number(s.gap_min)}, {"max", number(s.gap_max)}, {"mean", number(s.gap_mean)}}}};
  out << doc.dump(2) << '\n';
}

}  // namespace oligo_rd
