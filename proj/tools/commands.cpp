#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oligo_rd/analysis.hpp"
#include "oligo_rd/dynamics.hpp"
#include "oligo_rd/equilibrium.hpp"
#include "oligo_rd/format.hpp"
#include "oligo_rd/model.hpp"
#include "oligo_rd/scenario.hpp"
#include "oligo_rd/steadystate.hpp"

namespace oligo_rd::cli {

namespace {

using json_t = nlohmann::ordered_json;

Scenario load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return parse_scenario(text.str());
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void close_output(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("error writing " + path);
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

std::string num(double v) { return format_number(v); }

json_t jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_to_digits(v);
}

// Residuals print as a power-of-ten bound so that assemblies agreeing to
// roundoff render identically.
int residual_exponent(double r) {
  const double a = std::abs(r);
  if (!(a > 0.0)) return -14;
  if (!std::isfinite(a)) return 999;
  return std::max(-14, static_cast<int>(std::ceil(std::log10(a))));
}

std::string residual_bound(double r) {
  if (!std::isfinite(r)) return "nan";
  return "<= 1e" + std::to_string(residual_exponent(r));
}

void row(std::ostream& out, const std::string& label, const std::string& value, int width = 24) {
  out << std::left << std::setw(width) << label << value << '\n';
}

std::string soc_text(const SocEntry& e) {
  return num(e.value) + (e.satisfied ? " (satisfied)" : " (violated)");
}

std::string cost_level_range(const ModelSpec& spec) {
  const double choke = cost_choke(spec);
  return std::isfinite(choke) ? "(0, " + num(choke) + ")" : "(0, inf)";
}

}  // namespace

std::string halved_path(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash) || dot == slash + 1) {
    return path + ".half";
  }
  return path.substr(0, dot) + ".half" + path.substr(dot);
}

int cmd_validate(const std::string& scenario, bool json, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sc = load(scenario);
    const auto report = validate_model(sc.model, sc.probe);
    if (json) {
      json_t doc;
      doc["model"] = json_t::parse(model_json(sc.model));
      doc["checks"] = json_t::array();
      for (const auto& c : report.checks) {
        doc["checks"].push_back({{"name", c.name},
                                 {"status", to_string(c.status)},
                                 {"points_checked", c.points_checked},
                                 {"location", c.location},
                                 {"value", jnum(c.value)}});
      }
      doc["all_pass"] = report.all_pass();
      out << doc.dump(2) << '\n';
    } else {
      for (const auto& c : report.checks) {
        std::string detail = to_string(c.status);
        if (c.status != CheckStatus::Pass && !c.location.empty()) {
          detail += " at " + c.location + " (value " + num(c.value) + ")";
        }
        row(out, c.name, detail, 44);
      }
      if (report.all_pass()) {
        out << "all checks pass\n";
      } else {
        const auto* f = report.first_failure();
        out << "assumption " << to_string(f->status) << ": " << f->name;
        if (!f->location.empty()) out << " at " << f->location;
        out << '\n';
      }
    }
    return report.all_pass() ? kExitOk : kExitDomain;
  });
}

int cmd_steady(const SteadyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sc = load(args.scenario);
    const SteadySection section = sc.steady.value_or(SteadySection{});
    const Regime regime = args.regime ? parse_regime(*args.regime) : section.regime.value_or(Regime::Bertrand);
    const Mode mode = args.mode ? parse_mode(*args.mode) : section.mode.value_or(Mode::OpenLoop);
    const auto roots = joint_steady_state(sc.model, regime, mode, section.options);

    if (args.json) {
      json_t doc;
      doc["regime"] = to_string(regime);
      doc["roots"] = json_t::array();
      for (const auto& ss : roots) {
        json_t r;
        r["m_star"] = jnum(ss.m_star);
        r["k_star"] = jnum(ss.k_star);
        r["q_star"] = jnum(ss.q_star);
        r["p_star"] = jnum(ss.p_star);
        r["lambda_own"] = jnum(ss.lambda_own);
        r["lambda_other"] = jnum(ss.lambda_other);
        json_t res = json_t::object();
        for (const auto& [key, value] : ss.residuals) res[key] = "1e" + std::to_string(residual_exponent(value));
        r["residual_bounds"] = res;
        r["soc"]["strategic"] = {{"value", jnum(ss.soc.strategic.value)}, {"satisfied", ss.soc.strategic.satisfied}};
        if (ss.soc.investment) {
          r["soc"]["investment"] = {{"value", jnum(ss.soc.investment->value)},
                                    {"satisfied", ss.soc.investment->satisfied}};
        }
        r["locally_decreasing"] = ss.locally_decreasing;
        doc["roots"].push_back(r);
      }
      out << doc.dump(2) << '\n';
      return kExitOk;
    }

    out << to_string(regime) << " steady states: " << roots.size() << '\n';
    if (roots.empty()) out << "no steady state with m in " << cost_level_range(sc.model) << '\n';
    for (std::size_t i = 0; i < roots.size(); ++i) {
      const auto& ss = roots[i];
      out << "\n[" << i + 1 << "]\n";
      row(out, "m_star", num(ss.m_star));
      row(out, "k_star", num(ss.k_star));
      row(out, "q_star", num(ss.q_star));
      row(out, "p_star", num(ss.p_star));
      row(out, "lambda_own", num(ss.lambda_own));
      row(out, "lambda_other", num(ss.lambda_other));
      row(out, "soc_strategic", soc_text(ss.soc.strategic));
      if (ss.soc.investment) row(out, "soc_investment", soc_text(*ss.soc.investment));
      row(out, "crossing", ss.locally_decreasing ? "decreasing" : "increasing");
      for (const auto& [key, value] : ss.residuals) row(out, "residual." + key, residual_bound(value));
    }
    return kExitOk;
  });
}

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sc = load(args.scenario);
    check_parameters(sc.model);
    const CompareSection section = sc.compare.value_or(CompareSection{});
    const auto at = args.at_m ? args.at_m : section.m;
    if (!at) throw DomainError("no cost level given; pass --at-m or set m in [compare]");
    const double m = *at;
    if (!(m > 0.0) || !(m < cost_choke(sc.model))) {
      throw DomainError("--at-m = " + num(m) + " lies outside " + cost_level_range(sc.model));
    }

    std::vector<Mode> modes{Mode::OpenLoop, Mode::ClosedLoop};
    if (section.feedback) modes.push_back(Mode::Feedback);
    const auto result = compare_all(sc.model, m, modes);
    const std::vector<ComparisonRow> rows{result};

    if (args.csv) {
      write_rows_csv(out, rows);
    } else if (args.json) {
      write_rows_json(out, rows, model_json(sc.model));
    } else {
      row(out, "m", num(m), 40);
      if (result.regimes) {
        const auto& r = *result.regimes;
        row(out, "q_B", num(r.q_B), 40);
        row(out, "q_C", num(r.q_C), 40);
        row(out, "k_B (open loop)", num(r.k_B), 40);
        row(out, "k_C (open loop)", num(r.k_C), 40);
        row(out, "cournot_foc_at_bertrand", num(r.cournot_foc_at_bertrand), 40);
        row(out, "cournot_foc_at_bertrand_factored", num(r.cournot_foc_at_bertrand_factored), 40);
        row(out, "slope_gap", num(r.slope_gap), 40);
      }
      if (result.statics) {
        row(out, "k_star", num(result.statics->k_star), 40);
        row(out, "dk_dn", num(result.statics->dk_dn), 40);
        row(out, "dnk_dn", num(result.statics->dnk_dn), 40);
      }
      for (const auto& l : result.loops) {
        const auto name = to_string(l.regime);
        row(out, name + " k_open", num(l.k_open), 40);
        row(out, name + " k_closed", num(l.k_closed), 40);
        if (l.k_feedback) row(out, name + " k_feedback", num(*l.k_feedback), 40);
        row(out, name + " strategic_class", to_string(l.strategic_class), 40);
      }
      out << "verdicts\n";
      if (result.regimes) {
        const auto& r = *result.regimes;
        row(out, "  q_B > q_C", to_string(r.output_order), 40);
        row(out, "  k_B > k_C", to_string(r.investment_order), 40);
        row(out, "  cournot_foc_at_bertrand < 0", to_string(r.foc_sign), 40);
        row(out, "  slope_gap < 0", to_string(r.gap_sign), 40);
      }
      if (result.statics) {
        row(out, "  dk_dn <= 0", to_string(result.statics->dk_nonpositive), 40);
        row(out, "  dnk_dn > 0", to_string(result.statics->dnk_positive), 40);
      }
      for (const auto& l : result.loops) {
        const auto name = to_string(l.regime);
        row(out, "  " + name + " loop sign rule", to_string(l.sign_rule), 40);
        row(out, "  " + name + " linear ordering", to_string(l.linear_rule), 40);
        if (l.k_feedback) row(out, "  " + name + " feedback == closed", to_string(l.feedback_match), 40);
      }
      if (sc.model.tech.beta != 0.0) out << "loop comparison skipped: requires zero spillover\n";
    }
    if (result.failed()) {
      err << "error: " << result.error << '\n';
      return kExitDomain;
    }
    return kExitOk;
  });
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sc = load(args.scenario);
    if (!sc.sweep) throw DomainError("empty grid: scenario has no [sweep] section");

    SweepOptions options;
    if (const char* env = std::getenv("OLIGO_RD_THREADS")) {
      try {
        const long t = std::stol(env);
        if (t > 0) options.threads = static_cast<unsigned>(t);
      } catch (const std::exception&) {
        throw DomainError(std::string("OLIGO_RD_THREADS must be a positive integer, got '") + env + "'");
      }
    }
    const auto rows = sweep(sc.model, *sc.sweep, options);

    std::ostream* summary = &out;
    if (args.out) {
      auto file = open_output(*args.out);
      write_rows_csv(file, rows);
      close_output(file, *args.out);
    } else {
      write_rows_csv(out, rows);
      summary = &err;
    }
    if (args.json_out) {
      auto file = open_output(*args.json_out);
      write_rows_json(file, rows, model_json(sc.model));
      close_output(file, *args.json_out);
    }
    *summary << summary_line(summarize(rows)) << '\n';
    return kExitOk;
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto sc = load(args.scenario);
    if (!sc.dynamics) throw DomainError("scenario has no [dynamics] section");
    const auto& d = *sc.dynamics;
    if (args.halving && !args.out) throw DomainError("--halving needs --out");

    const auto tr = integrate(sc.model, d.policy, d.m0, d.horizon, d.step);
    std::ostream* summary = &out;
    if (args.out) {
      auto file = open_output(*args.out);
      write_csv(file, tr);
      close_output(file, *args.out);
    } else {
      write_csv(out, tr);
      summary = &err;
    }

    row(*summary, "steps", std::to_string(tr.times.size() - 1));
    row(*summary, "terminal_residual", num(tr.terminal_residual));
    for (std::size_t i = 0; i < tr.m.size(); ++i) {
      row(*summary, "m_" + std::to_string(i + 1) + "(T)", num(tr.m[i].back()));
    }
    if (d.target_m) {
      SteadyState target;
      target.m_star = *d.target_m;
      const auto rep = convergence_report(tr, target);
      row(*summary, "final_gap", num(rep.final_gap));
      row(*summary, "converged", rep.converged ? "yes" : "no");
      row(*summary, "half_life", std::isfinite(rep.half_life) ? num(rep.half_life) : "inf");
    }

    if (args.halving) {
      const auto half = integrate(sc.model, d.policy, d.m0, d.horizon, 0.5 * d.step);
      const auto half_path = halved_path(*args.out);
      auto file = open_output(half_path);
      write_csv(file, half);
      close_output(file, half_path);

      constexpr double kRoundoff = 1e-12;
      const auto exact = exact_cost_levels(sc.model, d.policy, d.m0, d.horizon);
      double e_full = 0.0;
      double e_half = 0.0;
      for (std::size_t i = 0; i < exact.size(); ++i) {
        e_full = std::max(e_full, std::abs(tr.m[i].back() - exact[i]) / exact[i]);
        e_half = std::max(e_half, std::abs(half.m[i].back() - exact[i]) / exact[i]);
      }
      row(*summary, "half_step_file", half_path);
      row(*summary, "error_full_step", num(e_full));
      row(*summary, "error_half_step", num(e_half));
      row(*summary, "error_ratio", e_half > kRoundoff ? num(e_full / e_half) : "n/a (errors at roundoff)");
    }
    return kExitOk;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic R&D oligopoly solver"};
  app.require_subcommand(1);

  std::string validate_path;
  bool validate_json = false;
  auto* validate = app.add_subcommand("validate", "Check model assumptions over the probe region");
  validate->add_option("scenario", validate_path, "Scenario file")->required();
  validate->add_flag("--json", validate_json, "JSON report");

  SteadyArgs steady_args;
  auto* steady = app.add_subcommand("steady", "Joint steady states (k*, m*)");
  steady->add_option("scenario", steady_args.scenario, "Scenario file")->required();
  steady->add_option("--regime", steady_args.regime, "bertrand or cournot");
  steady->add_option("--mode", steady_args.mode, "open, closed or feedback");
  steady->add_flag("--json", steady_args.json, "JSON output");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Regime and loop comparison at a fixed cost level");
  compare->add_option("scenario", compare_args.scenario, "Scenario file")->required();
  compare->add_option("--at-m", compare_args.at_m, "Common cost level m");
  auto* json_flag = compare->add_flag("--json", compare_args.json, "JSON report");
  compare->add_flag("--csv", compare_args.csv, "CSV row")->excludes(json_flag);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Comparison table over the [sweep] grid");
  sweep_cmd->add_option("scenario", sweep_args.scenario, "Scenario file")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "CSV destination (default standard output)");
  sweep_cmd->add_option("--json-out", sweep_args.json_out, "JSON report destination");

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand("simulate", "Integrate cost dynamics under the [dynamics] policy");
  simulate->add_option("scenario", simulate_args.scenario, "Scenario file")->required();
  simulate->add_option("--out", simulate_args.out, "CSV destination (default standard output)");
  simulate->add_flag("--halving", simulate_args.halving, "Also integrate at half the step and report the error ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitDomain;
  }

  if (validate->parsed()) return cmd_validate(validate_path, validate_json, out, err);
  if (steady->parsed()) return cmd_steady(steady_args, out, err);
  if (compare->parsed()) return cmd_compare(compare_args, out, err);
  if (sweep_cmd->parsed()) return cmd_sweep(sweep_args, out, err);
  return cmd_simulate(simulate_args, out, err);
}

}  // namespace oligo_rd::cli
