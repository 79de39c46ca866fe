#include "oligo_rd/steadystate.hpp"

#include <cmath>
#include <limits>

#include "oligo_rd/errors.hpp"
#include "oligo_rd/format.hpp"
#include "oligo_rd/roots.hpp"

namespace oligo_rd {

namespace {

void require_no_spillover(const ModelSpec& spec, Mode mode) {
  if (mode == Mode::OpenLoop || spec.tech.beta == 0.0) return;
  throw PreconditionError(mode == Mode::ClosedLoop ? "closed-loop requires zero spillover"
                                                   : "feedback requires zero spillover");
}

// Everything the investment condition needs at one cost level.
struct InvestmentCondition {
  const ModelSpec* spec = nullptr;
  double m = 0.0;
  double marginal_value = 0.0;  // multiplies Gamma_k
  StaticEquilibrium eq;
  std::optional<ReactionDerivatives> reaction;

  double residual(double k) const {
    const int n = spec->params.n;
    const auto t = tech_partials(spec->tech, k, (n - 1) * k);
    return marginal_value * t.Gamma_k - spec->params.rho / m * t.gamma_p;
  }
};

// (cross slope) * (level) in the strategic term: q_p_cross * p for prices,
// p_q_cross * q for quantities.
double strategic_weight(const ModelSpec& spec, Regime regime, const SymmetricPoint& pt) {
  const auto d = demand_partials(spec, pt);
  return regime == Regime::Bertrand ? d.q_p_cross * pt.p : d.p_q_cross * pt.q;
}

// rho * dV_i/dm_i from the HJB identity differentiated in m_i. The terms
// multiplying (-Gamma + delta) drop out at the steady state; the static FOC
// term is kept and vanishes at the solved equilibrium.
double hjb_envelope(const ModelSpec& spec, Regime regime, const StaticEquilibrium& eq,
                    const ReactionDerivatives& r) {
  const int n = spec.params.n;
  const auto c = cost_partials(spec, eq.point.m, eq.point.q);
  return -c.C_m + eq.foc_residual * r.own_reaction +
         (n - 1) * strategic_weight(spec, regime, eq.point) * r.cross_reaction;
}

InvestmentCondition make_condition(const ModelSpec& spec, Regime regime, Mode mode, double m) {
  require_no_spillover(spec, mode);
  InvestmentCondition ic;
  ic.spec = &spec;
  ic.m = m;
  ic.eq = static_equilibrium(spec, regime, m);
  const auto c = cost_partials(spec, m, ic.eq.point.q);
  const int n = spec.params.n;
  switch (mode) {
    case Mode::OpenLoop:
      ic.marginal_value = c.C_m;
      break;
    case Mode::ClosedLoop:
      ic.reaction = reaction(spec, regime, ic.eq.point);
      ic.marginal_value =
          c.C_m - (n - 1) * strategic_weight(spec, regime, ic.eq.point) * ic.reaction->cross_reaction;
      break;
    case Mode::Feedback:
      ic.reaction = reaction(spec, regime, ic.eq.point);
      ic.marginal_value = -hjb_envelope(spec, regime, ic.eq, *ic.reaction);
      break;
  }
  return ic;
}

double solve_investment(const InvestmentCondition& ic) {
  const auto& tech = ic.spec->tech;
  const double rho = ic.spec->params.rho;
  const int n = ic.spec->params.n;
  if (!(ic.marginal_value > 0.0)) {
    throw CornerSolution("no positive investment satisfies the condition at m = " + format_number(ic.m));
  }
  // gamma'(k) = (m / rho) * marginal_value * Gamma_k with Gamma_k frozen.
  const auto frozen = [&](double gamma_k) {
    return std::pow(ic.m * ic.marginal_value * gamma_k / (rho * tech.b * tech.g), 1.0 / (tech.g - 1.0));
  };
  if (tech.alpha == 1.0) return frozen(1.0);

  double k = frozen(tech_partials_unchecked(tech, 1.0, n - 1.0).Gamma_k);
  for (int iter = 0; iter < 200 && std::isfinite(k) && k > 0.0; ++iter) {
    const double next = 0.5 * k + 0.5 * frozen(tech_partials_unchecked(tech, k, (n - 1) * k).Gamma_k);
    if (std::abs(next - k) <= 1e-12 * std::max(1.0, k)) return next;
    k = next;
  }
  // Fallback: the residual is +inf at 0+ and negative for large k.
  const auto f = [&](double x) { return ic.residual(x); };
  const double lo = 1e-300;
  return roots::refine(f, roots::expand_upward(f, lo, 1e-6));
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::OpenLoop: return "open";
    case Mode::ClosedLoop: return "closed";
    case Mode::Feedback: return "feedback";
  }
  return "unknown";
}

double solve_k_star(double n, double delta, const RnDTech& tech) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(n >= 1.0)) throw DomainError("n must be at least 1");
  const auto f = [&](double k) {
    return tech_partials_unchecked(tech, k, (n - 1.0) * k).Gamma - delta;
  };
  // k^alpha alone reaches delta at delta^(1/alpha).
  const double hi = std::pow(delta, 1.0 / tech.alpha);
  const double k = roots::refine(f, roots::Bracket{0.0, hi, -delta, f(hi)});
  if (!(k > 0.0)) throw NoSolutionError("no positive steady-state investment");
  tech_partials(tech, k, (n - 1.0) * k);  // direct effect must dominate at k*
  return k;
}

double solve_k_star(const MarketParams& params, const RnDTech& tech) {
  return solve_k_star(static_cast<double>(params.n), params.delta, tech);
}

ComparativeStatics comparative_statics_n(double n, double delta, const RnDTech& tech) {
  ComparativeStatics cs;
  cs.k_star = solve_k_star(n, delta, tech);
  const auto t = tech_partials(tech, cs.k_star, (n - 1.0) * cs.k_star);
  const double denom = t.Gamma_k + (n - 1.0) * t.Gamma_K;
  cs.dk_dn = -t.Gamma_K * cs.k_star / denom;
  cs.dnk_dn = (t.Gamma_k - t.Gamma_K) * cs.k_star / denom;
  return cs;
}

ComparativeStatics comparative_statics_n(const MarketParams& params, const RnDTech& tech) {
  return comparative_statics_n(static_cast<double>(params.n), params.delta, tech);
}

KGivenM k_given_m(const ModelSpec& spec, Regime regime, Mode mode, double m) {
  const auto ic = make_condition(spec, regime, mode, m);
  KGivenM out;
  out.k = solve_investment(ic);
  out.residual = ic.residual(out.k);
  out.marginal_value = ic.marginal_value;
  out.equilibrium = ic.eq;
  out.reaction = ic.reaction;
  return out;
}

FeedbackResidual feedback_residual(const ModelSpec& spec, Regime regime, double m, double k) {
  if (spec.tech.beta != 0.0) throw PreconditionError("feedback requires zero spillover");
  const int n = spec.params.n;
  const double rho = spec.params.rho;
  const auto eq = static_equilibrium(spec, regime, m);
  const auto r = reaction(spec, regime, eq.point);
  const auto c = cost_partials(spec, m, eq.point.q);
  const auto t = tech_partials(spec.tech, k, (n - 1) * k);

  FeedbackResidual out;
  const double bracket = c.C_m - (n - 1) * strategic_weight(spec, regime, eq.point) * r.cross_reaction;
  out.closed_loop = bracket * t.Gamma_k - rho / m * t.gamma_p;

  const double value_slope = hjb_envelope(spec, regime, eq, r) / rho;  // dV_i/dm_i
  const double f2 = -t.gamma_p - value_slope * m * t.Gamma_k;
  out.hjb = rho / m * f2;
  return out;
}

Costate costate(const ModelSpec& spec, double m, double k) {
  if (!(m > 0.0)) throw DomainError("cost level m must be positive");
  const int n = spec.params.n;
  const auto t = tech_partials(spec.tech, k, (n - 1) * k);
  return {-t.gamma_p / (t.Gamma_k * m), 0.0};
}

std::vector<SteadyState> joint_steady_state(const ModelSpec& spec, Regime regime, Mode mode,
                                            const SteadyStateOptions& options) {
  check_parameters(spec);
  require_no_spillover(spec, mode);
  const int n = spec.params.n;
  const double k_star = solve_k_star(spec.params, spec.tech);

  double m_hi = options.m_max;
  if (!(m_hi > 0.0)) {
    const double choke = cost_choke(spec);
    m_hi = std::isfinite(choke) ? choke : 10.0 * demand_intercept(spec.demand);
  }
  const int points = std::max(options.grid_points, 2);

  // No positive investment solves the condition: the optimum is the k = 0 corner.
  const auto gap = [&](double m) {
    try {
      return k_given_m(spec, regime, mode, m).k - k_star;
    } catch (const CornerSolution&) {
      return -k_star;
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  const double lo = m_hi / (points + 1);
  const double hi = m_hi * points / (points + 1);
  std::vector<SteadyState> out;
  for (const auto& b : roots::scan(gap, lo, hi, points - 1)) {
    const double m_star = roots::refine(gap, b);
    const auto ic = make_condition(spec, regime, mode, m_star);

    SteadyState ss;
    ss.regime = regime;
    ss.mode = mode;
    ss.k_star = k_star;
    ss.m_star = m_star;
    ss.q_star = ic.eq.point.q;
    ss.p_star = ic.eq.point.p;
    const auto lam = costate(spec, m_star, k_star);
    ss.lambda_own = lam.own;
    ss.lambda_other = lam.other;

    const auto t = tech_partials(spec.tech, k_star, (n - 1) * k_star);
    ss.residuals["state"] = t.Gamma - spec.params.delta;
    ss.residuals["static_foc"] = ic.eq.foc_residual;
    ss.residuals["investment"] = ic.residual(k_star);
    ss.residuals["costate_foc"] = -t.gamma_p - lam.own * t.Gamma_k * m_star;
    ss.residuals["adjoint"] = ic.marginal_value + spec.params.rho * lam.own;
    ss.residuals["intersection"] = gap(m_star);

    ss.soc = ic.eq.soc;
    ss.soc.investment = soc_k(spec, k_star, m_star, lam.own, lam.other);
    ss.locally_decreasing = b.f_lo > 0.0 && b.f_hi < 0.0;
    out.push_back(std::move(ss));
  }
  return out;
}

}  // namespace oligo_rd
