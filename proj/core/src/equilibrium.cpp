#include "oligo_rd/equilibrium.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "oligo_rd/errors.hpp"
#include "oligo_rd/format.hpp"
#include "oligo_rd/roots.hpp"

namespace oligo_rd {

namespace {

constexpr int kScanCells = 256;
constexpr double kEdge = 1e-9;

// C_q without the q > 0 guard; the scans touch q = 0 at the choke.
double marginal_cost(const ModelSpec& spec, double m, double q) {
  const double c = cost_exponent(spec.cost);
  return c == 1.0 ? m : c * m * std::pow(q, c - 1.0);
}

// Own inverse-demand slope steeper than the cross slope. Outside this region
// the symmetric slope matrix loses invertibility and the FOCs have poles.
bool own_slope_dominates(const ModelSpec& spec, double q) {
  if (!(q > 0.0)) return false;
  const std::vector<double> qs(static_cast<std::size_t>(spec.params.n), q);
  const auto j = inverse_demand_jacobian(spec, qs);
  return j(0, 0) < j(0, 1);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_cost_level(double m) {
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("cost level m must be positive");
}

struct Candidate {
  SymmetricPoint point;
  double markup;
  double soc;
  double residual;
};

StaticEquilibrium select(std::vector<Candidate> roots, Regime regime, double m) {
  if (roots.empty()) {
    throw NoSolutionError("no symmetric " + to_string(regime) +
                          " equilibrium with dominant own slope at m = " + format_number(m));
  }
  const Candidate* best = nullptr;
  for (const auto& c : roots) {
    if (c.soc < 0.0 && (best == nullptr || c.markup > best->markup)) best = &c;
  }
  if (best == nullptr) {
    throw SocViolation("every " + to_string(regime) + " FOC root violates the second-order condition");
  }
  StaticEquilibrium eq;
  eq.regime = regime;
  eq.point = best->point;
  eq.soc.strategic = SocEntry::from_value(best->soc);
  eq.foc_residual = best->residual;
  eq.roots_found = static_cast<int>(roots.size());
  return eq;
}

}  // namespace

double bertrand_foc(const ModelSpec& spec, double m, double p) {
  const double q = symmetric_quantity(spec, p);
  const auto d = demand_partials(spec, SymmetricPoint{m, p, q});
  return q + (p - marginal_cost(spec, m, q)) * d.q_p_own;
}

double cournot_foc(const ModelSpec& spec, double m, double q) {
  const double p = symmetric_price(spec, q);
  const auto d = demand_partials(spec, SymmetricPoint{m, p, q});
  return p + d.p_q_own * q - marginal_cost(spec, m, q);
}

double price_soc(const ModelSpec& spec, const SymmetricPoint& pt) {
  const auto d = demand_partials(spec, pt);
  const auto c = cost_partials(spec, pt.m, pt.q);
  return 2.0 * d.q_p_own + (pt.p - c.C_q) * d.q_pp_own - c.C_qq * d.q_p_own * d.q_p_own;
}

double output_soc(const ModelSpec& spec, const SymmetricPoint& pt) {
  const auto d = demand_partials(spec, pt);
  const auto c = cost_partials(spec, pt.m, pt.q);
  return 2.0 * d.p_q_own + d.p_qq_own * pt.q - c.C_qq;
}

StaticEquilibrium bertrand_static(const ModelSpec& spec, double m) {
  check_parameters(spec);
  check_cost_level(m);
  const double a = demand_intercept(spec.demand);

  // Price at which the markup vanishes; the FOC is positive there.
  const auto markup_at = [&](double p) { return p - marginal_cost(spec, m, symmetric_quantity(spec, p)); };
  const double g_hi = markup_at(a);
  if (!(g_hi > 0.0)) {
    throw NoSolutionError("cost level m = " + format_number(m) + " is at or above the choke price");
  }
  const double p_zero_markup = roots::refine(markup_at, roots::Bracket{0.0, a, markup_at(0.0), g_hi});
  const double lo = p_zero_markup + kEdge;
  const double hi = a - kEdge;
  if (!(lo < hi)) throw NoSolutionError("empty price bracket at m = " + format_number(m));

  const auto foc = [&](double p) {
    return own_slope_dominates(spec, symmetric_quantity(spec, p)) ? bertrand_foc(spec, m, p) : kNaN;
  };
  std::vector<Candidate> found;
  for (const auto& b : roots::scan(foc, lo, hi, kScanCells)) {
    const double p = roots::refine(foc, b);
    const SymmetricPoint pt{m, p, symmetric_quantity(spec, p)};
    if (!own_slope_dominates(spec, pt.q)) continue;
    found.push_back({pt, p - marginal_cost(spec, m, pt.q), price_soc(spec, pt), foc(p)});
  }
  return select(std::move(found), Regime::Bertrand, m);
}

StaticEquilibrium cournot_static(const ModelSpec& spec, double m) {
  check_parameters(spec);
  check_cost_level(m);
  const double a = demand_intercept(spec.demand);
  if (!(a - marginal_cost(spec, m, 0.0) > 0.0)) {
    throw NoSolutionError("cost level m = " + format_number(m) + " is at or above the choke price");
  }
  const double lo = kEdge;
  const double hi = max_symmetric_quantity(spec) - kEdge;
  if (!(lo < hi)) throw NoSolutionError("empty quantity bracket");

  const auto foc = [&](double q) { return own_slope_dominates(spec, q) ? cournot_foc(spec, m, q) : kNaN; };
  std::vector<Candidate> found;
  for (const auto& b : roots::scan(foc, lo, hi, kScanCells)) {
    const double q = roots::refine(foc, b);
    if (!own_slope_dominates(spec, q)) continue;
    const SymmetricPoint pt{m, symmetric_price(spec, q), q};
    found.push_back({pt, pt.p - marginal_cost(spec, m, q), output_soc(spec, pt), foc(q)});
  }
  return select(std::move(found), Regime::Cournot, m);
}

StaticEquilibrium static_equilibrium(const ModelSpec& spec, Regime regime, double m) {
  return regime == Regime::Bertrand ? bertrand_static(spec, m) : cournot_static(spec, m);
}

SocEntry soc_k(const ModelSpec& spec, double k, double m, double lambda_own, double lambda_other) {
  if (!(k > 0.0)) throw DomainError("investment k must be positive");
  const int n = spec.params.n;
  const auto t = tech_partials_unchecked(spec.tech, k, (n - 1) * k);
  return SocEntry::from_value(-t.gamma_pp - lambda_own * t.Gamma_kk * m -
                              (n - 1) * lambda_other * t.Gamma_KK * m);
}

double cost_choke(const ModelSpec& spec) {
  return cost_exponent(spec.cost) == 1.0 ? demand_intercept(spec.demand)
                                         : std::numeric_limits<double>::infinity();
}

}  // namespace oligo_rd
