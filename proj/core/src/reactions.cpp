#include "oligo_rd/reactions.hpp"

#include <cmath>

#include "oligo_rd/equilibrium.hpp"
#include "oligo_rd/errors.hpp"
#include "oligo_rd/format.hpp"

namespace oligo_rd {

namespace {

constexpr double kFocTolerance = 1e-8;

StrategicClass classify_slope(double slope_term, bool negative_is_substitutes) {
  if (std::abs(slope_term) < kDegenerateSlope) return StrategicClass::Degenerate;
  const bool negative = slope_term < 0.0;
  return negative == negative_is_substitutes ? StrategicClass::Substitutes
                                             : StrategicClass::Complements;
}

}  // namespace

std::string to_string(StrategicClass c) {
  switch (c) {
    case StrategicClass::Substitutes: return "substitutes";
    case StrategicClass::Complements: return "complements";
    case StrategicClass::Degenerate: return "degenerate";
  }
  return "unknown";
}

DirectSlopes invert_symmetric_slopes(double p_q_own, double p_q_cross, double n) {
  if (!(p_q_own < 0.0)) throw DomainError("own inverse-demand slope must be negative");
  const double gap = p_q_own - p_q_cross;
  const double row = p_q_own + (n - 1.0) * p_q_cross;
  if (gap == 0.0 || row == 0.0) throw SingularityError("degenerate demand: slope matrix is singular");
  const double denom = gap * row;
  return {(p_q_own + (n - 2.0) * p_q_cross) / denom, -p_q_cross / denom};
}

double slope_product_gap(const DemandPartials& d, double) {
  return 1.0 - d.q_p_own * d.p_q_own;
}

double slope_product_gap_factored(double p_q_own, double p_q_cross, double n) {
  const double denom = (p_q_own - p_q_cross) * (p_q_own + (n - 1.0) * p_q_cross);
  if (denom == 0.0) throw SingularityError("degenerate demand: slope matrix is singular");
  return -(n - 1.0) * p_q_cross * p_q_cross / denom;
}

ReactionDerivatives price_reaction(const ModelSpec& spec, const SymmetricPoint& pt) {
  const double foc = bertrand_foc(spec, pt.m, pt.p);
  if (!(std::abs(foc) <= kFocTolerance)) {
    throw PreconditionError("point does not satisfy the Bertrand first-order condition (residual " +
                            format_number(foc, 3) + ")");
  }
  const int n = spec.params.n;
  const auto d = demand_partials(spec, pt);
  const auto c = cost_partials(spec, pt.m, pt.q);
  const double markup = pt.p - c.C_q;
  const double A = d.q_p_own;
  const double B = d.q_p_cross;

  const double phi_i = 2.0 * A + markup * d.q_pp_own - c.C_qq * A * A;
  const double psi_j = B + markup * d.q_pp_cross - c.C_qq * A * B;
  const double psi_i = (n - 1) * psi_j;
  const double phi_j = phi_i + (n - 2) * psi_j;
  if (!(phi_i < 0.0)) throw PreconditionError("price second-order condition fails at the point");

  const double det = phi_i * phi_j - psi_i * psi_j;
  if (!(det > 0.0)) throw StabilityError("Bertrand reaction system is not stable (determinant <= 0)");

  ReactionDerivatives r;
  r.own_reaction = phi_j * c.C_qm * A / det;
  r.cross_reaction = -psi_j * c.C_qm * A / det;
  r.slope_term = psi_j;
  r.determinant = det;
  r.strategic_class = classify_slope(psi_j, /*negative_is_substitutes=*/true);
  return r;
}

ReactionDerivatives quantity_reaction(const ModelSpec& spec, const SymmetricPoint& pt) {
  const double foc = cournot_foc(spec, pt.m, pt.q);
  if (!(std::abs(foc) <= kFocTolerance)) {
    throw PreconditionError("point does not satisfy the Cournot first-order condition (residual " +
                            format_number(foc, 3) + ")");
  }
  const int n = spec.params.n;
  const auto d = demand_partials(spec, pt);
  const auto c = cost_partials(spec, pt.m, pt.q);

  const double own = 2.0 * d.p_q_own + d.p_qq_own * pt.q - c.C_qq;
  const double cross = d.p_q_cross + d.p_qq_cross * pt.q;
  const double rival_own = own + (n - 2) * cross;
  const double det = own * rival_own - (n - 1) * cross * cross;
  if (!(det > 0.0)) throw StabilityError("Cournot reaction system is not stable (Delta <= 0)");

  ReactionDerivatives r;
  r.own_reaction = rival_own * c.C_qm / det;
  r.cross_reaction = -cross * c.C_qm / det;
  r.slope_term = cross;
  r.determinant = det;
  r.strategic_class = classify_slope(cross, /*negative_is_substitutes=*/true);
  return r;
}

ReactionDerivatives reaction(const ModelSpec& spec, Regime regime, const SymmetricPoint& pt) {
  return regime == Regime::Bertrand ? price_reaction(spec, pt) : quantity_reaction(spec, pt);
}

}  // namespace oligo_rd
