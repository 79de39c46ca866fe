#pragma once

// Symmetric slope inversion between inverse and direct demand, and the
// comparative statics of a static symmetric equilibrium in one firm's cost.

#include <string>

#include "oligo_rd/model.hpp"

namespace oligo_rd {

struct DirectSlopes {
  double q_p_own = 0.0;
  double q_p_cross = 0.0;
};

/// Closed-form inverse of a symmetric n x n slope matrix with diagonal
/// p_q_own and off-diagonal p_q_cross. Throws SingularityError when
/// p_q_own == p_q_cross or p_q_own + (n-1) p_q_cross == 0.
DirectSlopes invert_symmetric_slopes(double p_q_own, double p_q_cross, double n);

/// 1 - q_p_own * p_q_own, computed from the partials as given.
double slope_product_gap(const DemandPartials& partials, double n);

/// The same gap in factored form: -(n-1) p_q_cross^2 / ((p_own - p_cross)(p_own + (n-1) p_cross)).
double slope_product_gap_factored(double p_q_own, double p_q_cross, double n);

enum class StrategicClass { Substitutes, Complements, Degenerate };

std::string to_string(StrategicClass c);

struct ReactionDerivatives {
  double own_reaction = 0.0;    // dx_i/dm_i
  double cross_reaction = 0.0;  // dx_j/dm_i
  StrategicClass strategic_class = StrategicClass::Degenerate;
  double slope_term = 0.0;   // psi_j (Bertrand) or p_q_cross + p_qq_cross q (Cournot)
  double determinant = 0.0;  // phi_i phi_j - psi_i psi_j, or Delta
};

/// Threshold below which the strategic slope term counts as zero.
inline constexpr double kDegenerateSlope = 1e-12;

/// dp_i/dm_i and dp_j/dm_i at a symmetric Bertrand equilibrium.
///
/// The 2x2 system is the symmetric reduction of the n price first-order
/// conditions differentiated in m_i. Cross coefficients carry the full
/// derivative of C_q(m, q(p)) in rival prices (-C_qq q_p_own q_p_cross),
/// which vanishes for linear cost.
///
/// Throws PreconditionError if the FOC residual exceeds 1e-8 or phi_i >= 0,
/// StabilityError if the determinant is non-positive.
ReactionDerivatives price_reaction(const ModelSpec& spec, const SymmetricPoint& point);

/// dq_i/dm_i and dq_j/dm_i at a symmetric Cournot equilibrium. Rival j's own
/// coefficient is 2 p_q_own + p_qq_own q - C_qq + (n-2)(p_q_cross + p_qq_cross q).
ReactionDerivatives quantity_reaction(const ModelSpec& spec, const SymmetricPoint& point);

ReactionDerivatives reaction(const ModelSpec& spec, Regime regime, const SymmetricPoint& point);

}  // namespace oligo_rd
