#pragma once

// Steady-state R&D level, its comparative statics in n, investment given a
// cost level under open-loop / memoryless closed-loop / feedback play, and the
// joint (k*, m*) steady states.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oligo_rd/equilibrium.hpp"
#include "oligo_rd/model.hpp"
#include "oligo_rd/reactions.hpp"

namespace oligo_rd {

enum class Mode { OpenLoop, ClosedLoop, Feedback };

std::string to_string(Mode mode);

/// Per-firm investment solving Gamma(k, (n-1) k) = delta. `n` may be real
/// (continuous relaxation for differentiation).
double solve_k_star(double n, double delta, const RnDTech& tech);
double solve_k_star(const MarketParams& params, const RnDTech& tech);

struct ComparativeStatics {
  double k_star = 0.0;
  double dk_dn = 0.0;   // d k* / d n
  double dnk_dn = 0.0;  // d (n k*) / d n
};

ComparativeStatics comparative_statics_n(double n, double delta, const RnDTech& tech);
ComparativeStatics comparative_statics_n(const MarketParams& params, const RnDTech& tech);

struct KGivenM {
  double k = 0.0;
  double residual = 0.0;  // investment condition at k, in units of (rho/m) gamma'
  /// Marginal value of cost reduction multiplying Gamma_k: C_m for open loop,
  /// C_m - (n-1) * cross-slope * level * cross-reaction otherwise.
  double marginal_value = 0.0;
  StaticEquilibrium equilibrium;
  std::optional<ReactionDerivatives> reaction;
};

/// Throws PreconditionError for ClosedLoop/Feedback when beta != 0,
/// CornerSolution when no positive k satisfies the condition.
KGivenM k_given_m(const ModelSpec& spec, Regime regime, Mode mode, double m);

struct FeedbackResidual {
  double closed_loop = 0.0;  // memoryless closed-loop assembly
  double hjb = 0.0;          // value-function envelope assembly
};

/// Investment stationarity residual at (m, k), assembled once from the
/// closed-loop adjoint and once from the HJB envelope. Requires beta = 0.
FeedbackResidual feedback_residual(const ModelSpec& spec, Regime regime, double m, double k);

struct Costate {
  double own = 0.0;
  double other = 0.0;
};

/// lambda_own = -gamma'(k) / (Gamma_k m), lambda_other = 0.
Costate costate(const ModelSpec& spec, double m, double k);

struct SteadyState {
  Regime regime = Regime::Bertrand;
  Mode mode = Mode::OpenLoop;
  double k_star = 0.0;
  double m_star = 0.0;
  double q_star = 0.0;
  double p_star = 0.0;
  double lambda_own = 0.0;
  double lambda_other = 0.0;
  std::map<std::string, double> residuals;
  SOCReport soc;
  /// k_given_m crosses k* from above when m increases through m*.
  bool locally_decreasing = false;
};

struct SteadyStateOptions {
  int grid_points = 1000;
  /// Upper end of the m scan; 0 means the cost choke (or 10 a when infinite).
  double m_max = 0.0;
};

/// Every m in (0, m_max) where k_given_m(m) = k*, ascending. An empty list
/// means no steady state in range.
std::vector<SteadyState> joint_steady_state(const ModelSpec& spec, Regime regime, Mode mode,
                                            const SteadyStateOptions& options = {});

}  // namespace oligo_rd
