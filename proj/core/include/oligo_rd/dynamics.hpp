#pragma once

// Fixed-step RK4 integration of dm_i/dt = m_i [ -Gamma(k_i, K_-i) + delta ]
// under a supplied investment policy.

#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "oligo_rd/model.hpp"
#include "oligo_rd/steadystate.hpp"

namespace oligo_rd {

/// Constant investment; one entry (shared by all firms) or one per firm.
struct ConstantK {
  std::vector<double> k;
};

/// Every firm invests the steady-state level k*.
struct SteadyStateK {};

/// Piecewise-constant symmetric investment: k[j] on [times[j], times[j+1]).
/// times[0] must be 0.
struct TableK {
  std::vector<double> times;
  std::vector<double> k;
};

using Policy = std::variant<ConstantK, SteadyStateK, TableK>;

/// Per-firm investment at time t. Throws DomainError for an invalid policy.
std::vector<double> policy_investment(const ModelSpec& spec, const Policy& policy, double t);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> m;  // m[i][step]
  std::vector<std::vector<double>> k;  // k[i][step]
  double terminal_residual = 0.0;      // max_i |Gamma(k_i, K_-i) - delta| at the horizon
};

/// Classic fourth-order Runge-Kutta with a fixed step. The last step is
/// shortened so the grid ends exactly at the horizon, and steps are split at
/// table breakpoints.
Trajectory integrate(const ModelSpec& spec, const Policy& policy, std::span<const double> m0,
                     double horizon, double step);

/// Closed-form solution for piecewise-constant policies:
/// m_i(t) = m0_i exp( integral_0^t (delta - Gamma_i(s)) ds ).
std::vector<double> exact_cost_levels(const ModelSpec& spec, const Policy& policy,
                                      std::span<const double> m0, double t);

struct ConvergenceReport {
  bool converged = false;
  double final_gap = 0.0;  // max_i |m_i(T) - m*| / m*
  double log_rate = 0.0;   // fitted slope of log gap against time
  double half_life = 0.0;  // ln 2 / -log_rate; +inf when the gap does not shrink
};

ConvergenceReport convergence_report(const Trajectory& trajectory, const SteadyState& target);

/// Columns t, m_1..m_n, k_1..k_n; 12 significant digits, LF line endings.
void write_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace oligo_rd
