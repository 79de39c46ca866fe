#pragma once

// Primitive function families of the n-firm R&D oligopoly: demand (direct and
// inverse), production cost, and R&D technology. All functions are pure.

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace oligo_rd {

struct MarketParams {
  int n = 2;           // number of firms, n >= 2
  double rho = 0.1;    // discount rate, > 0
  double delta = 0.2;  // depreciation rate, in (0, 1)
};

/// p_i = a - q_i - s * sum_{j != i} q_j, with the matching direct demand.
struct LinearSubstitutes {
  double a = 2.0;
  double s = 0.5;
};

/// p_i = a - q_i^eta - s * sum_{j != i} q_j. Direct demand by numerical inversion.
struct PowerInverse {
  double a = 2.0;
  double s = 0.5;
  double eta = 2.0;
};

using DemandFamily = std::variant<LinearSubstitutes, PowerInverse>;

/// C(m, q) = m * q.
struct LinearCost {};

/// C(m, q) = m * q^c, c >= 1.
struct PowerCost {
  double c = 2.0;
};

using CostFamily = std::variant<LinearCost, PowerCost>;

/// Gamma(k, K) = k^alpha + beta * K; R&D cost gamma(k) = b * k^g.
struct RnDTech {
  double alpha = 1.0;
  double beta = 0.0;
  double b = 1.0;
  double g = 2.0;
};

struct ModelSpec {
  MarketParams params;
  DemandFamily demand = LinearSubstitutes{};
  CostFamily cost = LinearCost{};
  RnDTech tech;
};

enum class Regime { Bertrand, Cournot };

std::string to_string(Regime regime);

/// A symmetric market state: every firm at cost m, price p, quantity q.
struct SymmetricPoint {
  double m = 0.0;
  double p = 0.0;
  double q = 0.0;
};

/// Own/cross slopes of inverse (p_q_*) and direct (q_p_*) demand at a
/// symmetric point, with second partials d2p_i/dq_i^2, d2p_i/dq_i dq_j,
/// d2q_i/dp_i^2, d2q_i/dp_i dp_j.
struct DemandPartials {
  double p_q_own = 0.0;
  double p_q_cross = 0.0;
  double p_qq_own = 0.0;
  double p_qq_cross = 0.0;
  double q_p_own = 0.0;
  double q_p_cross = 0.0;
  double q_pp_own = 0.0;
  double q_pp_cross = 0.0;
};

struct CostPartials {
  double C = 0.0;
  double C_q = 0.0;
  double C_m = 0.0;
  double C_qq = 0.0;
  double C_qm = 0.0;
};

struct TechPartials {
  double Gamma = 0.0;
  double Gamma_k = 0.0;
  double Gamma_K = 0.0;
  double Gamma_kk = 0.0;
  double Gamma_KK = 0.0;
  double Gamma_kK = 0.0;
  double gamma = 0.0;
  double gamma_p = 0.0;
  double gamma_pp = 0.0;
};

double demand_intercept(const DemandFamily& demand);
double substitutability(const DemandFamily& demand);
/// Exponent c of the production cost (1 for LinearCost).
double cost_exponent(const CostFamily& cost);

/// Throws DomainError when a parameter is out of range. s = 0 is accepted
/// (independent goods); validate_model flags it as degenerate.
void check_parameters(const ModelSpec& spec);

std::vector<double> inverse_demand(const ModelSpec& spec, std::span<const double> q);
std::vector<double> direct_demand(const ModelSpec& spec, std::span<const double> p);

/// Analytic Jacobian dp_i/dq_j of inverse demand at an arbitrary point.
Eigen::MatrixXd inverse_demand_jacobian(const ModelSpec& spec, std::span<const double> q);

/// Common price when every firm sells q.
double symmetric_price(const ModelSpec& spec, double q);
/// Common quantity when every firm charges p.
double symmetric_quantity(const ModelSpec& spec, double p);
/// Symmetric quantity at which price reaches zero.
double max_symmetric_quantity(const ModelSpec& spec);

DemandPartials demand_partials(const ModelSpec& spec, const SymmetricPoint& point);
CostPartials cost_partials(const ModelSpec& spec, double m, double q);

/// Throws DomainError if k <= 0 or the direct effect does not dominate the spillover.
TechPartials tech_partials(const RnDTech& tech, double k, double K);
TechPartials tech_partials(const ModelSpec& spec, double k, double K);
/// Same values without the domain checks (used by validation).
TechPartials tech_partials_unchecked(const RnDTech& tech, double k, double K);

// -- validation ------------------------------------------------------------

/// Box probed by validate_model. Non-positive upper bounds mean "use the
/// default": 0.99 of the choke level for q and m, 1.0 for k.
struct ProbeRegion {
  double q_min = 0.01;
  double q_max = 0.0;
  double m_min = 0.01;
  double m_max = 0.0;
  double k_min = 0.01;
  double k_max = 0.0;
  int points = 25;
};

enum class CheckStatus { Pass, Violated, Degenerate };

std::string to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  int points_checked = 0;
  std::string location;  // first offending point, empty when passing
  double value = 0.0;    // value at the first offending point
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  const CheckResult* first_failure() const;
};

ValidationReport validate_model(const ModelSpec& spec, const ProbeRegion& probe = {});

}  // namespace oligo_rd
