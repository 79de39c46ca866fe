#pragma once

// Symmetric static equilibria: price choice under Bertrand, output choice
// under Cournot, at a common cost level m.

#include <optional>

#include "oligo_rd/model.hpp"

namespace oligo_rd {

struct SocEntry {
  double value = 0.0;
  bool satisfied = false;

  static SocEntry from_value(double v) { return {v, v < 0.0}; }
};

struct SOCReport {
  SocEntry strategic;                 // price (Bertrand) or output (Cournot) second-order term
  std::optional<SocEntry> investment;  // R&D second-order term, when a costate is known
};

struct StaticEquilibrium {
  Regime regime = Regime::Bertrand;
  SymmetricPoint point;
  SOCReport soc;
  double foc_residual = 0.0;
  int roots_found = 0;
};

/// q + (p - C_q) dq_i/dp_i at the symmetric price p.
double bertrand_foc(const ModelSpec& spec, double m, double p);
/// p + dp_i/dq_i q - C_q at the symmetric quantity q.
double cournot_foc(const ModelSpec& spec, double m, double q);

double price_soc(const ModelSpec& spec, const SymmetricPoint& point);
double output_soc(const ModelSpec& spec, const SymmetricPoint& point);

/// Scans the symmetric FOC over (markup-zero price, choke) and returns the
/// largest-markup root that satisfies the price SOC. Throws NoSolutionError
/// when no root exists and SocViolation when every root fails the SOC.
StaticEquilibrium bertrand_static(const ModelSpec& spec, double m);

/// Same over quantities in (0, quantity at zero price).
StaticEquilibrium cournot_static(const ModelSpec& spec, double m);

StaticEquilibrium static_equilibrium(const ModelSpec& spec, Regime regime, double m);

/// -gamma''(k) - lambda_own Gamma_kk m - (n-1) lambda_other Gamma_KK m.
SocEntry soc_k(const ModelSpec& spec, double k, double m, double lambda_own, double lambda_other);

/// Supremum of cost levels with positive equilibrium output: a when the
/// cost exponent is 1, +inf otherwise.
double cost_choke(const ModelSpec& spec);

}  // namespace oligo_rd
