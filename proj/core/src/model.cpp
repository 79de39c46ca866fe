#include "oligo_rd/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "oligo_rd/errors.hpp"
#include "oligo_rd/format.hpp"
#include "oligo_rd/roots.hpp"

namespace oligo_rd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Own-quantity term f(q) in p_i = a - f(q_i) - s * sum_{j != i} q_j.
double own_term(const DemandFamily& d, double q) {
  return std::visit(overloaded{[&](const LinearSubstitutes&) { return q; },
                               [&](const PowerInverse& f) { return std::pow(q, f.eta); }},
                    d);
}

double own_term_d1(const DemandFamily& d, double q) {
  return std::visit(
      overloaded{[&](const LinearSubstitutes&) { return 1.0; },
                 [&](const PowerInverse& f) { return f.eta * std::pow(q, f.eta - 1.0); }},
      d);
}

double own_term_d2(const DemandFamily& d, double q) {
  return std::visit(overloaded{[&](const LinearSubstitutes&) { return 0.0; },
                               [&](const PowerInverse& f) {
                                 if (f.eta == 1.0) return 0.0;
                                 return f.eta * (f.eta - 1.0) * std::pow(q, f.eta - 2.0);
                               }},
                    d);
}

std::vector<double> inverse_demand_raw(const ModelSpec& spec, std::span<const double> q) {
  const double a = demand_intercept(spec.demand);
  const double s = substitutability(spec.demand);
  const double total = std::accumulate(q.begin(), q.end(), 0.0);
  std::vector<double> p(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = a - own_term(spec.demand, q[i]) - s * (total - q[i]);
  }
  return p;
}

void require_size(const ModelSpec& spec, std::size_t size, const char* what) {
  if (size != static_cast<std::size_t>(spec.params.n)) {
    throw DomainError(std::string(what) + " vector must have one entry per firm");
  }
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> invert_power_demand(const ModelSpec& spec, std::span<const double> p) {
  const int n = spec.params.n;
  const double mean_p = std::accumulate(p.begin(), p.end(), 0.0) / n;
  const double scale = std::max(1.0, *std::max_element(p.begin(), p.end()));
  const double tol = 1e-12 * scale;

  std::vector<double> q(n, symmetric_quantity(spec, std::clamp(mean_p, 0.0, demand_intercept(spec.demand))));
  auto residual = [&](const std::vector<double>& x) {
    auto r = inverse_demand_raw(spec, x);
    for (int i = 0; i < n; ++i) r[i] -= p[i];
    return r;
  };

  std::vector<double> r = residual(q);
  double norm = max_abs(r);
  int polish = 0;
  for (int iter = 0; iter < 100; ++iter) {
    if (norm <= tol) {
      // A few extra steps while the residual keeps falling buys full precision.
      if (++polish > 3 || norm == 0.0) break;
    }
    const Eigen::MatrixXd J = inverse_demand_jacobian(spec, q);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -r[i];
    const Eigen::VectorXd dq = J.partialPivLu().solve(rhs);
    if (!dq.allFinite()) break;

    double t = 1.0;
    bool accepted = false;
    while (t > 1e-10) {
      std::vector<double> trial(n);
      bool positive = true;
      for (int i = 0; i < n; ++i) {
        trial[i] = q[i] + t * dq[i];
        if (trial[i] < 0.0) positive = false;
      }
      if (positive) {
        auto r_trial = residual(trial);
        const double n_trial = max_abs(r_trial);
        if (n_trial < norm || (norm <= tol && n_trial <= norm)) {
          q = std::move(trial);
          r = std::move(r_trial);
          norm = n_trial;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  if (!(norm <= tol)) {
    throw DomainError("direct demand inversion failed: prices outside the admissible region");
  }
  return q;
}

}  // namespace

std::string to_string(Regime regime) {
  return regime == Regime::Bertrand ? "bertrand" : "cournot";
}

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Violated: return "violated";
    case CheckStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

double demand_intercept(const DemandFamily& demand) {
  return std::visit([](const auto& d) { return d.a; }, demand);
}

double substitutability(const DemandFamily& demand) {
  return std::visit([](const auto& d) { return d.s; }, demand);
}

double cost_exponent(const CostFamily& cost) {
  return std::visit(overloaded{[](const LinearCost&) { return 1.0; },
                               [](const PowerCost& c) { return c.c; }},
                    cost);
}

void check_parameters(const ModelSpec& spec) {
  const auto fail = [](const std::string& msg) { throw DomainError(msg); };
  const auto& mp = spec.params;
  if (mp.n < 2) fail("n must be at least 2");
  if (!(mp.rho > 0.0) || !std::isfinite(mp.rho)) fail("rho must be positive");
  if (!(mp.delta > 0.0 && mp.delta < 1.0)) fail("delta must lie in (0, 1)");

  const double a = demand_intercept(spec.demand);
  const double s = substitutability(spec.demand);
  if (!(a > 0.0) || !std::isfinite(a)) fail("demand intercept a must be positive");
  if (!(s >= 0.0 && s < 1.0)) fail("substitutability s must lie in [0, 1)");
  if (const auto* pw = std::get_if<PowerInverse>(&spec.demand)) {
    if (!(pw->eta > 0.0) || !std::isfinite(pw->eta)) fail("eta must be positive");
  }
  if (!(cost_exponent(spec.cost) >= 1.0) || !std::isfinite(cost_exponent(spec.cost))) {
    fail("cost exponent c must be at least 1");
  }

  const auto& t = spec.tech;
  if (!(t.alpha > 0.0 && t.alpha <= 1.0)) fail("alpha must lie in (0, 1]");
  if (!(t.beta >= 0.0 && t.beta < 1.0)) fail("beta must lie in [0, 1)");
  if (!(t.b > 0.0) || !std::isfinite(t.b)) fail("R&D cost scale b must be positive");
  if (!(t.g > 1.0) || !std::isfinite(t.g)) fail("R&D cost exponent g must exceed 1");
}

std::vector<double> inverse_demand(const ModelSpec& spec, std::span<const double> q) {
  require_size(spec, q.size(), "quantity");
  for (double x : q) {
    if (!(x >= 0.0)) throw DomainError("quantities must be non-negative");
  }
  auto p = inverse_demand_raw(spec, q);
  for (double x : p) {
    if (!(x > 0.0)) throw DomainError("inverse demand yields a non-positive price");
  }
  return p;
}

std::vector<double> direct_demand(const ModelSpec& spec, std::span<const double> p) {
  require_size(spec, p.size(), "price");
  for (double x : p) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("prices must be positive");
  }
  const int n = spec.params.n;
  const double a = demand_intercept(spec.demand);
  std::vector<double> q;
  if (const auto* lin = std::get_if<LinearSubstitutes>(&spec.demand)) {
    const double s = lin->s;
    const double phi = 1.0 + (n - 1) * s;
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    q.resize(n);
    for (int i = 0; i < n; ++i) {
      q[i] = (a * (1.0 - s) - (phi - s) * p[i] + s * (total - p[i])) / ((1.0 - s) * phi);
    }
  } else {
    q = invert_power_demand(spec, p);
  }
  for (double& x : q) {
    if (x < -1e-12 * (1.0 + a)) throw DomainError("prices imply negative demand");
    x = std::max(x, 0.0);
  }
  return q;
}

Eigen::MatrixXd inverse_demand_jacobian(const ModelSpec& spec, std::span<const double> q) {
  require_size(spec, q.size(), "quantity");
  const int n = spec.params.n;
  const double s = substitutability(spec.demand);
  Eigen::MatrixXd J = Eigen::MatrixXd::Constant(n, n, -s);
  for (int i = 0; i < n; ++i) J(i, i) = -own_term_d1(spec.demand, q[i]);
  return J;
}

double symmetric_price(const ModelSpec& spec, double q) {
  if (!(q >= 0.0)) throw DomainError("quantity must be non-negative");
  const double a = demand_intercept(spec.demand);
  const double s = substitutability(spec.demand);
  return a - own_term(spec.demand, q) - s * (spec.params.n - 1) * q;
}

double symmetric_quantity(const ModelSpec& spec, double p) {
  const double a = demand_intercept(spec.demand);
  const double s = substitutability(spec.demand);
  const int n = spec.params.n;
  if (!(p >= 0.0 && p <= a)) throw DomainError("symmetric price must lie in [0, a]");
  if (p == a) return 0.0;
  if (std::holds_alternative<LinearSubstitutes>(spec.demand)) {
    return (a - p) / (1.0 + (n - 1) * s);
  }
  const double eta = std::get<PowerInverse>(spec.demand).eta;
  const auto f = [&](double x) { return a - std::pow(x, eta) - s * (n - 1) * x - p; };
  const double hi = std::pow(a - p, 1.0 / eta);
  return roots::refine(f, roots::Bracket{0.0, hi, a - p, f(hi)});
}

double max_symmetric_quantity(const ModelSpec& spec) { return symmetric_quantity(spec, 0.0); }

DemandPartials demand_partials(const ModelSpec& spec, const SymmetricPoint& point) {
  const double q = point.q;
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("symmetric quantity must be positive");
  if (!(symmetric_price(spec, q) > 0.0)) throw DomainError("symmetric point has non-positive price");
  const int n = spec.params.n;

  DemandPartials d;
  d.p_q_own = -own_term_d1(spec.demand, q);
  d.p_q_cross = -substitutability(spec.demand);
  d.p_qq_own = -own_term_d2(spec.demand, q);
  d.p_qq_cross = 0.0;

  // Inverse of J = diag_gap * I + p_q_cross * 11^T (Sherman-Morrison).
  const double diag_gap = d.p_q_own - d.p_q_cross;
  const double row_sum = d.p_q_own + (n - 1) * d.p_q_cross;
  if (diag_gap == 0.0 || row_sum == 0.0) throw SingularityError("inverse demand Jacobian is singular");
  const double A = 1.0 / diag_gap - d.p_q_cross / (diag_gap * row_sum);
  const double B = -d.p_q_cross / (diag_gap * row_sum);
  d.q_p_own = A;
  d.q_p_cross = B;

  // Both families carry curvature only in d2p_i/dq_i^2 (= h), so
  // d(J^-1)_ij/dp_k = -h * sum_l M_il M_lj M_lk.
  const double h = d.p_qq_own;
  d.q_pp_own = -h * (A * A * A + (n - 1) * B * B * B);
  d.q_pp_cross = -h * (A * A * B + A * B * B + (n - 2) * B * B * B);
  return d;
}

CostPartials cost_partials(const ModelSpec& spec, double m, double q) {
  if (!(m > 0.0) || !(q > 0.0)) throw DomainError("cost partials need m > 0 and q > 0");
  const double c = cost_exponent(spec.cost);
  CostPartials out;
  if (c == 1.0) {
    out = {m * q, m, q, 0.0, 1.0};
  } else {
    const double qc1 = std::pow(q, c - 1.0);
    out.C = m * qc1 * q;
    out.C_q = c * m * qc1;
    out.C_m = qc1 * q;
    out.C_qq = c * (c - 1.0) * m * std::pow(q, c - 2.0);
    out.C_qm = c * qc1;
  }
  return out;
}

TechPartials tech_partials_unchecked(const RnDTech& t, double k, double K) {
  TechPartials out;
  const double ka1 = std::pow(k, t.alpha - 1.0);
  out.Gamma = ka1 * k + t.beta * K;
  out.Gamma_k = t.alpha * ka1;
  out.Gamma_K = t.beta;
  out.Gamma_kk = t.alpha == 1.0 ? 0.0 : t.alpha * (t.alpha - 1.0) * std::pow(k, t.alpha - 2.0);
  out.Gamma_KK = 0.0;
  out.Gamma_kK = 0.0;
  const double kg1 = std::pow(k, t.g - 1.0);
  out.gamma = t.b * kg1 * k;
  out.gamma_p = t.b * t.g * kg1;
  out.gamma_pp = t.g == 2.0 ? 2.0 * t.b : t.b * t.g * (t.g - 1.0) * std::pow(k, t.g - 2.0);
  return out;
}

TechPartials tech_partials(const RnDTech& tech, double k, double K) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("own investment k must be positive");
  if (!(K >= 0.0)) throw DomainError("rivals' investment K must be non-negative");
  auto out = tech_partials_unchecked(tech, k, K);
  if (!(std::abs(out.Gamma_k) > std::abs(out.Gamma_K))) {
    throw DomainError("direct R&D effect does not dominate the spillover at k = " + format_number(k));
  }
  return out;
}

TechPartials tech_partials(const ModelSpec& spec, double k, double K) {
  return tech_partials(spec.tech, k, K);
}

// -- validation ------------------------------------------------------------

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.status == CheckStatus::Pass; });
}

const CheckResult* ValidationReport::first_failure() const {
  for (const auto& c : checks) {
    if (c.status != CheckStatus::Pass) return &c;
  }
  return nullptr;
}

namespace {

enum class Sign { Negative, NonPositive, Positive, NonNegative };

CheckStatus classify(double v, Sign want) {
  constexpr double zero_tol = 1e-15;
  const bool is_zero = std::abs(v) <= zero_tol;
  switch (want) {
    case Sign::Negative: return v < -zero_tol ? CheckStatus::Pass : is_zero ? CheckStatus::Degenerate : CheckStatus::Violated;
    case Sign::Positive: return v > zero_tol ? CheckStatus::Pass : is_zero ? CheckStatus::Degenerate : CheckStatus::Violated;
    case Sign::NonPositive: return v <= zero_tol ? CheckStatus::Pass : CheckStatus::Violated;
    case Sign::NonNegative: return v >= -zero_tol ? CheckStatus::Pass : CheckStatus::Violated;
  }
  return CheckStatus::Violated;
}

class CheckSet {
 public:
  void record(const std::string& name, double value, Sign want, const std::string& where) {
    auto& c = find(name);
    ++c.points_checked;
    if (c.status != CheckStatus::Pass) return;
    const auto st = classify(value, want);
    if (st != CheckStatus::Pass) {
      c.status = st;
      c.location = where;
      c.value = value;
    }
  }

  void fail(const std::string& name, const std::string& where) {
    auto& c = find(name);
    ++c.points_checked;
    if (c.status == CheckStatus::Pass) {
      c.status = CheckStatus::Violated;
      c.location = where;
    }
  }

  std::vector<CheckResult> take() { return std::move(checks_); }

 private:
  CheckResult& find(const std::string& name) {
    for (auto& c : checks_) {
      if (c.name == name) return c;
    }
    CheckResult fresh;
    fresh.name = name;
    checks_.push_back(std::move(fresh));
    return checks_.back();
  }
  std::vector<CheckResult> checks_;
};

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out;
  if (points <= 1) return {lo};
  for (int i = 0; i < points; ++i) out.push_back(lo + (hi - lo) * i / (points - 1));
  return out;
}

}  // namespace

ValidationReport validate_model(const ModelSpec& spec, const ProbeRegion& probe) {
  ValidationReport report;
  CheckSet checks;
  try {
    check_parameters(spec);
    checks.record("parameters", 1.0, Sign::Positive, "");
  } catch (const Error& e) {
    checks.fail("parameters", e.what());
    report.checks = checks.take();
    return report;
  }

  const int pts = std::max(probe.points, 2);
  const int n = spec.params.n;
  const double a = demand_intercept(spec.demand);
  const double q_hi = probe.q_max > 0.0 ? probe.q_max : 0.99 * max_symmetric_quantity(spec);
  const double m_hi = probe.m_max > 0.0 ? probe.m_max : 0.99 * a;
  const double k_hi = probe.k_max > 0.0 ? probe.k_max : 1.0;

  for (double q : linspace(probe.q_min, q_hi, pts)) {
    const std::string where = "q=" + format_number(q, 6);
    try {
      const auto d = demand_partials(spec, SymmetricPoint{0.0, symmetric_price(spec, q), q});
      checks.record("inverse_own_slope_negative", d.p_q_own, Sign::Negative, where);
      checks.record("inverse_cross_slope_negative (substitutes)", d.p_q_cross, Sign::Negative, where);
      checks.record("direct_own_slope_negative", d.q_p_own, Sign::Negative, where);
      checks.record("direct_cross_slope_positive (substitutes)", d.q_p_cross, Sign::Positive, where);
      checks.record("slope_product_exceeds_one", d.q_p_own * d.p_q_own - 1.0, Sign::Positive, where);
    } catch (const Error& e) {
      checks.fail("demand_admissible", where + ": " + e.what());
    }
  }

  for (double m : linspace(probe.m_min, m_hi, pts)) {
    for (double q : linspace(probe.q_min, q_hi, pts)) {
      const std::string where = "m=" + format_number(m, 6) + ", q=" + format_number(q, 6);
      try {
        const auto c = cost_partials(spec, m, q);
        checks.record("marginal_cost_positive", c.C_q, Sign::Positive, where);
        checks.record("cost_increasing_in_m", c.C_m, Sign::Positive, where);
        checks.record("cross_partial_C_qm_positive", c.C_qm, Sign::Positive, where);
      } catch (const Error& e) {
        checks.fail("cost_admissible", where + ": " + e.what());
      }
    }
  }

  for (double k : linspace(probe.k_min, k_hi, pts)) {
    const double K = (n - 1) * k;
    const std::string where = "k=" + format_number(k, 6) + ", K=" + format_number(K, 6);
    if (!(k > 0.0)) {
      checks.fail("tech_admissible", where + ": k must be positive");
      continue;
    }
    const auto t = tech_partials_unchecked(spec.tech, k, K);
    checks.record("Gamma_positive", t.Gamma, Sign::Positive, where);
    checks.record("Gamma_k_positive", t.Gamma_k, Sign::Positive, where);
    checks.record("Gamma_K_nonnegative", t.Gamma_K, Sign::NonNegative, where);
    checks.record("Gamma_kk_nonpositive", t.Gamma_kk, Sign::NonPositive, where);
    checks.record("Gamma_KK_nonpositive", t.Gamma_KK, Sign::NonPositive, where);
    checks.record("Gamma_kK_nonpositive", t.Gamma_kK, Sign::NonPositive, where);
    checks.record("direct_effect_exceeds_spillover", std::abs(t.Gamma_k) - std::abs(t.Gamma_K),
                  Sign::Positive, where);
    checks.record("rnd_cost_increasing", t.gamma_p, Sign::Positive, where);
    checks.record("rnd_cost_convex", t.gamma_pp, Sign::Positive, where);
  }

  report.checks = checks.take();
  return report;
}

}  // namespace oligo_rd
