#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

double bertrand_price(double a, double s, int n, double m) {
  return (a * (1 - s) + m * (1 + (n - 2) * s)) / (2 + (n - 3) * s);
}

double bertrand_quantity(double a, double s, int n, double m) {
  return (a - m) * (1 + (n - 2) * s) / ((2 + (n - 3) * s) * (1 + (n - 1) * s));
}

double cournot_quantity(double a, double s, int n, double m) { return (a - m) / (2 + (n - 1) * s); }

double open_loop_k(double m, double q, double b, double rho) { return m * q / (2 * b * rho); }

std::vector<double> linear_joint_roots(double a, double c, double b, double rho, double delta) {
  // m^2 - a m + 2 b rho delta / c = 0
  const double disc = a * a - 4 * (2 * b * rho * delta / c);
  if (disc < 0) return {};
  const double r = std::sqrt(disc);
  return {(a - r) / 2, (a + r) / 2};
}

Eigen::MatrixXd invert_dense(double p_own, double p_cross, int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Constant(n, n, p_cross);
  j.diagonal().setConstant(p_own);
  return j.fullPivLu().inverse();
}

namespace {

using System = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd newton(const System& f, Eigen::VectorXd x) {
  const auto n = x.size();
  for (int iter = 0; iter < 60; ++iter) {
    const Eigen::VectorXd fx = f(x);
    if (fx.lpNorm<Eigen::Infinity>() < 1e-15) return x;
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      Eigen::VectorXd up = x;
      Eigen::VectorXd dn = x;
      up[j] += h;
      dn[j] -= h;
      jac.col(j) = (f(up) - f(dn)) / (2 * h);
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(fx);
    x -= step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-16 * (1 + x.lpNorm<Eigen::Infinity>())) return x;
  }
  if (f(x).lpNorm<Eigen::Infinity>() > 1e-11) throw std::runtime_error("oracle Newton did not converge");
  return x;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<double> solve_bertrand(const ModelSpec& spec, const std::vector<double>& m,
                                   std::vector<double> start) {
  const System foc = [&](const Eigen::VectorXd& p) {
    const auto pv = to_vec(p);
    const auto q = oligo_rd::direct_demand(spec, pv);
    const Eigen::MatrixXd dq_dp = oligo_rd::inverse_demand_jacobian(spec, q).inverse();
    Eigen::VectorXd out(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double mc = oligo_rd::cost_partials(spec, m[i], q[i]).C_q;
      out[i] = q[i] + (p[i] - mc) * dq_dp(i, i);
    }
    return out;
  };
  return to_vec(newton(foc, Eigen::Map<Eigen::VectorXd>(start.data(), start.size())));
}

std::vector<double> solve_cournot(const ModelSpec& spec, const std::vector<double>& m,
                                  std::vector<double> start) {
  const System foc = [&](const Eigen::VectorXd& q) {
    const auto qv = to_vec(q);
    const auto p = oligo_rd::inverse_demand(spec, qv);
    const Eigen::MatrixXd dp_dq = oligo_rd::inverse_demand_jacobian(spec, qv);
    Eigen::VectorXd out(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      out[i] = p[i] + dp_dq(i, i) * q[i] - oligo_rd::cost_partials(spec, m[i], q[i]).C_q;
    }
    return out;
  };
  return to_vec(newton(foc, Eigen::Map<Eigen::VectorXd>(start.data(), start.size())));
}

namespace {

template <class Solve>
FdReaction fd_reaction(const ModelSpec& spec, double m, double x_sym, double h, Solve solve) {
  const auto n = static_cast<std::size_t>(spec.params.n);
  std::vector<double> up(n, m);
  std::vector<double> dn(n, m);
  up[0] += h;
  dn[0] -= h;
  const std::vector<double> start(n, x_sym);
  const auto xu = solve(spec, up, start);
  const auto xd = solve(spec, dn, start);
  return {(xu[0] - xd[0]) / (2 * h), (xu[1] - xd[1]) / (2 * h)};
}

}  // namespace

FdReaction fd_price_reaction(const ModelSpec& spec, double m, double p_sym, double h) {
  return fd_reaction(spec, m, p_sym, h, solve_bertrand);
}

FdReaction fd_quantity_reaction(const ModelSpec& spec, double m, double q_sym, double h) {
  return fd_reaction(spec, m, q_sym, h, solve_cournot);
}

double rel_err(double x, double ref) {
  if (ref == 0.0) return std::abs(x);
  return std::abs(x - ref) / std::abs(ref);
}

}  // namespace oracle
