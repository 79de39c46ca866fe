#include "oligo_rd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "oligo_rd/errors.hpp"
#include "oligo_rd/format.hpp"

namespace oligo_rd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(const std::vector<double>& k) {
  for (double x : k) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("investment levels must be positive");
  }
}

void check_table(const TableK& table) {
  if (table.times.empty() || table.times.size() != table.k.size()) {
    throw DomainError("investment table needs matching, non-empty times and k");
  }
  if (table.times.front() != 0.0) throw DomainError("investment table must start at t = 0");
  for (std::size_t j = 1; j < table.times.size(); ++j) {
    if (!(table.times[j] > table.times[j - 1])) throw DomainError("investment table times must increase");
  }
  require_positive(table.k);
}

// delta - Gamma(k_i, K_-i) per firm.
std::vector<double> growth_rates(const ModelSpec& spec, const std::vector<double>& k) {
  const double total = std::accumulate(k.begin(), k.end(), 0.0);
  std::vector<double> rate(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    rate[i] = spec.params.delta - tech_partials_unchecked(spec.tech, k[i], total - k[i]).Gamma;
  }
  return rate;
}

std::vector<double> check_initial(const ModelSpec& spec, std::span<const double> m0) {
  if (m0.size() != static_cast<std::size_t>(spec.params.n)) {
    throw DomainError("initial cost vector must have one entry per firm");
  }
  for (double x : m0) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("initial cost levels must be positive");
  }
  return {m0.begin(), m0.end()};
}

}  // namespace

std::vector<double> policy_investment(const ModelSpec& spec, const Policy& policy, double t) {
  const auto n = static_cast<std::size_t>(spec.params.n);
  std::vector<double> k = std::visit(
      overloaded{
          [&](const ConstantK& c) -> std::vector<double> {
            if (c.k.size() == 1) return std::vector<double>(n, c.k.front());
            if (c.k.size() != n) throw DomainError("constant policy needs 1 or n investment levels");
            return c.k;
          },
          [&](const SteadyStateK&) {
            return std::vector<double>(n, solve_k_star(spec.params, spec.tech));
          },
          [&](const TableK& table) {
            check_table(table);
            const auto it = std::upper_bound(table.times.begin(), table.times.end(), t);
            const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - table.times.begin() - 1, 0));
            return std::vector<double>(n, table.k[j]);
          }},
      policy);
  require_positive(k);
  return k;
}

Trajectory integrate(const ModelSpec& spec, const Policy& policy, std::span<const double> m0,
                     double horizon, double step) {
  check_parameters(spec);
  auto m = check_initial(spec, m0);
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("step must be positive");
  if (!(horizon >= step) || !std::isfinite(horizon)) throw DomainError("horizon must be at least one step");

  const auto n = m.size();
  const auto steps = static_cast<long>(std::ceil(horizon / step - 1e-9));

  // Uniform grid plus any table breakpoints, so no step straddles a switch.
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (long s = 0; s < steps; ++s) grid.push_back(static_cast<double>(s) * step);
  grid.push_back(horizon);
  if (const auto* table = std::get_if<TableK>(&policy)) {
    const double snap = 1e-9 * step;
    for (double b : table->times) {
      if (b <= 0.0 || b >= horizon) continue;
      const auto it = std::lower_bound(grid.begin(), grid.end(), b);
      if (*it - b < snap) {
        *it = b;
      } else if (b - *(it - 1) < snap) {
        *(it - 1) = b;
      } else {
        grid.insert(it, b);
      }
    }
  }

  Trajectory tr;
  tr.m.assign(n, {});
  tr.k.assign(n, {});
  const auto record = [&](double t) {
    tr.times.push_back(t);
    const auto k = policy_investment(spec, policy, t);
    for (std::size_t i = 0; i < n; ++i) {
      tr.m[i].push_back(m[i]);
      tr.k[i].push_back(k[i]);
    }
  };
  const auto axpy = [&](const std::vector<double>& x, double h, const std::vector<double>& d) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * d[i];
    return y;
  };

  record(grid.front());
  for (std::size_t s = 1; s < grid.size(); ++s) {
    const double h = grid[s] - grid[s - 1];
    // k is constant on the step
    const auto rate = growth_rates(spec, policy_investment(spec, policy, grid[s - 1] + 0.5 * h));
    const auto rhs = [&](const std::vector<double>& x) {
      std::vector<double> dx(n);
      for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] * rate[i];
      return dx;
    };
    const auto k1 = rhs(m);
    const auto k2 = rhs(axpy(m, 0.5 * h, k1));
    const auto k3 = rhs(axpy(m, 0.5 * h, k2));
    const auto k4 = rhs(axpy(m, h, k3));
    for (std::size_t i = 0; i < n; ++i) {
      m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    record(grid[s]);
  }

  const auto rate = growth_rates(spec, policy_investment(spec, policy, horizon));
  for (double r : rate) tr.terminal_residual = std::max(tr.terminal_residual, std::abs(r));
  return tr;
}

std::vector<double> exact_cost_levels(const ModelSpec& spec, const Policy& policy,
                                      std::span<const double> m0, double t) {
  auto m = check_initial(spec, m0);
  std::vector<double> log_growth(m.size(), 0.0);
  const auto accumulate_segment = [&](double from, double to) {
    const auto rate = growth_rates(spec, policy_investment(spec, policy, from));
    for (std::size_t i = 0; i < m.size(); ++i) log_growth[i] += rate[i] * (to - from);
  };
  if (const auto* table = std::get_if<TableK>(&policy)) {
    check_table(*table);
    for (std::size_t j = 0; j < table->times.size() && table->times[j] < t; ++j) {
      const double end = j + 1 < table->times.size() ? std::min(table->times[j + 1], t) : t;
      accumulate_segment(table->times[j], end);
    }
  } else {
    accumulate_segment(0.0, t);
  }
  for (std::size_t i = 0; i < m.size(); ++i) m[i] *= std::exp(log_growth[i]);
  return m;
}

ConvergenceReport convergence_report(const Trajectory& tr, const SteadyState& target) {
  ConvergenceReport rep;
  const double m_star = target.m_star;
  std::vector<double> ts;
  std::vector<double> logs;
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    double gap = 0.0;
    for (const auto& path : tr.m) gap = std::max(gap, std::abs(path[j] - m_star) / m_star);
    if (j + 1 == tr.times.size()) rep.final_gap = gap;
    if (gap > 0.0) {
      ts.push_back(tr.times[j]);
      logs.push_back(std::log(gap));
    }
  }
  rep.converged = rep.final_gap < 1e-6;

  if (ts.size() >= 2) {
    const double n = static_cast<double>(ts.size());
    const double t_mean = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
    const double l_mean = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      num += (ts[j] - t_mean) * (logs[j] - l_mean);
      den += (ts[j] - t_mean) * (ts[j] - t_mean);
    }
    rep.log_rate = den > 0.0 ? num / den : 0.0;
  }
  if (ts.empty()) {
    rep.half_life = 0.0;
  } else if (rep.log_rate < 0.0) {
    rep.half_life = std::log(2.0) / -rep.log_rate;
  } else {
    rep.half_life = std::numeric_limits<double>::infinity();
  }
  return rep;
}

void write_csv(std::ostream& out, const Trajectory& tr) {
  const auto n = tr.m.size();
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",m_" << i + 1;
  for (std::size_t i = 0; i < n; ++i) out << ",k_" << i + 1;
  out << '\n';
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    out << format_number(tr.times[j]);
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_number(tr.m[i][j]);
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_number(tr.k[i][j]);
    out << '\n';
  }
}

}  // namespace oligo_rd
