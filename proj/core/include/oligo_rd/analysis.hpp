#pragma once

// Regime and loop comparisons at a fixed cost level, comparative statics in
// n, and deterministic parameter sweeps over them.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oligo_rd/model.hpp"
#include "oligo_rd/reactions.hpp"
#include "oligo_rd/steadystate.hpp"

namespace oligo_rd {

enum class Verdict { Pass, Fail, Indistinguishable, NotApplicable };

std::string to_string(Verdict v);

/// Differences within this (scaled by max(1, |lhs|, |rhs|)) are indistinguishable.
inline constexpr double kVerdictTolerance = 1e-9;

/// Claim lhs > rhs.
Verdict verdict_greater(double lhs, double rhs);
/// Claim x < 0.
Verdict verdict_negative(double x);
/// Claim lhs == rhs: Pass when indistinguishable, Fail otherwise.
Verdict verdict_equal(double lhs, double rhs);

/// Bertrand against Cournot under open-loop play at a common m.
struct RegimeComparison {
  double q_B = 0.0;
  double q_C = 0.0;
  double k_B = 0.0;
  double k_C = 0.0;
  /// Cournot first-order condition evaluated at the Bertrand point, directly
  /// and through -q_B * gap / q_p_own with the factored gap.
  double cournot_foc_at_bertrand = 0.0;
  double cournot_foc_at_bertrand_factored = 0.0;
  double slope_gap = 0.0;  // 1 - q_p_own p_q_own at the Bertrand point
  Verdict output_order = Verdict::NotApplicable;      // q_B > q_C
  Verdict investment_order = Verdict::NotApplicable;  // k_B > k_C
  Verdict foc_sign = Verdict::NotApplicable;          // Cournot FOC at Bertrand point < 0
  Verdict gap_sign = Verdict::NotApplicable;          // slope gap < 0

  bool all_pass() const;
};

struct NStatics {
  double k_star = 0.0;
  double dk_dn = 0.0;
  double dnk_dn = 0.0;
  double nk_star = 0.0;
  Verdict dk_nonpositive = Verdict::NotApplicable;
  Verdict dnk_positive = Verdict::NotApplicable;

  bool all_pass() const;
};

struct LoopComparison {
  Regime regime = Regime::Bertrand;
  double k_open = 0.0;
  double k_closed = 0.0;
  std::optional<double> k_feedback;
  /// No positive investment solves the closed-loop condition; k_closed is the k = 0 corner.
  bool closed_corner = false;
  StrategicClass strategic_class = StrategicClass::Degenerate;
  double cross_reaction = 0.0;
  /// Substitutes: closed > open. Complements: closed < open. Degenerate: equal.
  Verdict sign_rule = Verdict::NotApplicable;
  /// Linear demand and cost only: Bertrand closed < open, Cournot closed > open.
  Verdict linear_rule = Verdict::NotApplicable;
  Verdict feedback_match = Verdict::NotApplicable;  // feedback == closed
};

struct ComparisonRow {
  ModelSpec spec;
  double m = 0.0;
  std::optional<RegimeComparison> regimes;
  std::optional<NStatics> statics;
  std::vector<LoopComparison> loops;
  std::string error;  // first failure, empty when every part was computed

  bool failed() const { return !error.empty(); }
};

RegimeComparison compare_regimes(const ModelSpec& spec, double m);
NStatics n_statics(const ModelSpec& spec);
/// Throws PreconditionError when beta != 0.
LoopComparison compare_loops(const ModelSpec& spec, Regime regime, double m, bool with_feedback = false);

/// Row with the regime comparison and the n statics. Solver errors propagate.
ComparisonRow compare_bertrand_cournot(const ModelSpec& spec, double m);

/// Row carrying only the loop comparison for one regime.
ComparisonRow compare_loops_row(const ModelSpec& spec, Regime regime, double m, bool with_feedback = false);

/// Every part; failures are recorded in `error` instead of thrown. Loop
/// comparisons run for both regimes when `modes` asks for closed or feedback
/// play and beta == 0.
ComparisonRow compare_all(const ModelSpec& spec, double m, const std::vector<Mode>& modes);

// -- sweeps ---------------------------------------------------------------

/// Axes left unset keep the template value (m defaults to base_m, or half the
/// demand intercept). At least one axis must be set, and set axes must be
/// non-empty.
struct SweepGrid {
  std::optional<std::vector<int>> n;
  std::optional<std::vector<double>> s;
  std::optional<std::vector<double>> m;
  std::optional<std::vector<double>> beta;
  std::optional<std::vector<double>> delta;
  std::optional<std::vector<double>> rho;
  std::optional<double> base_m;
  std::vector<Mode> modes{Mode::OpenLoop};
};

/// Cells in lexicographic order over (n, s, m, beta, delta, rho). Throws
/// DomainError("empty grid") when the grid has no points.
std::vector<std::pair<ModelSpec, double>> expand_grid(const ModelSpec& tmpl, const SweepGrid& grid);

struct SweepOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

std::vector<ComparisonRow> sweep(const ModelSpec& tmpl, const SweepGrid& grid,
                                 const SweepOptions& options = {});

struct SweepSummary {
  int rows = 0;
  int failures = 0;
  int statics_pass = 0;
  int statics_total = 0;
  int regimes_pass = 0;
  int regimes_total = 0;
  int loops_pass = 0;
  int loops_total = 0;
  // k_B - k_C over rows where it was computed.
  double gap_min = 0.0;
  double gap_max = 0.0;
  double gap_mean = 0.0;
};

SweepSummary summarize(const std::vector<ComparisonRow>& rows);
std::string summary_line(const SweepSummary& summary);

/// One header row plus one line per comparison row; empty fields for parts
/// not computed.
void write_rows_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

/// {"scenario": echo, "rows": [...], "summary": {...}}. `scenario_json` must
/// be a JSON document (use "null" for none).
void write_rows_json(std::ostream& out, const std::vector<ComparisonRow>& rows,
                     const std::string& scenario_json);

}  // namespace oligo_rd
