#pragma once

// Scenario files: a small TOML-style format with the sections
//   [model] [probe] [steady] [compare] [sweep] [dynamics]
// Keys are `name = value` where value is a number, a quoted string, true or
// false, or a single-line array of numbers or strings. `#` starts a comment.

#include <optional>
#include <string>
#include <string_view>

#include "oligo_rd/analysis.hpp"
#include "oligo_rd/dynamics.hpp"
#include "oligo_rd/model.hpp"
#include "oligo_rd/steadystate.hpp"

namespace oligo_rd {

struct SteadySection {
  std::optional<Regime> regime;
  std::optional<Mode> mode;
  SteadyStateOptions options;
};

struct CompareSection {
  std::optional<double> m;
  bool feedback = false;
};

struct DynamicsSection {
  Policy policy = SteadyStateK{};
  std::vector<double> m0;  // one entry per firm after parsing
  double horizon = 50.0;
  double step = 0.01;
  std::optional<double> target_m;  // convergence is reported against this level
};

struct Scenario {
  ModelSpec model;
  ProbeRegion probe;
  std::optional<SteadySection> steady;
  std::optional<CompareSection> compare;
  std::optional<SweepGrid> sweep;
  std::optional<DynamicsSection> dynamics;
};

/// Throws ParseError for syntax errors, unknown sections or keys, and values
/// of the wrong type. Range checks are left to check_parameters.
Scenario parse_scenario(std::string_view text);

/// Canonical text form; parse_scenario(write_scenario(s)) reproduces s.
std::string write_scenario(const Scenario& scenario);

/// JSON echo of the model section, used in machine-readable reports.
std::string model_json(const ModelSpec& spec);

Regime parse_regime(std::string_view name);
Mode parse_mode(std::string_view name);

}  // namespace oligo_rd
