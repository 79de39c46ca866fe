#pragma once

// Subcommands of the oligo_rd executable. Each returns the process exit code:
// 0 success, 1 domain or usage error, 2 parse error, 3 I/O error.

#include <iosfwd>
#include <optional>
#include <string>

#include "oligo_rd/errors.hpp"

namespace oligo_rd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitIo = 3;

class IoError : public Error {
 public:
  using Error::Error;
};

struct SteadyArgs {
  std::string scenario;
  std::optional<std::string> regime;
  std::optional<std::string> mode;
  bool json = false;
};

struct CompareArgs {
  std::string scenario;
  std::optional<double> at_m;
  bool json = false;
  bool csv = false;
};

struct SweepArgs {
  std::string scenario;
  std::optional<std::string> out;
  std::optional<std::string> json_out;
};

struct SimulateArgs {
  std::string scenario;
  std::optional<std::string> out;
  bool halving = false;
};

int cmd_validate(const std::string& scenario, bool json, std::ostream& out, std::ostream& err);
int cmd_steady(const SteadyArgs& args, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

/// Full command line, including argv[0].
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "traj.csv" -> "traj.half.csv".
std::string halved_path(const std::string& path);

}  // namespace oligo_rd::cli
