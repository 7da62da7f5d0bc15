#pragma once

// Command-line front end: gen, solve, experiment, reduce, mapback.
// Exit codes: 0 converged, 1 usage or input error, 2 nonconvergence or a
// flagged experiment, 3 internal numerical failure.

#include <iosfwd>
#include <string>
#include <vector>

#include "ipmlab/lp_model.hpp"

namespace ipmlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,
  kExitNoConvergence = 2,
  kExitNumerical = 3,
};

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Best-effort interior start for an LP given without one: least-norm x
/// pushed into the positive orthant along the null-space image of 1, y = 0
/// when c > 0, then damped centering steps until the point is in N₂(0.25).
/// Throws InvalidStartError when no such point is found.
PrimalDualPoint<double> construct_start(const LinearProgram<double>& lp);

}  // namespace ipmlab
