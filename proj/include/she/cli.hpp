#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace she {

/// Entry point of the `she` tool. Returns 0 on success (all points feasible),
/// 1 on usage or configuration errors, 2 when a run completed with infeasible
/// operating points.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace she
