#pragma once

#include "locsim/sim/monte_carlo.hpp"
#include "locsim/sim/scenario.hpp"

#include <string>
#include <vector>

namespace locsim {

/// Write trials.csv, cdf_<solver>.csv per solver, summary.json and
/// run_manifest.json into out_dir (created if missing). Byte-deterministic
/// for identical inputs.
void emit_outputs(const Scenario &scn, const RunResult &run,
                  const std::string &out_dir);

/// Format a double with full round-trip precision (shortest %.17g form).
std::string format_double(double v);

} // namespace locsim
