#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qocc/measure.hpp"

namespace qocc::cli {

/// Runs one command line (args[0] is the program name). Machine-readable
/// output goes to `out`, diagnostics to `err`. Returns 0 on success, 1 on a
/// runtime or check failure, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// {kind, entries: [[location, weight]], support_bound[, sigma, warp]}
nlohmann::json measure_to_json(const spectral::Measure& mu);
spectral::Measure measure_from_json(const nlohmann::json& doc);

/// Shortest text that reads back to the same double ("%.17g").
std::string format_double(double v);

} // namespace qocc::cli
