#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thermotrack {

/// Runs one subcommand (`track`, `eval`, `synth`, `stats`, `translate-score`)
/// given the arguments after the program name. Returns the exit code: 0 on
/// success, 2 for usage errors, 1 otherwise. Failures print one line on
/// `err` that starts with the error category.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermotrack
