#pragma once

#include <string>

namespace ebsde::cli {

// Executes one subcommand against a config file and writes its CSV outputs
// plus a manifest into the configured out_dir.
//
// Subcommands: validate, simulate, contraction, solve-finite,
// solve-discounted, ergodic, large-time, control, verify-all.
//
// Exit codes: 0 success / all checks passed; 2 a structured check failed
// (gate, tolerance, signal); 1 configuration or runtime error.
int run(const std::string& subcommand, const std::string& config_path);

}  // namespace ebsde::cli
