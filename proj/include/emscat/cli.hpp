#pragma once

#include "emscat/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace emscat {

// simulate, asymptotics, bounds, invert, counterexample, verify-small-angle
const std::vector<std::string>& command_names();

// Runs one command and writes its artifacts under cfg.out. Returns the exit
// status: 0 ok, 2 configuration error, 3 numeric failure, 4 precondition or
// coverage failure. Progress goes to log, error messages to err.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace emscat
