#pragma once
#include <string>
#include <vector>

#include "rcv/sweep.hpp"

namespace rcv {

// Flat key-value configuration with [section] headers and '#' comments.
// Sections/keys are documented in the README; unknown ones are rejected so
// typos fail loudly instead of silently running defaults.
SweepSpec parse_sweep_spec(const std::string& text,
                           const std::vector<std::string>& overrides = {});
SweepSpec load_sweep_spec(const std::string& path,
                          const std::vector<std::string>& overrides = {});

// Canonical, fully-resolved rendering (every key explicit); parses back to
// the same spec. Used for manifest.txt.
std::string render_config(const SweepSpec& spec);

// "0.7:0.1:2.0" (inclusive linspace) or a comma list "0.1,0.5,1".
std::vector<double> parse_rho_grid(const std::string& text);

} // namespace rcv
