#pragma once

// Built-in experiments on the 3x3 grid.

#include "qfa/scenario_io.hpp"

#include <string_view>
#include <vector>

namespace qfa {

/// baseline, load, fidelity-sweep, heterogeneous, coherence, frontier
std::vector<std::string_view> preset_names();

/// Throws ConfigError for an unknown name.
ExperimentSpec make_preset(std::string_view name);

} // namespace qfa
