// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "run_config.hpp"

namespace canweave {

/// Runs one subcommand, writing its fixed-name outputs and the resolved spec
/// (run_spec.toml) under spec.out_dir. Returns a one-line JSON summary.
std::string run_command(const RunSpec &spec);

}  // namespace canweave
