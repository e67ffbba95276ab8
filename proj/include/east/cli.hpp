// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace east::cli {

/// Entry point behind the `east` binary. Returns the process exit status:
/// 0 success, 2 usage/config error, 3 runtime failure.
int run(const std::vector<std::string>& args);

}  // namespace east::cli
