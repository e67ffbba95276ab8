// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "east/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return east::cli::run(args);
}
