// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "xheep/cli.hpp"

int main(int argc, char** argv) {
  return xheep::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
