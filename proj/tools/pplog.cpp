// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
// Command-line front end; see pplog/cli.hpp for the command implementations.

#include "pplog/cli.hpp"

int main(int argc, char** argv) { return pplog::cli_main(argc, argv); }
