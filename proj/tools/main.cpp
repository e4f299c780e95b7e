// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

int main(int argc, char** argv) { return mhlora::cli::main_entry(argc, argv); }
