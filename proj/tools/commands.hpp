// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mhlora::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;      // bad flags, missing or unreadable inputs
inline constexpr int kExitData = 3;       // inputs disagree with each other
inline constexpr int kExitNumerical = 4;  // non-finite values, failed decompositions

struct RunOptions {
  // When set, a CHIMERA_SEED environment variable replaces --seed.
  bool allow_env_seed = true;
};

// Runs one command line. `args` excludes the program name, e.g.
// {"generate", "--count", "10", ...}. Errors are reported on `err` and mapped
// to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const RunOptions& opts = {});

int main_entry(int argc, char** argv);

}  // namespace mhlora::cli
