#pragma once

// Command-line front end. Subcommands: simulate, train, estimate, compare,
// selftest. Exit codes: 0 success, 2 usage error, 3 data error, 4 training
// failure. All artifacts are written atomically (temp file + rename) and
// every artifact records the seed it was produced with.

#include <string>

namespace hess {

int run_cli(int argc, const char* const* argv);

// Writes content to path via a temporary sibling and an atomic rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace hess
