#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 runtime
// failure (bad file, dimension mismatch, solver divergence).
namespace obcs::cli {

int run(int argc, const char* const* argv);

extern const char* const kVersion;

}  // namespace obcs::cli
