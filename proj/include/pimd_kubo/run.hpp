#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "pimd_kubo/config.hpp"
#include "pimd_kubo/parallel.hpp"

namespace pimd_kubo {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitRuntime = 3 };

struct RunOptions {
  Parallelism par = Parallelism::from_environment();
  // Replaces output_dir from the config when set.
  std::optional<std::filesystem::path> output_dir;
  int verbosity = 0;
};

// Parses, validates and executes a run. Artifacts are written only after the
// whole computation succeeded, so a failing run leaves no files behind.
// Errors are reported on `log`; the return value is the process exit code.
int run(const std::string& config_text, const RunOptions& options, std::ostream& log);

}  // namespace pimd_kubo
