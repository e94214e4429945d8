#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "tensopt/llm/backend.hpp"
#include "tensopt/search/config.hpp"
#include "tensopt/search/search.hpp"
#include "tensopt/sim/config.hpp"
#include "tensopt/verify/workload.hpp"

namespace tensopt::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one run needs, read from an INI file. Relative paths in the file
/// resolve against the file's directory. See docs/config.md for the keys.
struct RunConfig {
  std::filesystem::path source;  // the INI file itself
  sim::AcceleratorConfig accel;
  verify::WorkloadSpec workload;
  std::filesystem::path start_kernel;  // empty when the file names none
  search::SearchConfig search;
  search::ReuseParams reuse;
  int refine = 0;
  std::optional<std::filesystem::path> manifest;  // scripted mode
  std::filesystem::path output_dir = "out";
};

/// Throws ConfigError on unknown sections or keys, bad values, a missing or
/// ambiguous backend, a key stored in the file, or a missing referenced file.
/// `need_backend` is false for commands that never call a model.
RunConfig load_run_config(const std::filesystem::path& path, bool need_backend = true);

/// Backends for the run: one scripted backend, or one HTTP backend per model.
search::Backends make_backends(const RunConfig& rc);

}  // namespace tensopt::cli
