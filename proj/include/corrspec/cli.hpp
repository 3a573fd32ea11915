#pragma once

// Config-driven command line: one JSON config names a command, a model, the
// ensemble, solver settings and an output directory. Exit codes: 0 success,
// 2 invalid input, 3 numeric failure (non-convergence, bound violation, ...).

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "corrspec/concentration_harness.hpp"

namespace corrspec::cli {

enum class Command { simulate, solve, compare, universality, concentration, selftest };

std::string to_string(Command command);

struct KernelOverride {
  double constant = 1.0;  // f == constant on the grid
};

struct RunConfig {
  Command command = Command::selftest;
  ExperimentConfig experiment;
  std::optional<KernelOverride> kernel;  // solve: use a constant kernel instead of the model's
  std::optional<std::pair<double, double>> energy_window;
  int dependence = 0;                    // concentration: declared K
  std::vector<double> radii = {0.05, 0.1, 0.2};
  std::filesystem::path output = "corrspec-out";
  std::uint64_t seed = 0;
  nlohmann::json source;  // the config as read, models inlined
  std::string hash;
};

struct Flags {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

/// Parses a config document; `base_dir` resolves model files given by path.
/// Throws ConfigError naming the offending field (e.g. "/model/coefficients/0/offset").
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// Reads and parses a config file; malformed JSON raises ConfigError with line and column.
RunConfig load_config(const std::filesystem::path& path);

/// SHA-256 of the canonical (sorted-key, compact) serialization.
std::string config_hash(const nlohmann::json& doc);

/// Sets the global log level from CORRSPEC_LOG (error, warn, info, debug).
void configure_logging();

/// Runs a parsed config; artifacts appear in cfg.output only if no error is thrown.
/// Returns false when the run completed but one of its checks failed (exit code 3).
bool execute(const RunConfig& cfg);

/// Loads the config, applies the flag overrides and executes, mapping errors to exit codes.
int run(const Flags& flags);
/// Parses argv with --config, --out, --threads, --seed.
int run(int argc, char** argv);

struct SelftestCase {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The quick example suite; every case is self-contained and deterministic.
std::vector<SelftestCase> run_selftest();

}  // namespace corrspec::cli
