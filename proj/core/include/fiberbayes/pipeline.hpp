#pragma once

#include "fiberbayes/features.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fiberbayes {

enum class Stage { Synth, Decompose, FitSingle, FitNdp, Eval, Reconstruct };

std::string_view stage_name(Stage s);
Stage parse_stage(std::string_view name);

/// Environment variable that overrides the output directory.
inline constexpr const char* kOutDirEnv = "FIBERBAYES_OUT";

struct RunConfig {
  Stage stage = Stage::Synth;
  std::filesystem::path out = "out";
  std::filesystem::path input;
  std::filesystem::path truth;
  std::filesystem::path estimate;
  std::filesystem::path basis;
  std::filesystem::path decomposition;
  std::string preset = "two-bundle";
  std::vector<Component> components{Component::Translation, Component::Shape, Component::Rotation};
  /// 0 and -1 select the stage defaults (K = 10 / 9, 11000 / 5000
  /// iterations, 1000 / 500 burn-in).
  int K = 0;
  int L = 15;
  int iters = 0;
  int burnin = -1;
  int thin = 1;
  std::optional<std::uint64_t> seed;
  bool joint_counts = false;
  int min_fibers = 30;
  long grid = 100;
  int basis_size = 3;
  int basis_fibers = 100;
  int template_iters = 5;
  int param_stride = 0;

  /// Builds a config from flat key/value settings (config-file keys equal
  /// the long CLI flag names). Unknown keys are rejected.
  static RunConfig from_settings(Stage stage, const std::map<std::string, std::string>& settings);
  void validate() const;
  /// The settings that reproduce this config, for the manifest.
  std::map<std::string, std::string> settings() const;
};

/// Runs one stage, writing artifacts plus manifest.json under config.out.
/// On failure the partial artifacts are removed, a FAILED marker with the
/// diagnostic is written, and the return value is nonzero.
int run(const RunConfig& config, std::ostream& log);

}  // namespace fiberbayes
