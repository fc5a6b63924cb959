#pragma once

#include "fiberbayes/io.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace fiberbayes {

/// Generator for one fiber bundle. A fiber is
///   O^T center(arc + sum_l c_l psi_l) + t + noise
/// with O = exp(rotation + rotation_spread z), t = translation +
/// translation_spread z and c = shape_mean + shape_spread z. The base curve
/// is a planar arc of the given length (mm) and total turning angle (rad);
/// psi_1 = sin(pi s) e_z, psi_2 = sin(2 pi s) e_y, psi_3 = sin(pi s) e_y.
/// The noise is a smooth random perturbation with pointwise standard
/// deviation close to `noise` (mm).
struct BundleSpec {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();
  double length = 40.0;
  double bend = 0.5;
  Eigen::Vector3d shape_mean = Eigen::Vector3d::Zero();
  double translation_spread = 1.0;
  double rotation_spread = 0.02;
  double shape_spread = 0.5;
  double noise = 0.2;
};

/// Subjects sharing the same bundle geometry.
struct SubjectClusterSpec {
  std::vector<BundleSpec> bundles;
  int subjects = 1;
  int scans_per_subject = 1;
  int fibers_per_bundle = 50;
  /// When positive, each scan draws its bundle sizes from
  /// round(N(fibers_per_bundle, count_sd^2)), floored at min_fibers_per_bundle.
  double count_sd = 0.0;
  int min_fibers_per_bundle = 1;
  /// Whole-scan offset (mm) drawn per scan; removed by per-scan demeaning.
  double scan_offset_spread = 0.0;
};

struct SynthSpec {
  std::vector<SubjectClusterSpec> clusters;
  Eigen::Index grid_size = kDefaultGridSize;
  std::uint64_t seed = 0;
  std::string region_a = "ra";
  std::string region_b = "rb";

  void validate() const;
};

struct SynthOutput {
  FiberDataset data;
  /// Per fiber: 0-based bundle index counted across all subject clusters.
  std::vector<int> fiber_labels;
  /// Per scan (first-appearance order): key and 0-based subject cluster.
  std::vector<std::string> scan_keys;
  std::vector<int> scan_labels;
};

/// Deterministic given spec.seed.
SynthOutput synth_generate(const SynthSpec& spec);

/// Named presets: "two-bundle", "population", "test-retest".
SynthSpec synth_preset(const std::string& name, std::uint64_t seed);
std::vector<std::string> synth_preset_names();

/// Noise-free bundle member with the given parameters (used by the forward
/// model and by tests that need known ground truth).
Curve synth_fiber(const BundleSpec& bundle, const Eigen::Vector3d& translation, const Eigen::Vector3d& rotation,
                  const Eigen::Vector3d& coeffs, Eigen::Index grid_size);

}  // namespace fiberbayes
