#pragma once

#include "fiberbayes/alignment.hpp"
#include "fiberbayes/features.hpp"
#include "fiberbayes/io.hpp"
#include "fiberbayes/ndp.hpp"
#include "fiberbayes/shape_basis.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace fiberbayes {

struct PreprocessOptions {
  /// Subtract each scan's mean fiber centroid (multi-subject runs).
  bool per_scan_demean = false;
  int basis_size = kDefaultBasisSize;
  /// Reuse a persisted basis instead of learning one from the data.
  std::optional<ShapeBasis> basis;
  /// Learn the template and basis from at most this many fibers, taken at
  /// an even stride (0 = all).
  int basis_fibers = 0;
  TemplateOptions template_options;
  int align_max_iter = 20;
  /// Global demean and unit-variance rescale of every feature coordinate.
  bool standardize = true;
};

/// Coordinate-wise statistics of one feature block. Coordinates with zero
/// variance keep scale 1.
struct BlockScaling {
  Component component;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

struct PreprocessRecord {
  /// Offsets subtracted per scan, in scan order (empty in single-subject mode).
  std::vector<std::string> scan_keys;
  std::vector<Eigen::Vector3d> scan_offsets;
  std::vector<BlockScaling> scaling;
  bool basis_learned = false;
};

struct PreparedData {
  FiberDataset data;
  ShapeBasis basis;
  std::vector<FiberDecomposition> decompositions;
  FeatureTable features;
  PreprocessRecord record;
};

/// Subtracts each scan's mean fiber centroid and returns the offsets.
std::vector<Eigen::Vector3d> demean_scans(FiberDataset& data);
void restore_scans(FiberDataset& data, const std::vector<Eigen::Vector3d>& offsets);

/// Centers every coordinate and divides by its population standard
/// deviation; returns the statistics applied.
std::vector<BlockScaling> standardize_features(FeatureTable& table);
void unstandardize_features(FeatureTable& table, const std::vector<BlockScaling>& scaling);

/// Template estimation followed by FPCA of the aligned shapes.
ShapeBasis learn_basis(const std::vector<Curve>& curves, int basis_size, const TemplateOptions& options = {});

/// Demean (optional), decompose every fiber, build and standardize features.
PreparedData preprocess(FiberDataset data, const std::vector<Component>& components,
                        const PreprocessOptions& options);

/// One SubjectData per scan with w_j = number of fibers in the scan.
std::vector<SubjectData> split_by_scan(const PreparedData& prepared);

}  // namespace fiberbayes
