#pragma once

#include <Eigen/Core>

namespace fiberbayes {

/// Rotations whose angle is within this distance of pi are rejected by the
/// log map.
inline constexpr double kPiMargin = 1e-6;

/// Below this angle the exp/log maps switch to Taylor expansions.
inline constexpr double kSmallAngle = 1e-4;

/// A proper rotation matrix.
///
/// Construction re-projects onto SO(3) through the SVD when the input has
/// drifted from orthogonality by more than 1e-9, and rejects inputs that
/// are not close to a rotation at all.
class RotationSO3 {
 public:
  RotationSO3() : mat_(Eigen::Matrix3d::Identity()) {}
  explicit RotationSO3(const Eigen::Matrix3d& mat);

  static RotationSO3 identity() { return RotationSO3(); }

  const Eigen::Matrix3d& matrix() const { return mat_; }
  RotationSO3 transpose() const;
  RotationSO3 operator*(const RotationSO3& other) const;

 private:
  Eigen::Matrix3d mat_;
};

/// Closest rotation to an arbitrary 3×3 matrix in Frobenius norm.
Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& m);

/// Skew matrix A_v = [[0,-v1,v2],[v1,0,-v3],[-v2,v3,0]].
Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Inverse of skew() on skew-symmetric input.
Eigen::Vector3d unskew(const Eigen::Matrix3d& a);

/// Rodrigues exponential; requires |v| < pi.
RotationSO3 exp_so3(const Eigen::Vector3d& v);

/// Logarithm in axis-vector coordinates; requires the rotation angle to be
/// below pi - kPiMargin.
Eigen::Vector3d log_so3(const RotationSO3& x);

/// Embedding of a rotation in R^3 through its logarithm.
Eigen::Vector3d embed(const RotationSO3& x);

/// Log density of the Gaussian on the embedded coordinates of x.
double k3_logpdf(const RotationSO3& x, const Eigen::Vector3d& mu, const Eigen::Matrix3d& sigma);

}  // namespace fiberbayes
