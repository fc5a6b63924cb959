#pragma once

#include <Eigen/Core>

#include <vector>

namespace fiberbayes {

/// N×3 point matrix, one row per sample.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Default working resolution for all curves.
inline constexpr Eigen::Index kDefaultGridSize = 100;

/// Speeds below this are treated as zero when forming the SRVF.
inline constexpr double kSpeedEpsilon = 1e-8;

/// Uniform parameter grid s_k = k/(n-1).
Eigen::VectorXd uniform_grid(Eigen::Index n);

/// Trapezoidal quadrature weights for the uniform grid on [0,1].
Eigen::VectorXd trapezoid_weights(Eigen::Index n);

/// A 3D open curve sampled on the uniform grid of [0,1].
///
/// Holds at least two finite points. A constant curve is representable
/// (it is what integrating a zero SRVF yields); operations that need a
/// positive length check for it themselves.
class Curve {
 public:
  explicit Curve(Points points);

  const Points& points() const { return points_; }
  Eigen::Index size() const { return points_.rows(); }
  Eigen::RowVector3d point(Eigen::Index k) const { return points_.row(k); }

 private:
  Points points_;
};

/// Square-root velocity function q = y'/sqrt(|y'|) on the curve grid.
class Srvf {
 public:
  explicit Srvf(Points values);

  const Points& values() const { return values_; }
  Eigen::Index size() const { return values_.rows(); }

 private:
  Points values_;
};

/// Orientation-preserving reparameterization of [0,1] sampled on the grid.
class WarpingFunction {
 public:
  explicit WarpingFunction(Eigen::VectorXd gamma);

  static WarpingFunction identity(Eigen::Index n);

  const Eigen::VectorXd& values() const { return gamma_; }
  Eigen::Index size() const { return gamma_.size(); }

 private:
  Eigen::VectorXd gamma_;
};

/// Resamples to n points uniformly spaced in arc length using a natural
/// cubic spline through the chord-length parameterization.
Curve resample(const Curve& curve, Eigen::Index n);

/// Length of the piecewise-linear curve through the samples.
double curve_length(const Curve& curve);

/// Arc-length weighted centroid, the integral of y|y'| over the length.
Eigen::Vector3d centroid(const Curve& curve);

/// Translates the curve so that its centroid is the origin.
Curve center(const Curve& curve);

/// Applies a rotation matrix to every point.
Curve rotate(const Curve& curve, const Eigen::Matrix3d& rotation);

/// Adds an offset to every point.
Curve translate(const Curve& curve, const Eigen::Vector3d& offset);

/// Finite-difference derivative on the uniform grid: central in the interior,
/// one-sided at the endpoints.
Points grid_derivative(const Points& values);

Srvf to_srvf(const Curve& curve);

/// Integrates q|q| from `start` with the trapezoidal rule.
Curve from_srvf(const Srvf& srvf, const Eigen::Vector3d& start);

/// Linear interpolation of grid samples at parameter t in [0,1].
Eigen::RowVector3d interpolate(const Points& values, double t);

/// Evaluates y(gamma(s_k)) by linear interpolation.
Curve warp_curve(const Curve& curve, const WarpingFunction& gamma);

/// The SRVF group action (q o gamma) * sqrt(gamma').
Srvf warp_srvf(const Srvf& q, const WarpingFunction& gamma);

/// Trapezoidal L2 inner product of two grid functions.
double l2_inner(const Points& a, const Points& b);

/// L2 norm of a grid function.
double l2_norm(const Points& a);

/// L2 distance between two SRVFs.
double srvf_distance(const Srvf& q1, const Srvf& q2);

/// Rotates every SRVF sample.
Srvf rotate(const Srvf& q, const Eigen::Matrix3d& rotation);

}  // namespace fiberbayes
