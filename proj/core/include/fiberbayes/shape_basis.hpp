#pragma once

#include "fiberbayes/alignment.hpp"
#include "fiberbayes/curve.hpp"
#include "fiberbayes/so3.hpp"

#include <Eigen/Core>

#include <vector>

namespace fiberbayes {

/// Default number of FPCA coefficients kept per fiber.
inline constexpr int kDefaultBasisSize = 3;

/// Template curve plus an FPCA basis of shape deformations around it.
///
/// Basis functions are orthonormal under the trapezoidal L2 inner product
/// of grid functions (l2_inner), and eigenvalues are non-increasing.
struct ShapeBasis {
  Curve template_curve;
  std::vector<Points> functions;
  Eigen::VectorXd eigenvalues;

  int size() const { return static_cast<int>(functions.size()); }
  Eigen::Index grid_size() const { return template_curve.size(); }
};

/// Learns the top-T principal deformations of the aligned shape curves
/// around `template_curve`. The second-moment operator is taken about the
/// template with divisor n - 1. T is clamped to min(n, 3N) with a warning.
ShapeBasis fit_fpca(const std::vector<Curve>& shape_curves, const Curve& template_curve, int T);

/// Coefficients <g - y_mu, phi_l>.
Eigen::VectorXd project(const Curve& shape_curve, const ShapeBasis& basis);

/// y_mu + sum_l coeffs(l) phi_l.
Curve shape_from_coefficients(const Eigen::VectorXd& coeffs, const ShapeBasis& basis);

/// Translation, shape, rotation and warping components of one fiber.
struct FiberDecomposition {
  Eigen::Vector3d translation;
  Eigen::VectorXd shape_coeffs;
  RotationSO3 rotation;
  WarpingFunction warping;
  /// Max pointwise distance (mm) between reconstruct() and y(gamma(s)).
  double recon_error = 0.0;
};

/// Decomposes y (already on the basis grid) against the basis template.
FiberDecomposition decompose_fiber(const Curve& y, const ShapeBasis& basis, int align_max_iter = 20);

/// O^T (y_mu + sum_l c_l phi_l) + c1. The warping is not applied.
Curve reconstruct(const FiberDecomposition& d, const ShapeBasis& basis);

}  // namespace fiberbayes
