#include "fiberbayes/so3.hpp"

#include "fiberbayes/error.hpp"
#include "fiberbayes/gaussian.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace fiberbayes {

Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

RotationSO3::RotationSO3(const Eigen::Matrix3d& mat) : mat_(mat) {
  if (!mat_.allFinite()) throw InvalidArgument("rotation has non-finite entries");
  const double drift = (mat_.transpose() * mat_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = mat_.determinant();
  if (drift > 1e-3 || det <= 0.0) {
    throw InvalidArgument("matrix is not a proper rotation");
  }
  if (drift > 1e-9 || std::abs(det - 1.0) > 1e-9) mat_ = project_to_so3(mat_);
}

RotationSO3 RotationSO3::transpose() const { return RotationSO3(mat_.transpose()); }

RotationSO3 RotationSO3::operator*(const RotationSO3& other) const {
  return RotationSO3(mat_ * other.mat_);
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d a;
  a << 0.0, -v(0), v(1),
       v(0), 0.0, -v(2),
       -v(1), v(2), 0.0;
  return a;
}

Eigen::Vector3d unskew(const Eigen::Matrix3d& a) {
  return {0.5 * (a(1, 0) - a(0, 1)), 0.5 * (a(0, 2) - a(2, 0)), 0.5 * (a(2, 1) - a(1, 2))};
}

RotationSO3 exp_so3(const Eigen::Vector3d& v) {
  const double alpha = v.norm();
  if (!(alpha < std::numbers::pi)) throw InvalidArgument("exp_so3: |v| must be below pi");
  if (alpha == 0.0) return RotationSO3::identity();
  const Eigen::Matrix3d a = skew(v);
  double c1;
  double c2;
  if (alpha < kSmallAngle) {
    const double a2 = alpha * alpha;
    c1 = 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
    c2 = 0.5 - a2 / 24.0 + a2 * a2 / 720.0;
  } else {
    c1 = std::sin(alpha) / alpha;
    c2 = (1.0 - std::cos(alpha)) / (alpha * alpha);
  }
  return RotationSO3(Eigen::Matrix3d::Identity() + c1 * a + c2 * a * a);
}

Eigen::Vector3d log_so3(const RotationSO3& x) {
  const Eigen::Matrix3d& m = x.matrix();
  // sin(alpha) * axis, read off the antisymmetric part.
  const Eigen::Vector3d s = unskew(m);
  const double cos_alpha = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double alpha = std::atan2(s.norm(), cos_alpha);
  if (alpha >= std::numbers::pi - kPiMargin) {
    throw NumericalError("log_so3: rotation angle too close to pi");
  }
  if (alpha == 0.0) return Eigen::Vector3d::Zero();
  double coeff;
  if (alpha < kSmallAngle) {
    const double a2 = alpha * alpha;
    coeff = 1.0 + a2 / 6.0 + 7.0 * a2 * a2 / 360.0;
  } else {
    coeff = alpha / std::sin(alpha);
  }
  return coeff * s;
}

Eigen::Vector3d embed(const RotationSO3& x) { return log_so3(x); }

double k3_logpdf(const RotationSO3& x, const Eigen::Vector3d& mu, const Eigen::Matrix3d& sigma) {
  return mvn_logpdf(embed(x), mu, sigma);
}

}  // namespace fiberbayes
