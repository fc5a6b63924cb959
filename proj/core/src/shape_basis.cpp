#include "fiberbayes/shape_basis.hpp"

#include "fiberbayes/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace fiberbayes {

namespace {

// Row-major flattening (x0, y0, z0, x1, ...) of an N×3 grid function.
Eigen::VectorXd flatten(const Points& p) {
  Eigen::VectorXd v(p.rows() * 3);
  for (Eigen::Index k = 0; k < p.rows(); ++k) v.segment<3>(3 * k) = p.row(k).transpose();
  return v;
}

Points unflatten(const Eigen::VectorXd& v) {
  Points p(v.size() / 3, 3);
  for (Eigen::Index k = 0; k < p.rows(); ++k) p.row(k) = v.segment<3>(3 * k).transpose();
  return p;
}

}  // namespace

ShapeBasis fit_fpca(const std::vector<Curve>& shape_curves, const Curve& template_curve, int T) {
  const auto n = static_cast<Eigen::Index>(shape_curves.size());
  if (n < 2) throw InvalidArgument("fit_fpca: need at least 2 shape curves");
  if (T < 1) throw InvalidArgument("fit_fpca: T must be positive");
  const Eigen::Index grid = template_curve.size();
  for (const Curve& g : shape_curves) {
    if (g.size() != grid) throw InvalidArgument("fit_fpca: curves must share the template grid");
  }
  const Eigen::Index dim = 3 * grid;
  const Eigen::Index cap = std::min(n, dim);
  if (T > cap) {
    warn("fit_fpca: T=" + std::to_string(T) + " exceeds available rank, clamped to " + std::to_string(cap));
    T = static_cast<int>(cap);
  }

  // Quadrature weights per flattened entry; the weighted problem
  // W^{1/2} C W^{1/2} e = lambda e gives phi = W^{-1/2} e, orthonormal in L2.
  const Eigen::VectorXd w = trapezoid_weights(grid);
  Eigen::VectorXd sqrt_w(dim);
  for (Eigen::Index k = 0; k < grid; ++k) sqrt_w.segment<3>(3 * k).setConstant(std::sqrt(w(k)));

  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = (flatten(shape_curves[static_cast<std::size_t>(i)].points() - template_curve.points())
                    .cwiseProduct(sqrt_w))
                   .transpose();
  }
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("fit_fpca: eigendecomposition failed");

  ShapeBasis basis{template_curve, {}, Eigen::VectorXd(T)};
  const double top = std::max(eig.eigenvalues()(dim - 1), 0.0);
  int numeric_rank = 0;
  for (int l = 0; l < T; ++l) {
    const Eigen::Index col = dim - 1 - l;
    const double lambda = std::max(eig.eigenvalues()(col), 0.0);
    if (lambda > 1e-12 * top && lambda > 0.0) ++numeric_rank;
    basis.eigenvalues(l) = lambda;
    Eigen::VectorXd phi = eig.eigenvectors().col(col).cwiseQuotient(sqrt_w);
    Eigen::Index argmax = 0;
    phi.cwiseAbs().maxCoeff(&argmax);
    if (phi(argmax) < 0.0) phi = -phi;
    basis.functions.push_back(unflatten(phi));
  }
  if (numeric_rank < T && top > 0.0) {
    warn("fit_fpca: only " + std::to_string(numeric_rank) + " of " + std::to_string(T) +
         " basis functions carry variance");
  }
  return basis;
}

Eigen::VectorXd project(const Curve& shape_curve, const ShapeBasis& basis) {
  if (shape_curve.size() != basis.grid_size()) throw InvalidArgument("project: grid size mismatch");
  const Points dev = shape_curve.points() - basis.template_curve.points();
  Eigen::VectorXd c(basis.size());
  for (int l = 0; l < basis.size(); ++l) c(l) = l2_inner(dev, basis.functions[static_cast<std::size_t>(l)]);
  return c;
}

Curve shape_from_coefficients(const Eigen::VectorXd& coeffs, const ShapeBasis& basis) {
  if (coeffs.size() != basis.size()) throw InvalidArgument("shape_from_coefficients: wrong coefficient count");
  Points p = basis.template_curve.points();
  for (int l = 0; l < basis.size(); ++l) p += coeffs(l) * basis.functions[static_cast<std::size_t>(l)];
  return Curve(std::move(p));
}

FiberDecomposition decompose_fiber(const Curve& y, const ShapeBasis& basis, int align_max_iter) {
  if (y.size() != basis.grid_size()) throw InvalidArgument("decompose_fiber: fiber not on the basis grid");
  const Eigen::Vector3d translation = centroid(y);
  const Curve centered = translate(y, -translation);
  const AlignmentResult alignment =
      align_pair(to_srvf(basis.template_curve), to_srvf(centered), align_max_iter);
  const Curve shape = rotate(warp_curve(centered, alignment.warping), alignment.rotation.matrix());
  FiberDecomposition d{translation, project(shape, basis), alignment.rotation, alignment.warping, 0.0};
  // Validates the rotation for the downstream embedding.
  log_so3(d.rotation);
  const Curve recon = reconstruct(d, basis);
  const Curve target = warp_curve(y, d.warping);
  d.recon_error = (recon.points() - target.points()).rowwise().norm().maxCoeff();
  return d;
}

Curve reconstruct(const FiberDecomposition& d, const ShapeBasis& basis) {
  const Curve shape = shape_from_coefficients(d.shape_coeffs, basis);
  return translate(rotate(shape, d.rotation.matrix().transpose()), d.translation);
}

}  // namespace fiberbayes
