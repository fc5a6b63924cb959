#pragma once

#include "fiberbayes/curve.hpp"
#include "fiberbayes/so3.hpp"

#include <vector>

namespace fiberbayes {

/// Largest step, in grid cells along either axis, of a warping-path segment.
inline constexpr int kDefaultSlopeCap = 4;

/// Minimizer over SO(3) of |q_ref - O q| (Procrustes through the SVD of
/// the cross-moment matrix). When the cross-moment matrix has rank below
/// two the minimizer is not unique; the solution closest to the identity
/// is returned and *degenerate is set.
RotationSO3 optimal_rotation(const Srvf& q_ref, const Srvf& q, bool* degenerate = nullptr);

/// Lattice-path solution of the warping problem.
struct WarpingSolution {
  WarpingFunction warping;
  /// Path nodes (reference index, warped index) from (0,0) to (N-1,N-1).
  std::vector<std::pair<int, int>> path;
  /// Discretized cost of the path.
  double cost = 0.0;
};

/// Cost of one straight path segment from node (k, l) to node (i, j): the
/// trapezoidal integral of |q_ref(t) - sqrt(m) q(gamma(t))|^2 over the
/// reference samples k..i, with gamma linear of slope m on the segment.
double warping_segment_cost(const Srvf& q_ref, const Srvf& q, int k, int l, int i, int j);

/// Dynamic-programming search over monotone lattice paths whose steps
/// (di, dj) satisfy 1 <= di, dj <= slope_cap.
WarpingSolution optimal_warping_path(const Srvf& q_ref, const Srvf& q, int slope_cap = kDefaultSlopeCap);

WarpingFunction optimal_warping(const Srvf& q_ref, const Srvf& q, int slope_cap = kDefaultSlopeCap);

struct AlignmentResult {
  RotationSO3 rotation;
  WarpingFunction warping;
  /// rotation * warp_srvf(q, warping)
  Srvf aligned_srvf;
  /// L2 distance from aligned_srvf to the reference.
  double residual;
  int iterations;
  bool converged;
  /// Residual of the current iterate after every sweep (starting from the
  /// unaligned input).
  std::vector<double> residual_trace;
};

/// Alternates rotation then warping updates until the residual changes by
/// less than 1e-6 or max_iter sweeps have run. A warping update that does
/// not lower the residual is rejected and ends the iteration.
AlignmentResult align_pair(const Srvf& q_ref, const Srvf& q, int max_iter = 20);

struct TemplateFit {
  Curve template_curve;
  Srvf template_srvf;
  std::vector<AlignmentResult> alignments;
  /// g_i = O_i * y_i(gamma_i) for the centered inputs.
  std::vector<Curve> shape_curves;
  int iterations;
  /// sum_i |q_mu - O_i (q_i, gamma_i)|^2 after each template update.
  std::vector<double> objective_trace;
};

struct TemplateOptions {
  int max_iter = 10;
  int align_max_iter = 20;
  double relative_tolerance = 1e-6;
};

/// Iterative template estimation. Curves are centered first; the template
/// starts as the SRVF of the cross-sectional mean curve.
TemplateFit fit_template(const std::vector<Curve>& curves, const TemplateOptions& options = {});

}  // namespace fiberbayes
