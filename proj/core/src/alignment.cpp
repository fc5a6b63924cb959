#include "fiberbayes/alignment.hpp"

#include "fiberbayes/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fiberbayes {

namespace {

// Smallest rotation taking unit vector `from` onto unit vector `to`.
Eigen::Matrix3d minimal_rotation(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const Eigen::Vector3d axis = from.cross(to);
  const double s = axis.norm();
  const double c = from.dot(to);
  if (s < 1e-15) {
    if (c > 0.0) return Eigen::Matrix3d::Identity();
    // Antiparallel: half turn about any axis orthogonal to `from`.
    Eigen::Vector3d ortho = from.unitOrthogonal();
    return 2.0 * ortho * ortho.transpose() - Eigen::Matrix3d::Identity();
  }
  const Eigen::Vector3d k = axis / s;
  Eigen::Matrix3d kx;
  kx << 0.0, -k(2), k(1), k(2), 0.0, -k(0), -k(1), k(0), 0.0;
  return Eigen::Matrix3d::Identity() + s * kx + (1.0 - c) * kx * kx;
}

void require_same_grid(const Srvf& a, const Srvf& b, const char* what) {
  if (a.size() != b.size()) throw InvalidArgument(std::string(what) + ": grid size mismatch");
}

}  // namespace

RotationSO3 optimal_rotation(const Srvf& q_ref, const Srvf& q, bool* degenerate) {
  require_same_grid(q_ref, q, "optimal_rotation");
  const Eigen::VectorXd w = trapezoid_weights(q.size());
  const Eigen::Matrix3d m = q_ref.values().transpose() * w.asDiagonal() * q.values();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  const double tol = 1e-12 * std::max(sv(0), std::numeric_limits<double>::min());
  const bool rank_deficient = sv(1) <= tol;
  if (degenerate) *degenerate = rank_deficient;
  if (sv(0) <= std::numeric_limits<double>::min()) return RotationSO3::identity();
  if (rank_deficient) {
    // Every rotation mapping the right to the left singular direction is
    // optimal; take the one closest to the identity.
    return RotationSO3(minimal_rotation(svd.matrixV().col(0), svd.matrixU().col(0)));
  }
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return RotationSO3(u * d * v.transpose());
}

double warping_segment_cost(const Srvf& q_ref, const Srvf& q, int k, int l, int i, int j) {
  const Points& r = q_ref.values();
  const Points& f = q.values();
  const auto n = static_cast<int>(r.rows());
  const double h = 1.0 / static_cast<double>(n - 1);
  const double slope = static_cast<double>(j - l) / static_cast<double>(i - k);
  const double scale = std::sqrt(slope);
  double cost = 0.0;
  for (int p = k; p <= i; ++p) {
    const double x = static_cast<double>(l) + slope * static_cast<double>(p - k);
    int base = static_cast<int>(x);
    if (base >= n - 1) base = n - 2;
    const double frac = x - static_cast<double>(base);
    double sq = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double val = (1.0 - frac) * f(base, c) + frac * f(base + 1, c);
      const double diff = r(p, c) - scale * val;
      sq += diff * diff;
    }
    const double weight = (p == k || p == i) ? 0.5 * h : h;
    cost += weight * sq;
  }
  return cost;
}

WarpingSolution optimal_warping_path(const Srvf& q_ref, const Srvf& q, int slope_cap) {
  require_same_grid(q_ref, q, "optimal_warping");
  if (slope_cap < 1) throw InvalidArgument("optimal_warping: slope_cap must be positive");
  const auto n = static_cast<int>(q.size());
  const double h = 1.0 / static_cast<double>(n - 1);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Row-major copies for locality in the inner loop.
  std::vector<double> r(static_cast<std::size_t>(3 * n));
  std::vector<double> f(static_cast<std::size_t>(3 * n + 3), 0.0);
  for (int k = 0; k < n; ++k) {
    for (int c = 0; c < 3; ++c) {
      r[static_cast<std::size_t>(3 * k + c)] = q_ref.values()(k, c);
      f[static_cast<std::size_t>(3 * k + c)] = q.values()(k, c);
    }
  }
  // Per step shape (di, dj) and offset o: integer part and fraction of
  // dj * o / di, and the trapezoid weight of that sample.
  struct Sample {
    int base;
    double frac;
    double weight;
  };
  std::vector<std::vector<Sample>> table(static_cast<std::size_t>(slope_cap * slope_cap));
  std::vector<double> scale(static_cast<std::size_t>(slope_cap * slope_cap));
  for (int di = 1; di <= slope_cap; ++di) {
    for (int dj = 1; dj <= slope_cap; ++dj) {
      const auto idx = static_cast<std::size_t>((di - 1) * slope_cap + (dj - 1));
      scale[idx] = std::sqrt(static_cast<double>(dj) / static_cast<double>(di));
      for (int o = 0; o <= di; ++o) {
        const double weight = (o == 0 || o == di) ? 0.5 * h : h;
        table[idx].push_back({dj * o / di, static_cast<double>(dj * o % di) / static_cast<double>(di), weight});
      }
    }
  }
  auto segment = [&](int k, int l, int di, int dj) {
    const auto idx = static_cast<std::size_t>((di - 1) * slope_cap + (dj - 1));
    const double s = scale[idx];
    double cost = 0.0;
    for (int o = 0; o <= di; ++o) {
      const Sample& smp = table[idx][static_cast<std::size_t>(o)];
      const double* rp = &r[static_cast<std::size_t>(3 * (k + o))];
      // The padding row past the end keeps base + 1 in bounds when frac = 0.
      const double* fp = &f[static_cast<std::size_t>(3 * (l + smp.base))];
      const double a = 1.0 - smp.frac;
      const double b = smp.frac;
      double sq = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double diff = rp[c] - s * (a * fp[c] + b * fp[c + 3]);
        sq += diff * diff;
      }
      cost += smp.weight * sq;
    }
    return cost;
  };

  Eigen::MatrixXd best = Eigen::MatrixXd::Constant(n, n, kInf);
  Eigen::MatrixXi from_i = Eigen::MatrixXi::Constant(n, n, -1);
  Eigen::MatrixXi from_j = Eigen::MatrixXi::Constant(n, n, -1);
  best(0, 0) = 0.0;
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      double value = kInf;
      int bi = -1;
      int bj = -1;
      for (int di = 1; di <= slope_cap && di <= i; ++di) {
        for (int dj = 1; dj <= slope_cap && dj <= j; ++dj) {
          const double prev = best(i - di, j - dj);
          if (prev == kInf) continue;
          const double candidate = prev + segment(i - di, j - dj, di, dj);
          if (candidate < value) {
            value = candidate;
            bi = i - di;
            bj = j - dj;
          }
        }
      }
      best(i, j) = value;
      from_i(i, j) = bi;
      from_j(i, j) = bj;
    }
  }
  if (best(n - 1, n - 1) == kInf) throw NumericalError("optimal_warping: no feasible path");

  std::vector<std::pair<int, int>> path;
  for (int i = n - 1, j = n - 1; i >= 0 && j >= 0;) {
    path.emplace_back(i, j);
    if (i == 0 && j == 0) break;
    const int pi = from_i(i, j);
    const int pj = from_j(i, j);
    i = pi;
    j = pj;
  }
  std::reverse(path.begin(), path.end());

  Eigen::VectorXd gamma(n);
  for (std::size_t s = 0; s + 1 < path.size(); ++s) {
    const auto [k, l] = path[s];
    const auto [i, j] = path[s + 1];
    const double slope = static_cast<double>(j - l) / static_cast<double>(i - k);
    for (int p = k; p < i; ++p) gamma(p) = (static_cast<double>(l) + slope * (p - k)) * h;
  }
  gamma(0) = 0.0;
  gamma(n - 1) = 1.0;
  return {WarpingFunction(std::move(gamma)), std::move(path), best(n - 1, n - 1)};
}

WarpingFunction optimal_warping(const Srvf& q_ref, const Srvf& q, int slope_cap) {
  return optimal_warping_path(q_ref, q, slope_cap).warping;
}

AlignmentResult align_pair(const Srvf& q_ref, const Srvf& q, int max_iter) {
  require_same_grid(q_ref, q, "align_pair");
  const Eigen::Index n = q.size();
  RotationSO3 rotation;
  WarpingFunction warping = WarpingFunction::identity(n);
  double residual = srvf_distance(q_ref, q);
  std::vector<double> trace{residual};
  int iterations = 0;
  bool converged = false;

  while (iterations < max_iter) {
    ++iterations;
    const double previous = residual;

    const Srvf warped = warp_srvf(q, warping);
    const RotationSO3 rotation_candidate = optimal_rotation(q_ref, warped);
    const double rotated_residual = srvf_distance(q_ref, rotate(warped, rotation_candidate.matrix()));
    if (rotated_residual <= residual) {
      rotation = rotation_candidate;
      residual = rotated_residual;
    }

    const WarpingFunction candidate = optimal_warping(q_ref, rotate(q, rotation.matrix()));
    const double candidate_residual =
        srvf_distance(q_ref, rotate(warp_srvf(q, candidate), rotation.matrix()));
    bool rejected = false;
    if (candidate_residual <= residual) {
      warping = candidate;
      residual = candidate_residual;
    } else {
      rejected = true;
    }
    trace.push_back(residual);
    if (std::abs(previous - residual) < 1e-6) {
      converged = true;
      break;
    }
    if (rejected) break;
  }

  Srvf aligned = rotate(warp_srvf(q, warping), rotation.matrix());
  return {rotation, warping, std::move(aligned), residual, iterations, converged, std::move(trace)};
}

TemplateFit fit_template(const std::vector<Curve>& curves, const TemplateOptions& options) {
  if (curves.size() < 2) throw InvalidArgument("fit_template: need at least 2 curves");
  const Eigen::Index n_grid = curves.front().size();
  for (const Curve& c : curves) {
    if (c.size() != n_grid) throw InvalidArgument("fit_template: curves must share a grid");
  }
  const std::size_t n = curves.size();
  std::vector<Curve> centered;
  std::vector<Srvf> srvfs;
  centered.reserve(n);
  srvfs.reserve(n);
  Points mean = Points::Zero(n_grid, 3);
  for (const Curve& c : curves) {
    centered.push_back(center(c));
    srvfs.push_back(to_srvf(centered.back()));
    mean += centered.back().points();
  }
  mean /= static_cast<double>(n);
  Srvf q_mu = to_srvf(Curve(mean));

  std::vector<AlignmentResult> alignments;
  std::vector<double> trace;
  int iterations = 0;
  for (int it = 0; it < options.max_iter; ++it) {
    ++iterations;
    for (std::size_t i = 0; i < n; ++i) {
      AlignmentResult fresh = align_pair(q_mu, srvfs[i], options.align_max_iter);
      if (alignments.size() < n) {
        alignments.push_back(std::move(fresh));
        continue;
      }
      // Keep the previous alignment when it still fits the new template better.
      AlignmentResult& old = alignments[i];
      const double old_residual = srvf_distance(q_mu, old.aligned_srvf);
      if (fresh.residual <= old_residual) {
        old = std::move(fresh);
      } else {
        old.residual = old_residual;
      }
    }
    Points sum = Points::Zero(n_grid, 3);
    for (const AlignmentResult& a : alignments) sum += a.aligned_srvf.values();
    q_mu = Srvf(sum / static_cast<double>(n));
    double objective = 0.0;
    for (AlignmentResult& a : alignments) {
      a.residual = srvf_distance(q_mu, a.aligned_srvf);
      objective += a.residual * a.residual;
    }
    const double previous = trace.empty() ? std::numeric_limits<double>::infinity() : trace.back();
    trace.push_back(objective);
    if (objective == 0.0 ||
        std::abs(previous - objective) < options.relative_tolerance * std::max(previous, 1e-300)) {
      break;
    }
  }

  Curve template_curve = from_srvf(q_mu, Eigen::Vector3d::Zero());
  if (curve_length(template_curve) > 0.0) template_curve = center(template_curve);
  std::vector<Curve> shapes;
  shapes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    shapes.push_back(rotate(warp_curve(centered[i], alignments[i].warping), alignments[i].rotation.matrix()));
  }
  return {std::move(template_curve), std::move(q_mu), std::move(alignments), std::move(shapes), iterations,
          std::move(trace)};
}

}  // namespace fiberbayes
