#include "fiberbayes/curve.hpp"

#include "fiberbayes/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fiberbayes {

namespace {

void require_same_grid(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": grid size mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

// Natural cubic spline through (knots[k], values(k, :)).
class NaturalSpline {
 public:
  NaturalSpline(std::vector<double> knots, Points values)
      : knots_(std::move(knots)), values_(std::move(values)), second_(values_.rows(), 3) {
    const auto n = static_cast<Eigen::Index>(knots_.size());
    second_.setZero();
    if (n < 3) return;
    // Tridiagonal system for interior second derivatives (Thomas algorithm).
    const Eigen::Index m = n - 2;
    Eigen::VectorXd diag(m), upper(m), lower(m);
    Eigen::Matrix<double, Eigen::Dynamic, 3> rhs(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double h0 = knots_[i + 1] - knots_[i];
      const double h1 = knots_[i + 2] - knots_[i + 1];
      lower(i) = h0;
      diag(i) = 2.0 * (h0 + h1);
      upper(i) = h1;
      rhs.row(i) = 6.0 * ((values_.row(i + 2) - values_.row(i + 1)) / h1 -
                          (values_.row(i + 1) - values_.row(i)) / h0);
    }
    for (Eigen::Index i = 1; i < m; ++i) {
      const double w = lower(i) / diag(i - 1);
      diag(i) -= w * upper(i - 1);
      rhs.row(i) -= w * rhs.row(i - 1);
    }
    second_.row(m) = rhs.row(m - 1) / diag(m - 1);
    for (Eigen::Index i = m - 2; i >= 0; --i) {
      second_.row(i + 1) = (rhs.row(i) - upper(i) * second_.row(i + 2)) / diag(i);
    }
  }

  Eigen::RowVector3d operator()(double t) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    auto k = static_cast<Eigen::Index>(it - knots_.begin()) - 1;
    k = std::clamp<Eigen::Index>(k, 0, static_cast<Eigen::Index>(knots_.size()) - 2);
    const double h = knots_[k + 1] - knots_[k];
    const double a = (knots_[k + 1] - t) / h;
    const double b = (t - knots_[k]) / h;
    return a * values_.row(k) + b * values_.row(k + 1) +
           ((a * a * a - a) * second_.row(k) + (b * b * b - b) * second_.row(k + 1)) * (h * h) /
               6.0;
  }

 private:
  std::vector<double> knots_;
  Points values_;
  Points second_;
};

}  // namespace

Eigen::VectorXd uniform_grid(Eigen::Index n) {
  return Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
}

Eigen::VectorXd trapezoid_weights(Eigen::Index n) {
  const double h = 1.0 / static_cast<double>(n - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
  w(0) = w(n - 1) = 0.5 * h;
  return w;
}

Curve::Curve(Points points) : points_(std::move(points)) {
  if (points_.rows() < 2) throw InvalidArgument("curve needs at least 2 points");
  if (!points_.allFinite()) throw InvalidArgument("curve has non-finite coordinates");
}

Srvf::Srvf(Points values) : values_(std::move(values)) {
  if (values_.rows() < 2) throw InvalidArgument("SRVF needs at least 2 samples");
  if (!values_.allFinite()) throw InvalidArgument("SRVF has non-finite values");
}

WarpingFunction::WarpingFunction(Eigen::VectorXd gamma) : gamma_(std::move(gamma)) {
  const auto n = gamma_.size();
  if (n < 2) throw InvalidArgument("warping function needs at least 2 samples");
  if (gamma_(0) != 0.0 || gamma_(n - 1) != 1.0) {
    throw InvalidArgument("warping function must fix the endpoints 0 and 1");
  }
  for (Eigen::Index k = 1; k < n; ++k) {
    if (!(gamma_(k) > gamma_(k - 1))) {
      throw InvalidArgument("warping function must be strictly increasing");
    }
  }
}

WarpingFunction WarpingFunction::identity(Eigen::Index n) {
  Eigen::VectorXd g = uniform_grid(n);
  g(n - 1) = 1.0;
  return WarpingFunction(std::move(g));
}

Curve resample(const Curve& curve, Eigen::Index n) {
  if (n < 2) throw InvalidArgument("resample: n must be at least 2");
  const Points& p = curve.points();
  std::vector<double> knots{0.0};
  std::vector<Eigen::Index> kept{0};
  for (Eigen::Index k = 1; k < p.rows(); ++k) {
    const double step = (p.row(k) - p.row(kept.back())).norm();
    if (step > 0.0) {
      knots.push_back(knots.back() + step);
      kept.push_back(k);
    }
  }
  if (kept.size() < 2) throw InvalidArgument("resample: curve has zero length");
  Points distinct(static_cast<Eigen::Index>(kept.size()), 3);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    distinct.row(static_cast<Eigen::Index>(i)) = p.row(kept[i]);
  }
  const double total = knots.back();
  NaturalSpline spline(std::move(knots), std::move(distinct));
  Points out(n, 3);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.row(k) = spline(total * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  out.row(0) = p.row(kept.front());
  out.row(n - 1) = p.row(kept.back());
  return Curve(std::move(out));
}

double curve_length(const Curve& curve) {
  const Points& p = curve.points();
  double length = 0.0;
  for (Eigen::Index k = 0; k + 1 < p.rows(); ++k) length += (p.row(k + 1) - p.row(k)).norm();
  return length;
}

Eigen::Vector3d centroid(const Curve& curve) {
  const Points& p = curve.points();
  Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
  double length = 0.0;
  for (Eigen::Index k = 0; k + 1 < p.rows(); ++k) {
    const double seg = (p.row(k + 1) - p.row(k)).norm();
    acc += 0.5 * seg * (p.row(k) + p.row(k + 1));
    length += seg;
  }
  if (!(length > 0.0)) throw InvalidArgument("centroid: curve has zero length");
  return (acc / length).transpose();
}

Curve center(const Curve& curve) {
  return translate(curve, -centroid(curve));
}

Curve rotate(const Curve& curve, const Eigen::Matrix3d& rotation) {
  return Curve(curve.points() * rotation.transpose());
}

Curve translate(const Curve& curve, const Eigen::Vector3d& offset) {
  Points p = curve.points();
  p.rowwise() += offset.transpose();
  return Curve(std::move(p));
}

Points grid_derivative(const Points& values) {
  const Eigen::Index n = values.rows();
  const double h = 1.0 / static_cast<double>(n - 1);
  Points d(n, 3);
  d.row(0) = (values.row(1) - values.row(0)) / h;
  d.row(n - 1) = (values.row(n - 1) - values.row(n - 2)) / h;
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    d.row(k) = (values.row(k + 1) - values.row(k - 1)) / (2.0 * h);
  }
  return d;
}

Srvf to_srvf(const Curve& curve) {
  Points q = grid_derivative(curve.points());
  for (Eigen::Index k = 0; k < q.rows(); ++k) {
    const double speed = q.row(k).norm();
    if (speed < kSpeedEpsilon) {
      q.row(k).setZero();
    } else {
      q.row(k) /= std::sqrt(speed);
    }
  }
  return Srvf(std::move(q));
}

Curve from_srvf(const Srvf& srvf, const Eigen::Vector3d& start) {
  const Points& q = srvf.values();
  const Eigen::Index n = q.rows();
  const double h = 1.0 / static_cast<double>(n - 1);
  Points p(n, 3);
  p.row(0) = start.transpose();
  Eigen::RowVector3d prev = q.row(0) * q.row(0).norm();
  for (Eigen::Index k = 1; k < n; ++k) {
    const Eigen::RowVector3d cur = q.row(k) * q.row(k).norm();
    p.row(k) = p.row(k - 1) + 0.5 * h * (prev + cur);
    prev = cur;
  }
  return Curve(std::move(p));
}

Eigen::RowVector3d interpolate(const Points& values, double t) {
  const Eigen::Index n = values.rows();
  const double x = std::clamp(t, 0.0, 1.0) * static_cast<double>(n - 1);
  auto k = static_cast<Eigen::Index>(std::floor(x));
  if (k >= n - 1) return values.row(n - 1);
  const double frac = x - static_cast<double>(k);
  return (1.0 - frac) * values.row(k) + frac * values.row(k + 1);
}

Curve warp_curve(const Curve& curve, const WarpingFunction& gamma) {
  require_same_grid(curve.size(), gamma.size(), "warp_curve");
  Points out(curve.size(), 3);
  for (Eigen::Index k = 0; k < out.rows(); ++k) {
    out.row(k) = interpolate(curve.points(), gamma.values()(k));
  }
  return Curve(std::move(out));
}

Srvf warp_srvf(const Srvf& q, const WarpingFunction& gamma) {
  require_same_grid(q.size(), gamma.size(), "warp_srvf");
  const Eigen::Index n = q.size();
  const Eigen::VectorXd& g = gamma.values();
  const double h = 1.0 / static_cast<double>(n - 1);
  Points out(n, 3);
  for (Eigen::Index k = 0; k < n; ++k) {
    double slope;
    if (k == 0) {
      slope = (g(1) - g(0)) / h;
    } else if (k == n - 1) {
      slope = (g(n - 1) - g(n - 2)) / h;
    } else {
      slope = (g(k + 1) - g(k - 1)) / (2.0 * h);
    }
    out.row(k) = interpolate(q.values(), g(k)) * std::sqrt(slope);
  }
  return Srvf(std::move(out));
}

double l2_inner(const Points& a, const Points& b) {
  require_same_grid(a.rows(), b.rows(), "l2_inner");
  const Eigen::VectorXd w = trapezoid_weights(a.rows());
  return (a.cwiseProduct(b).rowwise().sum().array() * w.array()).sum();
}

double l2_norm(const Points& a) { return std::sqrt(l2_inner(a, a)); }

double srvf_distance(const Srvf& q1, const Srvf& q2) {
  require_same_grid(q1.size(), q2.size(), "srvf_distance");
  return l2_norm(q1.values() - q2.values());
}

Srvf rotate(const Srvf& q, const Eigen::Matrix3d& rotation) {
  return Srvf(q.values() * rotation.transpose());
}

}  // namespace fiberbayes
