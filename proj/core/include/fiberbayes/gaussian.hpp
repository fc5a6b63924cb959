#pragma once

#include "fiberbayes/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace fiberbayes {

/// Mean and covariance of a multivariate normal.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Multivariate normal log density. Throws InvalidArgument on a non-SPD
/// covariance.
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

/// A multivariate normal with its Cholesky factor cached for repeated
/// evaluation in the samplers' inner loops.
class GaussianDensity {
 public:
  GaussianDensity() = default;
  explicit GaussianDensity(const GaussianParams& params);

  /// x points to dim() contiguous doubles.
  double logpdf(const double* x) const;
  double logpdf(const Eigen::VectorXd& x) const { return logpdf(x.data()); }

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_;  // lower factor
  double log_norm_ = 0.0;
};

/// Normal-inverse-Wishart hyperparameters (mu0, lambda0, Phi0, nu0).
struct NiwParams {
  Eigen::VectorXd mu0;
  double lambda0 = 1.0;
  Eigen::MatrixXd phi0;
  double nu0 = 5.0;

  Eigen::Index dim() const { return mu0.size(); }

  /// Throws InvalidArgument unless the parameters define a proper prior.
  void validate() const;

  /// NIW(0, 1, I, max(5, d + 2)).
  static NiwParams standard(Eigen::Index d);
};

/// Running count, sum and outer-product sum of d-dimensional observations.
struct SufficientStats {
  explicit SufficientStats(Eigen::Index d = 0)
      : sum(Eigen::VectorXd::Zero(d)), outer(Eigen::MatrixXd::Zero(d, d)) {}

  void add(const double* x);
  void add(const Eigen::VectorXd& x) { add(x.data()); }

  long count = 0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd outer;
};

/// Conjugate NIW update. A scale matrix that fails its Cholesky check is
/// jittered by 1e-10 I with a warning.
NiwParams niw_posterior(const NiwParams& prior, const SufficientStats& stats);

/// Sigma ~ IW(phi, nu) through the Bartlett decomposition.
Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& phi, double nu, Rng& rng);

/// Sigma ~ IW(Phi, nu), mean ~ N(mu, Sigma / lambda).
GaussianParams sample_niw(const NiwParams& params, Rng& rng);

/// Draw from N(mean, cov).
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

}  // namespace fiberbayes
