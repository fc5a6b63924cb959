#include "fiberbayes/gaussian.hpp"

#include "fiberbayes/error.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace fiberbayes {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& sigma, const char* what) {
  if (sigma.rows() != sigma.cols()) throw InvalidArgument(std::string(what) + ": covariance not square");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument(std::string(what) + ": covariance is not symmetric positive definite");
  }
  return llt.matrixL();
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
  if (x.size() != mu.size() || sigma.rows() != mu.size()) {
    throw InvalidArgument("mvn_logpdf: dimension mismatch");
  }
  const Eigen::MatrixXd l = cholesky_or_throw(sigma, "mvn_logpdf");
  const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(x - mu);
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + z.squaredNorm());
}

GaussianDensity::GaussianDensity(const GaussianParams& params)
    : mean_(params.mean), chol_(cholesky_or_throw(params.cov, "GaussianDensity")) {
  const double log_det = 2.0 * chol_.diagonal().array().log().sum();
  log_norm_ = -0.5 * (static_cast<double>(mean_.size()) * kLog2Pi + log_det);
}

double GaussianDensity::logpdf(const double* x) const {
  const Eigen::Index d = mean_.size();
  constexpr Eigen::Index kStack = 32;
  double stack[kStack];
  std::vector<double> heap;
  double* z = stack;
  if (d > kStack) {
    heap.resize(static_cast<std::size_t>(d));
    z = heap.data();
  }
  double quad = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    double r = x[i] - mean_(i);
    for (Eigen::Index j = 0; j < i; ++j) r -= chol_(i, j) * z[j];
    z[i] = r / chol_(i, i);
    quad += z[i] * z[i];
  }
  return log_norm_ - 0.5 * quad;
}

void NiwParams::validate() const {
  const Eigen::Index d = mu0.size();
  if (d == 0) throw InvalidArgument("NIW: zero dimension");
  if (phi0.rows() != d || phi0.cols() != d) throw InvalidArgument("NIW: Phi0 has wrong shape");
  if (!(lambda0 > 0.0)) throw InvalidArgument("NIW: lambda0 must be positive");
  if (!(nu0 > static_cast<double>(d) - 1.0)) throw InvalidArgument("NIW: nu0 must exceed d - 1");
  if ((phi0 - phi0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + phi0.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("NIW: Phi0 must be symmetric");
  }
  cholesky_or_throw(phi0, "NIW Phi0");
}

NiwParams NiwParams::standard(Eigen::Index d) {
  NiwParams p;
  p.mu0 = Eigen::VectorXd::Zero(d);
  p.lambda0 = 1.0;
  p.phi0 = Eigen::MatrixXd::Identity(d, d);
  p.nu0 = std::max(5.0, static_cast<double>(d) + 2.0);
  return p;
}

void SufficientStats::add(const double* x) {
  const Eigen::Map<const Eigen::VectorXd> v(x, sum.size());
  ++count;
  sum += v;
  outer.noalias() += v * v.transpose();
}

NiwParams niw_posterior(const NiwParams& prior, const SufficientStats& stats) {
  if (stats.count == 0) return prior;
  const double n = static_cast<double>(stats.count);
  const Eigen::VectorXd xbar = stats.sum / n;
  const Eigen::MatrixXd scatter = stats.outer - n * xbar * xbar.transpose();
  NiwParams post;
  post.lambda0 = prior.lambda0 + n;
  post.nu0 = prior.nu0 + n;
  post.mu0 = (prior.lambda0 * prior.mu0 + stats.sum) / post.lambda0;
  const Eigen::VectorXd dev = xbar - prior.mu0;
  post.phi0 = symmetrize(prior.phi0 + scatter + (prior.lambda0 * n / post.lambda0) * dev * dev.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(post.phi0);
  if (llt.info() != Eigen::Success) {
    warn("NIW posterior scale not positive definite; adding 1e-10 jitter");
    post.phi0 += 1e-10 * Eigen::MatrixXd::Identity(post.phi0.rows(), post.phi0.cols());
  }
  return post;
}

Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& phi, double nu, Rng& rng) {
  const Eigen::Index d = phi.rows();
  // Bartlett factor A of W ~ Wishart(I, nu).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(2.0 * rng.gamma(0.5 * (nu - static_cast<double>(i)), 1.0));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  // With Phi = C C^T, Sigma = (C A^{-T})(C A^{-T})^T.
  const Eigen::MatrixXd c = cholesky_or_throw(phi, "inverse Wishart scale");
  const Eigen::MatrixXd a_inv_t =
      a.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d)).transpose();
  const Eigen::MatrixXd b = c * a_inv_t;
  return symmetrize(b * b.transpose());
}

GaussianParams sample_niw(const NiwParams& params, Rng& rng) {
  GaussianParams out;
  out.cov = sample_inverse_wishart(params.phi0, params.nu0, rng);
  out.mean = sample_mvn(params.mu0, out.cov / params.lambda0, rng);
  return out;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  const Eigen::MatrixXd l = cholesky_or_throw(cov, "sample_mvn");
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + l * z;
}

}  // namespace fiberbayes
