#pragma once

#include "fiberbayes/features.hpp"
#include "fiberbayes/gaussian.hpp"
#include "fiberbayes/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace fiberbayes {

/// One scan's fibers plus its connection-strength count.
struct SubjectData {
  std::string id;
  FeatureTable fibers;
  long count = 0;
};

/// Mean and variance of the latent Gaussian behind the rounded count kernel.
struct CountParams {
  double mean = 0.0;
  double variance = 1.0;
};

/// Normal-inverse-gamma prior: variance ~ IG(a, b), mean | variance ~
/// N(mu0, variance / kappa0).
struct NigParams {
  double mu0 = 0.0;
  double kappa0 = 0.01;
  double a0 = 2.0;
  double b0 = 2.0;
};

/// Gamma(shape, rate) hyperprior.
struct GammaPrior {
  double shape = 3.0;
  double rate = 3.0;
};

/// log P(w) for the Gaussian rounded onto {0, 1, 2, ...}: (-inf, 0] maps to
/// 0 and (w - 1, w] to w.
double rounded_gaussian_logpmf(long w, const CountParams& psi);

/// Affine map between raw counts and the standardized scale on which the
/// count parameters live.
struct CountScaling {
  double center = 0.0;
  double scale = 1.0;

  CountParams to_raw(const CountParams& standardized) const {
    return {center + scale * standardized.mean, scale * scale * standardized.variance};
  }
  static CountScaling from_counts(const std::vector<long>& counts);
};

struct NdpPriors {
  /// One NIW per feature block; empty means NiwParams::standard per block.
  std::vector<NiwParams> atoms;
  GammaPrior alpha;
  GammaPrior beta;
  NigParams counts;
};

struct NdpConfig {
  int K = 9;
  int L = 15;
  int n_iter = 5000;
  int burn_in = 500;
  int thin = 1;
  double alpha_init = 1.0;
  double beta_init = 1.0;
  bool update_concentrations = true;
  bool joint_counts = false;
  /// Replace every likelihood term by a constant (prior simulation).
  bool likelihood_free = false;
  NdpPriors priors;
  std::uint64_t seed = 0;
  /// Store atom parameters every this many saved draws (0 = never).
  int atom_stride = 0;

  void validate() const;
};

/// Truncated nested-DP sampler state. Indices are 0-based.
struct NdpState {
  int K = 0;
  int L = 0;
  double alpha = 1.0;
  double beta = 1.0;
  /// Subject-level sticks v_h (h < K - 1) and log(1 - v_h).
  Eigen::VectorXd subject_sticks;
  Eigen::VectorXd subject_stick_log_complement;
  Eigen::VectorXd subject_weights;
  /// Atom-level sticks u_lh (l < L - 1) per column h and log(1 - u_lh).
  Eigen::MatrixXd atom_sticks;
  Eigen::MatrixXd atom_stick_log_complement;
  /// L×K, column-stochastic.
  Eigen::MatrixXd atom_weights;
  /// atoms[h][l][b]
  std::vector<std::vector<std::vector<GaussianParams>>> atoms;
  std::vector<int> subject_assign;
  std::vector<std::vector<int>> fiber_assign;
  /// Joint mode only: count kernel per subject cluster (standardized scale)
  /// and each subject's latent continuous count (standardized scale).
  std::vector<CountParams> count_params;
  std::vector<double> latent_counts;

  int occupied() const;
  void validate() const;
};

/// Data and constants shared by the sampler steps.
struct NdpModel {
  std::vector<SubjectData> subjects;
  std::vector<NiwParams> atom_priors;
  NdpPriors priors;
  bool joint_counts = false;
  bool likelihood_free = false;
  CountScaling count_scaling;

  NdpModel(std::vector<SubjectData> subjects, const NdpConfig& config);
  std::size_t n_blocks() const { return atom_priors.size(); }
};

void sample_subject_assign(NdpState& state, const NdpModel& model, Rng& rng);
void sample_fiber_assign(NdpState& state, const NdpModel& model, Rng& rng);
void sample_subject_sticks(NdpState& state, Rng& rng);
void sample_atom_sticks(NdpState& state, const NdpModel& model, Rng& rng);
void sample_atoms(NdpState& state, const NdpModel& model, Rng& rng);
void sample_concentrations(NdpState& state, const NdpPriors& priors, Rng& rng);
/// Joint mode: latent counts given the current clusters, then the
/// normal-inverse-gamma update of every cluster's count kernel.
void sample_count_params(NdpState& state, const NdpModel& model, Rng& rng);

/// State drawn from the prior with random allocations.
NdpState initial_ndp_state(const NdpModel& model, const NdpConfig& config, Rng& rng);

struct NdpDraw {
  int iteration;
  std::vector<int> subject_assign;
  std::vector<std::vector<int>> fiber_assign;
  Eigen::VectorXd subject_weights;
  double alpha;
  double beta;
  int occupied;
  std::vector<CountParams> count_params;
};

struct NdpChain {
  std::vector<NdpDraw> draws;
  std::vector<std::pair<int, std::vector<std::vector<std::vector<GaussianParams>>>>> atoms;

  std::vector<int> occupied_counts() const;
  std::vector<std::vector<int>> subject_assign_draws() const;
};

/// Runs the blocked Gibbs sampler (plus the count step in joint mode).
NdpChain fit_ndp(std::vector<SubjectData> subjects, const NdpConfig& config);

}  // namespace fiberbayes
