#pragma once

#include "fiberbayes/features.hpp"
#include "fiberbayes/gaussian.hpp"
#include "fiberbayes/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace fiberbayes {

/// Finite-K product-kernel mixture with a symmetric Dirichlet(alpha/K)
/// prior on the weights. Cluster indices are 0-based in memory.
struct MixtureState {
  int K = 0;
  double alpha = 1.0;
  Eigen::VectorXd weights;
  /// params[h][b]: Gaussian of cluster h for feature block b.
  std::vector<std::vector<GaussianParams>> params;
  std::vector<int> assignments;

  int occupied() const;
  /// Throws InvalidArgument if any structural invariant is violated.
  void validate() const;
};

struct MixtureConfig {
  int K = 10;
  int n_iter = 11000;
  int burn_in = 1000;
  int thin = 1;
  double alpha = 1.0;
  /// One prior per feature block; empty means NiwParams::standard per block.
  std::vector<NiwParams> priors;
  std::uint64_t seed = 0;
  /// Store cluster parameters every this many saved draws (0 = never).
  int param_stride = 0;

  void validate() const;
};

struct MixtureDraw {
  int iteration;
  std::vector<int> assignments;
  Eigen::VectorXd weights;
  int occupied;
};

struct MixtureChain {
  std::vector<MixtureDraw> draws;
  /// (saved-draw index, params) at the configured stride.
  std::vector<std::pair<int, std::vector<std::vector<GaussianParams>>>> params;

  std::vector<int> occupied_counts() const;
  std::vector<std::vector<int>> assignment_draws() const;
};

/// Resolves the priors of a config against the table's block dimensions.
std::vector<NiwParams> resolve_priors(const std::vector<NiwParams>& priors, const FeatureTable& data);

/// Step 1: S_i ~ Cat(pi_h prod_m K_m(c_i; theta_h)), evaluated in log space.
void gibbs_allocations(MixtureState& state, const FeatureTable& data, Rng& rng);

/// Step 2: pi ~ Dir(alpha/K + n_1, ..., alpha/K + n_K).
void gibbs_weights(MixtureState& state, Rng& rng);

/// Step 3: conjugate NIW draw of every (cluster, block) parameter; empty
/// clusters draw from the prior.
void gibbs_params(MixtureState& state, const FeatureTable& data, const std::vector<NiwParams>& priors, Rng& rng);

/// Random allocation followed by one parameter and one weight update.
MixtureState initial_mixture_state(const FeatureTable& data, const MixtureConfig& config,
                                   const std::vector<NiwParams>& priors, Rng& rng);

/// Runs the three-step sampler; identical seeds give identical chains.
MixtureChain fit_single(const FeatureTable& data, const MixtureConfig& config);

/// sum_i log sum_h pi_h prod_m K_m(c_i^(m); theta_h^(m)).
double joint_loglik(const MixtureState& state, const FeatureTable& data);

}  // namespace fiberbayes
