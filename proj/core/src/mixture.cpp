#include "fiberbayes/mixture.hpp"

#include "fiberbayes/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fiberbayes {

namespace {

std::vector<std::vector<GaussianDensity>> densities(const MixtureState& state) {
  std::vector<std::vector<GaussianDensity>> out(static_cast<std::size_t>(state.K));
  for (int h = 0; h < state.K; ++h) {
    for (const GaussianParams& p : state.params[static_cast<std::size_t>(h)]) {
      out[static_cast<std::size_t>(h)].emplace_back(p);
    }
  }
  return out;
}

double fiber_loglik(const std::vector<GaussianDensity>& cluster, const FeatureTable& data, Eigen::Index i) {
  double ll = 0.0;
  for (std::size_t b = 0; b < data.blocks.size(); ++b) ll += cluster[b].logpdf(data.blocks[b].col(i).data());
  return ll;
}

}  // namespace

int MixtureState::occupied() const {
  std::vector<char> seen(static_cast<std::size_t>(K), 0);
  int count = 0;
  for (int s : assignments) {
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = 1;
      ++count;
    }
  }
  return count;
}

void MixtureState::validate() const {
  if (K < 1) throw InvalidArgument("mixture state: K must be positive");
  if (weights.size() != K) throw InvalidArgument("mixture state: weight vector has wrong length");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("mixture state: weights are not on the simplex");
  }
  if (static_cast<int>(params.size()) != K) throw InvalidArgument("mixture state: wrong number of clusters");
  for (int s : assignments) {
    if (s < 0 || s >= K) throw InvalidArgument("mixture state: assignment out of range");
  }
  if (!(alpha > 0.0)) throw InvalidArgument("mixture state: alpha must be positive");
}

void MixtureConfig::validate() const {
  if (K < 2) throw InvalidArgument("mixture: K must be at least 2");
  if (n_iter < 1 || burn_in < 0 || burn_in >= n_iter) throw InvalidArgument("mixture: need 0 <= burn_in < n_iter");
  if (thin < 1) throw InvalidArgument("mixture: thin must be positive");
  if (!(alpha > 0.0)) throw InvalidArgument("mixture: alpha must be positive");
  if (param_stride < 0) throw InvalidArgument("mixture: param_stride must be non-negative");
}

std::vector<int> MixtureChain::occupied_counts() const {
  std::vector<int> out;
  out.reserve(draws.size());
  for (const MixtureDraw& d : draws) out.push_back(d.occupied);
  return out;
}

std::vector<std::vector<int>> MixtureChain::assignment_draws() const {
  std::vector<std::vector<int>> out;
  out.reserve(draws.size());
  for (const MixtureDraw& d : draws) out.push_back(d.assignments);
  return out;
}

std::vector<NiwParams> resolve_priors(const std::vector<NiwParams>& priors, const FeatureTable& data) {
  std::vector<NiwParams> out;
  for (std::size_t b = 0; b < data.blocks.size(); ++b) {
    NiwParams p = b < priors.size() ? priors[b] : NiwParams::standard(data.dim(b));
    if (p.dim() != data.dim(b)) {
      throw InvalidArgument("prior dimension " + std::to_string(p.dim()) + " does not match block '" +
                            std::string(component_name(data.components[b])) + "' of dimension " +
                            std::to_string(data.dim(b)));
    }
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

void gibbs_allocations(MixtureState& state, const FeatureTable& data, Rng& rng) {
  const auto dens = densities(state);
  std::vector<double> log_w(static_cast<std::size_t>(state.K));
  for (int h = 0; h < state.K; ++h) log_w[static_cast<std::size_t>(h)] = std::log(state.weights(h));
  std::vector<double> lp(static_cast<std::size_t>(state.K));
  state.assignments.resize(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int h = 0; h < state.K; ++h) {
      const auto hu = static_cast<std::size_t>(h);
      lp[hu] = log_w[hu] == -std::numeric_limits<double>::infinity() ? log_w[hu]
                                                                     : log_w[hu] + fiber_loglik(dens[hu], data, i);
    }
    state.assignments[static_cast<std::size_t>(i)] = rng.categorical_log(lp);
  }
}

void gibbs_weights(MixtureState& state, Rng& rng) {
  Eigen::VectorXd conc = Eigen::VectorXd::Constant(state.K, state.alpha / state.K);
  for (int s : state.assignments) conc(s) += 1.0;
  state.weights = rng.dirichlet(conc);
}

void gibbs_params(MixtureState& state, const FeatureTable& data, const std::vector<NiwParams>& priors, Rng& rng) {
  const std::size_t n_blocks = data.blocks.size();
  std::vector<std::vector<SufficientStats>> stats(static_cast<std::size_t>(state.K));
  for (auto& per_cluster : stats) {
    for (std::size_t b = 0; b < n_blocks; ++b) per_cluster.emplace_back(data.dim(b));
  }
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    auto& per_cluster = stats[static_cast<std::size_t>(state.assignments[static_cast<std::size_t>(i)])];
    for (std::size_t b = 0; b < n_blocks; ++b) per_cluster[b].add(data.blocks[b].col(i).data());
  }
  state.params.assign(static_cast<std::size_t>(state.K), {});
  for (int h = 0; h < state.K; ++h) {
    auto& out = state.params[static_cast<std::size_t>(h)];
    for (std::size_t b = 0; b < n_blocks; ++b) {
      out.push_back(sample_niw(niw_posterior(priors[b], stats[static_cast<std::size_t>(h)][b]), rng));
    }
  }
}

MixtureState initial_mixture_state(const FeatureTable& data, const MixtureConfig& config,
                                   const std::vector<NiwParams>& priors, Rng& rng) {
  MixtureState state;
  state.K = config.K;
  state.alpha = config.alpha;
  state.assignments.resize(static_cast<std::size_t>(data.size()));
  std::uniform_int_distribution<int> pick(0, config.K - 1);
  for (int& s : state.assignments) s = pick(rng.engine());
  gibbs_params(state, data, priors, rng);
  gibbs_weights(state, rng);
  return state;
}

MixtureChain fit_single(const FeatureTable& data, const MixtureConfig& config) {
  config.validate();
  if (data.size() < 1) throw InvalidArgument("fit_single: no data");
  if (data.blocks.empty()) throw InvalidArgument("fit_single: empty component subset");
  const std::vector<NiwParams> priors = resolve_priors(config.priors, data);
  Rng rng(config.seed);
  MixtureState state = initial_mixture_state(data, config, priors, rng);

  MixtureChain chain;
  const int n_saved = (config.n_iter - config.burn_in) / config.thin;
  chain.draws.reserve(static_cast<std::size_t>(n_saved));
  for (int it = 0; it < config.n_iter; ++it) {
    gibbs_allocations(state, data, rng);
    gibbs_weights(state, rng);
    gibbs_params(state, data, priors, rng);
    const int since = it - config.burn_in;
    if (since >= 0 && since % config.thin == 0 && static_cast<int>(chain.draws.size()) < n_saved) {
      const int index = static_cast<int>(chain.draws.size());
      chain.draws.push_back({it, state.assignments, state.weights, state.occupied()});
      if (config.param_stride > 0 && index % config.param_stride == 0) chain.params.emplace_back(index, state.params);
    }
  }
  return chain;
}

double joint_loglik(const MixtureState& state, const FeatureTable& data) {
  const auto dens = densities(state);
  std::vector<double> terms(static_cast<std::size_t>(state.K));
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int h = 0; h < state.K; ++h) {
      terms[static_cast<std::size_t>(h)] =
          std::log(state.weights(h)) + fiber_loglik(dens[static_cast<std::size_t>(h)], data, i);
    }
    total += log_sum_exp(terms);
  }
  return total;
}

}  // namespace fiberbayes
