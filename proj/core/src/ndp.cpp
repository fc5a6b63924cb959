#include "fiberbayes/ndp.hpp"

#include "fiberbayes/error.hpp"
#include "fiberbayes/mixture.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

namespace fiberbayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log Phi(z), accurate far into the lower tail.
double log_ndtr(double z) {
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  const double z2 = z * z;
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
}

// log(Phi(b) - Phi(a)) for a < b.
double log_ndtr_diff(double a, double b) {
  if (a >= 0.0) return log_ndtr_diff(-b, -a);
  const double lb = log_ndtr(b);
  if (a == -std::numeric_limits<double>::infinity()) return lb;
  const double la = log_ndtr(a);
  return lb + std::log1p(-std::exp(la - lb));
}

// (lower, upper] interval of the latent Gaussian that rounds to w.
std::pair<double, double> rounding_interval(long w) {
  if (w <= 0) return {-std::numeric_limits<double>::infinity(), 0.0};
  return {static_cast<double>(w - 1), static_cast<double>(w)};
}

using AtomDensities = std::vector<std::vector<std::vector<GaussianDensity>>>;

AtomDensities atom_densities(const NdpState& state) {
  AtomDensities out(static_cast<std::size_t>(state.K));
  for (int h = 0; h < state.K; ++h) {
    auto& col = out[static_cast<std::size_t>(h)];
    col.resize(static_cast<std::size_t>(state.L));
    for (int l = 0; l < state.L; ++l) {
      for (const GaussianParams& p : state.atoms[static_cast<std::size_t>(h)][static_cast<std::size_t>(l)]) {
        col[static_cast<std::size_t>(l)].emplace_back(p);
      }
    }
  }
  return out;
}

double fiber_loglik(const std::vector<GaussianDensity>& atom, const FeatureTable& fibers, Eigen::Index i) {
  double ll = 0.0;
  for (std::size_t b = 0; b < fibers.blocks.size(); ++b) ll += atom[b].logpdf(fibers.blocks[b].col(i).data());
  return ll;
}

// pi_h = v_h prod_{s<h} (1 - v_s) with the last stick fixed at 1.
Eigen::VectorXd stick_breaking(const Eigen::VectorXd& sticks, const Eigen::VectorXd& log_complement, int k) {
  Eigen::VectorXd w(k);
  double log_rest = 0.0;
  for (int h = 0; h < k - 1; ++h) {
    w(h) = sticks(h) * std::exp(log_rest);
    log_rest += log_complement(h);
  }
  w(k - 1) = std::exp(log_rest);
  // The terms telescope to 1; absorb rounding so the invariant holds exactly.
  const double total = w.sum();
  w /= total;
  return w;
}

CountParams sample_nig(const NigParams& prior, const std::vector<double>& values, Rng& rng) {
  const double n = static_cast<double>(values.size());
  double kappa = prior.kappa0;
  double mu = prior.mu0;
  double a = prior.a0;
  double b = prior.b0;
  if (!values.empty()) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    kappa = prior.kappa0 + n;
    mu = (prior.kappa0 * prior.mu0 + n * mean) / kappa;
    a = prior.a0 + 0.5 * n;
    b = prior.b0 + 0.5 * ss + 0.5 * prior.kappa0 * n * (mean - prior.mu0) * (mean - prior.mu0) / kappa;
  }
  const double variance = 1.0 / rng.gamma(a, b);
  const double mean = mu + std::sqrt(variance / kappa) * rng.normal();
  return {mean, variance};
}

}  // namespace

double rounded_gaussian_logpmf(long w, const CountParams& psi) {
  if (!(psi.variance > 0.0)) throw InvalidArgument("rounded Gaussian: variance must be positive");
  if (w < 0) return kNegInf;
  const double sd = std::sqrt(psi.variance);
  const auto [lo, hi] = rounding_interval(w);
  const double a = std::isinf(lo) ? lo : (lo - psi.mean) / sd;
  return log_ndtr_diff(a, (hi - psi.mean) / sd);
}

CountScaling CountScaling::from_counts(const std::vector<long>& counts) {
  CountScaling s;
  if (counts.empty()) return s;
  double mean = 0.0;
  for (long c : counts) mean += static_cast<double>(c);
  mean /= static_cast<double>(counts.size());
  double var = 0.0;
  for (long c : counts) var += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  var /= static_cast<double>(counts.size());
  s.center = mean;
  s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
  return s;
}

void NdpConfig::validate() const {
  if (K < 2 || L < 2) throw InvalidArgument("ndp: K and L must be at least 2");
  if (n_iter < 1 || burn_in < 0 || burn_in >= n_iter) throw InvalidArgument("ndp: need 0 <= burn_in < n_iter");
  if (thin < 1) throw InvalidArgument("ndp: thin must be positive");
  if (!(alpha_init > 0.0) || !(beta_init > 0.0)) throw InvalidArgument("ndp: concentrations must be positive");
  for (const GammaPrior& g : {priors.alpha, priors.beta}) {
    if (!(g.shape > 0.0) || !(g.rate > 0.0)) throw InvalidArgument("ndp: gamma hyperprior must be proper");
  }
  if (!(priors.counts.kappa0 > 0.0) || !(priors.counts.a0 > 0.0) || !(priors.counts.b0 > 0.0)) {
    throw InvalidArgument("ndp: count prior must be proper");
  }
  if (atom_stride < 0) throw InvalidArgument("ndp: atom_stride must be non-negative");
}

int NdpState::occupied() const {
  std::vector<char> seen(static_cast<std::size_t>(K), 0);
  int count = 0;
  for (int z : subject_assign) {
    if (!seen[static_cast<std::size_t>(z)]) {
      seen[static_cast<std::size_t>(z)] = 1;
      ++count;
    }
  }
  return count;
}

void NdpState::validate() const {
  if (subject_weights.size() != K || atom_weights.rows() != L || atom_weights.cols() != K) {
    throw InvalidArgument("ndp state: weight shapes do not match K, L");
  }
  if (std::abs(subject_weights.sum() - 1.0) > 1e-12) throw InvalidArgument("ndp state: subject weights do not sum to 1");
  for (int h = 0; h < K; ++h) {
    if (std::abs(atom_weights.col(h).sum() - 1.0) > 1e-12) {
      throw InvalidArgument("ndp state: atom weight column does not sum to 1");
    }
  }
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  for (Eigen::Index h = 0; h < subject_sticks.size(); ++h) {
    if (!in_unit(subject_sticks(h))) throw InvalidArgument("ndp state: subject stick outside (0,1)");
  }
  for (Eigen::Index i = 0; i < atom_sticks.size(); ++i) {
    if (!in_unit(atom_sticks.data()[i])) throw InvalidArgument("ndp state: atom stick outside (0,1)");
  }
  for (const CountParams& c : count_params) {
    if (!(c.variance > 0.0)) throw InvalidArgument("ndp state: count variance must be positive");
  }
  for (int z : subject_assign) {
    if (z < 0 || z >= K) throw InvalidArgument("ndp state: subject assignment out of range");
  }
  for (const auto& fibers : fiber_assign) {
    for (int x : fibers) {
      if (x < 0 || x >= L) throw InvalidArgument("ndp state: fiber assignment out of range");
    }
  }
}

NdpModel::NdpModel(std::vector<SubjectData> subjects_in, const NdpConfig& config)
    : subjects(std::move(subjects_in)),
      priors(config.priors),
      joint_counts(config.joint_counts),
      likelihood_free(config.likelihood_free) {
  if (subjects.size() < 2) throw InvalidArgument("ndp: need at least 2 subjects");
  const FeatureTable& first = subjects.front().fibers;
  for (const SubjectData& s : subjects) {
    if (!first.blocks.empty() && s.fibers.size() < 1) throw InvalidArgument("ndp: subject '" + s.id + "' has no fibers");
    if (s.count < 0) throw InvalidArgument("ndp: subject '" + s.id + "' has a negative count");
    if (s.fibers.components != first.components) throw InvalidArgument("ndp: subjects use different components");
    for (std::size_t b = 0; b < first.blocks.size(); ++b) {
      if (s.fibers.dim(b) != first.dim(b)) throw InvalidArgument("ndp: inconsistent feature dimensions");
    }
  }
  if (first.blocks.empty() && !joint_counts && !likelihood_free) {
    throw InvalidArgument("ndp: no fiber components selected and count model disabled");
  }
  atom_priors = resolve_priors(config.priors.atoms, first);
  std::vector<long> counts;
  for (const SubjectData& s : subjects) counts.push_back(s.count);
  count_scaling = CountScaling::from_counts(counts);
}

void sample_subject_assign(NdpState& state, const NdpModel& model, Rng& rng) {
  const int K = state.K;
  const int L = state.L;
  const bool use_fibers = !model.likelihood_free && model.n_blocks() > 0;
  const bool use_counts = !model.likelihood_free && model.joint_counts;
  AtomDensities dens;
  if (use_fibers) dens = atom_densities(state);
  const Eigen::MatrixXd log_w = state.atom_weights.array().log().matrix();
  std::vector<double> lp(static_cast<std::size_t>(K));
  std::vector<double> terms(static_cast<std::size_t>(L));
  for (std::size_t j = 0; j < model.subjects.size(); ++j) {
    const SubjectData& subject = model.subjects[j];
    for (int h = 0; h < K; ++h) {
      double value = std::log(state.subject_weights(h));
      if (value == kNegInf) {
        lp[static_cast<std::size_t>(h)] = value;
        continue;
      }
      if (use_fibers) {
        const auto& column = dens[static_cast<std::size_t>(h)];
        for (Eigen::Index i = 0; i < subject.fibers.size(); ++i) {
          for (int l = 0; l < L; ++l) {
            const double lw = log_w(l, h);
            terms[static_cast<std::size_t>(l)] =
                lw == kNegInf ? lw : lw + fiber_loglik(column[static_cast<std::size_t>(l)], subject.fibers, i);
          }
          value += log_sum_exp(terms);
        }
      }
      if (use_counts) {
        value += rounded_gaussian_logpmf(subject.count,
                                         model.count_scaling.to_raw(state.count_params[static_cast<std::size_t>(h)]));
      }
      lp[static_cast<std::size_t>(h)] = value;
    }
    state.subject_assign[j] = rng.categorical_log(lp);
  }
}

void sample_fiber_assign(NdpState& state, const NdpModel& model, Rng& rng) {
  const int L = state.L;
  const bool use_fibers = !model.likelihood_free && model.n_blocks() > 0;
  std::vector<double> lp(static_cast<std::size_t>(L));
  for (std::size_t j = 0; j < model.subjects.size(); ++j) {
    const FeatureTable& fibers = model.subjects[j].fibers;
    const int h = state.subject_assign[j];
    std::vector<std::vector<GaussianDensity>> column;
    if (use_fibers) {
      for (int l = 0; l < L; ++l) {
        std::vector<GaussianDensity> atom;
        for (const GaussianParams& p : state.atoms[static_cast<std::size_t>(h)][static_cast<std::size_t>(l)]) {
          atom.emplace_back(p);
        }
        column.push_back(std::move(atom));
      }
    }
    auto& assign = state.fiber_assign[j];
    assign.resize(static_cast<std::size_t>(fibers.size()));
    for (Eigen::Index i = 0; i < fibers.size(); ++i) {
      for (int l = 0; l < L; ++l) {
        const double lw = std::log(state.atom_weights(l, h));
        lp[static_cast<std::size_t>(l)] =
            (lw == kNegInf || !use_fibers) ? lw : lw + fiber_loglik(column[static_cast<std::size_t>(l)], fibers, i);
      }
      assign[static_cast<std::size_t>(i)] = rng.categorical_log(lp);
    }
  }
}

void sample_subject_sticks(NdpState& state, Rng& rng) {
  const int K = state.K;
  std::vector<double> m(static_cast<std::size_t>(K), 0.0);
  for (int z : state.subject_assign) m[static_cast<std::size_t>(z)] += 1.0;
  double tail = 0.0;
  for (double v : m) tail += v;
  for (int h = 0; h < K - 1; ++h) {
    tail -= m[static_cast<std::size_t>(h)];
    const BetaDraw d = rng.beta(1.0 + m[static_cast<std::size_t>(h)], state.alpha + tail);
    state.subject_sticks(h) = d.value;
    state.subject_stick_log_complement(h) = d.log_complement;
  }
  state.subject_weights = stick_breaking(state.subject_sticks, state.subject_stick_log_complement, K);
}

void sample_atom_sticks(NdpState& state, const NdpModel& model, Rng& rng) {
  const int K = state.K;
  const int L = state.L;
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(L, K);
  for (std::size_t j = 0; j < model.subjects.size(); ++j) {
    const int h = state.subject_assign[j];
    for (int l : state.fiber_assign[j]) n(l, h) += 1.0;
  }
  for (int h = 0; h < K; ++h) {
    double tail = n.col(h).sum();
    for (int l = 0; l < L - 1; ++l) {
      tail -= n(l, h);
      const BetaDraw d = rng.beta(1.0 + n(l, h), state.beta + tail);
      state.atom_sticks(l, h) = d.value;
      state.atom_stick_log_complement(l, h) = d.log_complement;
    }
    state.atom_weights.col(h) =
        stick_breaking(state.atom_sticks.col(h), state.atom_stick_log_complement.col(h), L);
  }
}

void sample_atoms(NdpState& state, const NdpModel& model, Rng& rng) {
  const int K = state.K;
  const int L = state.L;
  const std::size_t n_blocks = model.n_blocks();
  std::vector<std::vector<std::vector<SufficientStats>>> stats(static_cast<std::size_t>(K));
  for (auto& col : stats) {
    col.resize(static_cast<std::size_t>(L));
    for (auto& cell : col) {
      for (std::size_t b = 0; b < n_blocks; ++b) cell.emplace_back(model.atom_priors[b].dim());
    }
  }
  if (!model.likelihood_free) {
    for (std::size_t j = 0; j < model.subjects.size(); ++j) {
      const FeatureTable& fibers = model.subjects[j].fibers;
      auto& col = stats[static_cast<std::size_t>(state.subject_assign[j])];
      for (Eigen::Index i = 0; i < fibers.size(); ++i) {
        auto& cell = col[static_cast<std::size_t>(state.fiber_assign[j][static_cast<std::size_t>(i)])];
        for (std::size_t b = 0; b < n_blocks; ++b) cell[b].add(fibers.blocks[b].col(i).data());
      }
    }
  }
  for (int h = 0; h < K; ++h) {
    for (int l = 0; l < L; ++l) {
      auto& atom = state.atoms[static_cast<std::size_t>(h)][static_cast<std::size_t>(l)];
      atom.clear();
      for (std::size_t b = 0; b < n_blocks; ++b) {
        atom.push_back(sample_niw(
            niw_posterior(model.atom_priors[b], stats[static_cast<std::size_t>(h)][static_cast<std::size_t>(l)][b]),
            rng));
      }
    }
  }
}

void sample_concentrations(NdpState& state, const NdpPriors& priors, Rng& rng) {
  double sum_v = 0.0;
  for (Eigen::Index h = 0; h < state.subject_stick_log_complement.size(); ++h) {
    assert(std::isfinite(state.subject_stick_log_complement(h)));
    sum_v += state.subject_stick_log_complement(h);
  }
  double sum_u = 0.0;
  for (Eigen::Index i = 0; i < state.atom_stick_log_complement.size(); ++i) {
    assert(std::isfinite(state.atom_stick_log_complement.data()[i]));
    sum_u += state.atom_stick_log_complement.data()[i];
  }
  state.alpha = rng.gamma(priors.alpha.shape + (state.K - 1), priors.alpha.rate - sum_v);
  state.beta = rng.gamma(priors.beta.shape + static_cast<double>(state.K) * (state.L - 1), priors.beta.rate - sum_u);
}

void sample_count_params(NdpState& state, const NdpModel& model, Rng& rng) {
  const CountScaling& scaling = model.count_scaling;
  std::vector<std::vector<double>> per_cluster(static_cast<std::size_t>(state.K));
  state.latent_counts.resize(model.subjects.size());
  for (std::size_t j = 0; j < model.subjects.size(); ++j) {
    const int h = state.subject_assign[j];
    const CountParams& psi = state.count_params[static_cast<std::size_t>(h)];
    auto [lo, hi] = rounding_interval(model.subjects[j].count);
    lo = std::isinf(lo) ? lo : (lo - scaling.center) / scaling.scale;
    hi = (hi - scaling.center) / scaling.scale;
    const double latent = rng.truncated_normal(psi.mean, std::sqrt(psi.variance), lo, hi);
    state.latent_counts[j] = latent;
    per_cluster[static_cast<std::size_t>(h)].push_back(latent);
  }
  for (int h = 0; h < state.K; ++h) {
    state.count_params[static_cast<std::size_t>(h)] =
        sample_nig(model.priors.counts, per_cluster[static_cast<std::size_t>(h)], rng);
  }
}

NdpState initial_ndp_state(const NdpModel& model, const NdpConfig& config, Rng& rng) {
  NdpState state;
  state.K = config.K;
  state.L = config.L;
  state.alpha = config.alpha_init;
  state.beta = config.beta_init;
  state.subject_sticks = Eigen::VectorXd::Zero(config.K - 1);
  state.subject_stick_log_complement = Eigen::VectorXd::Zero(config.K - 1);
  state.atom_sticks = Eigen::MatrixXd::Zero(config.L - 1, config.K);
  state.atom_stick_log_complement = Eigen::MatrixXd::Zero(config.L - 1, config.K);
  state.atom_weights = Eigen::MatrixXd::Zero(config.L, config.K);
  state.atoms.assign(static_cast<std::size_t>(config.K),
                     std::vector<std::vector<GaussianParams>>(static_cast<std::size_t>(config.L)));
  const std::size_t J = model.subjects.size();
  state.subject_assign.resize(J);
  state.fiber_assign.resize(J);
  std::uniform_int_distribution<int> pick_h(0, config.K - 1);
  std::uniform_int_distribution<int> pick_l(0, config.L - 1);
  for (std::size_t j = 0; j < J; ++j) {
    state.subject_assign[j] = pick_h(rng.engine());
    state.fiber_assign[j].resize(static_cast<std::size_t>(model.subjects[j].fibers.size()));
    for (int& x : state.fiber_assign[j]) x = pick_l(rng.engine());
  }
  if (model.joint_counts) {
    state.count_params.resize(static_cast<std::size_t>(config.K));
    for (CountParams& c : state.count_params) c = sample_nig(model.priors.counts, {}, rng);
    sample_count_params(state, model, rng);
  }
  sample_atoms(state, model, rng);
  sample_subject_sticks(state, rng);
  sample_atom_sticks(state, model, rng);
  return state;
}

std::vector<int> NdpChain::occupied_counts() const {
  std::vector<int> out;
  out.reserve(draws.size());
  for (const NdpDraw& d : draws) out.push_back(d.occupied);
  return out;
}

std::vector<std::vector<int>> NdpChain::subject_assign_draws() const {
  std::vector<std::vector<int>> out;
  out.reserve(draws.size());
  for (const NdpDraw& d : draws) out.push_back(d.subject_assign);
  return out;
}

NdpChain fit_ndp(std::vector<SubjectData> subjects, const NdpConfig& config) {
  config.validate();
  const NdpModel model(std::move(subjects), config);
  Rng rng(config.seed);
  NdpState state = initial_ndp_state(model, config, rng);
  const bool fibers_matter = !model.likelihood_free && model.n_blocks() > 0;

  NdpChain chain;
  const int n_saved = (config.n_iter - config.burn_in) / config.thin;
  chain.draws.reserve(static_cast<std::size_t>(n_saved));
  for (int it = 0; it < config.n_iter; ++it) {
    sample_subject_assign(state, model, rng);
    sample_fiber_assign(state, model, rng);
    sample_subject_sticks(state, rng);
    sample_atom_sticks(state, model, rng);
    if (fibers_matter) sample_atoms(state, model, rng);
    if (config.update_concentrations) sample_concentrations(state, model.priors, rng);
    if (model.joint_counts && !model.likelihood_free) sample_count_params(state, model, rng);

    const int since = it - config.burn_in;
    if (since >= 0 && since % config.thin == 0 && static_cast<int>(chain.draws.size()) < n_saved) {
      const int index = static_cast<int>(chain.draws.size());
      chain.draws.push_back({it, state.subject_assign, state.fiber_assign, state.subject_weights, state.alpha,
                             state.beta, state.occupied(), state.count_params});
      if (config.atom_stride > 0 && index % config.atom_stride == 0) chain.atoms.emplace_back(index, state.atoms);
    }
  }
  return chain;
}

}  // namespace fiberbayes
