#include "fiberbayes/cluster_eval.hpp"
#include "fiberbayes/error.hpp"
#include "fiberbayes/ndp.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>

using namespace fiberbayes;
using doctest::Approx;

namespace {

using fbtest::normal_cdf;

double normal_pdf2(const Eigen::Vector2d& x, const GaussianParams& p) {
  const Eigen::Vector2d r = x - p.mean;
  return std::exp(-0.5 * r.dot(p.cov.inverse() * r)) / (2.0 * std::numbers::pi * std::sqrt(p.cov.determinant()));
}

SubjectData subject(const std::string& id, const std::vector<Eigen::Vector2d>& points, long count) {
  Eigen::MatrixXd block(2, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) block.col(static_cast<Eigen::Index>(i)) = points[i];
  return {id, FeatureTable{{Component::Shape}, {block}}, count};
}

SubjectData count_only(const std::string& id, long count) { return {id, FeatureTable{}, count}; }

std::vector<Eigen::Vector2d> sample_blobs(std::mt19937_64& gen, const std::vector<Eigen::Vector2d>& centers,
                                          int per_center, double sd) {
  std::normal_distribution<double> z(0.0, sd);
  std::vector<Eigen::Vector2d> out;
  for (const auto& c : centers) {
    for (int i = 0; i < per_center; ++i) out.push_back(c + Eigen::Vector2d(z(gen), z(gen)));
  }
  return out;
}

GaussianParams iso(double x, double y, double var) {
  return {Eigen::Vector2d(x, y), var * Eigen::Matrix2d::Identity()};
}

}  // namespace

TEST_CASE("rounded Gaussian count kernel") {
  const CountParams standard{0.0, 1.0};
  CHECK(std::exp(rounded_gaussian_logpmf(0, standard)) == 0.5);
  CHECK(std::abs(std::exp(rounded_gaussian_logpmf(1, standard)) - (normal_cdf(1.0) - normal_cdf(0.0))) < 1e-12);
  CHECK(rounded_gaussian_logpmf(-1, standard) == -std::numeric_limits<double>::infinity());

  for (const CountParams psi : {CountParams{0.0, 1.0}, CountParams{5.3, 4.0}, CountParams{-2.0, 0.25},
                                CountParams{40.0, 100.0}, CountParams{0.4, 1e-4}}) {
    double total = 0.0;
    const double sd = std::sqrt(psi.variance);
    for (long w = 0; w < 400; ++w) {
      const double p = std::exp(rounded_gaussian_logpmf(w, psi));
      const double lo = w == 0 ? 0.0 : normal_cdf((w - 1 - psi.mean) / sd);
      CHECK(std::abs(p - (normal_cdf((w - psi.mean) / sd) - lo)) < 1e-12);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
  // Far tail stays finite in log space.
  CHECK(std::isfinite(rounded_gaussian_logpmf(0, CountParams{60.0, 1.0})));
  CHECK(rounded_gaussian_logpmf(0, CountParams{60.0, 1.0}) < -1000.0);
}

TEST_CASE("count scaling") {
  const CountScaling s = CountScaling::from_counts({2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(s.center == Approx(5.0));
  CHECK(s.scale == Approx(2.0));
  const CountParams raw = s.to_raw({0.5, 0.25});
  CHECK(raw.mean == Approx(6.0));
  CHECK(raw.variance == Approx(1.0));
  CHECK(CountScaling::from_counts({3, 3, 3}).scale == 1.0);
}

TEST_CASE("assignment steps follow their full conditionals") {
  NdpConfig config;
  config.K = 3;
  config.L = 2;
  const std::vector<SubjectData> subjects{subject("a", {{0.3, -0.2}, {1.0, 0.4}}, 2),
                                          subject("b", {{-0.5, 0.8}}, 1)};
  const NdpModel model(subjects, config);
  Rng rng(41);
  NdpState state = initial_ndp_state(model, config, rng);
  state.subject_weights = Eigen::Vector3d(0.5, 0.3, 0.2);
  state.atom_weights.resize(2, 3);
  state.atom_weights << 0.6, 0.1, 0.5,  //
      0.4, 0.9, 0.5;
  state.atoms = {{{iso(0, 0, 1)}, {iso(1, 0, 0.5)}},
                 {{iso(0, 1, 1)}, {iso(-1, 1, 2)}},
                 {{iso(2, 0, 1)}, {iso(0, 0, 3)}}};

  SUBCASE("subject clusters") {
    const auto& pts = subjects[0].fibers.blocks[0];
    Eigen::Vector3d expected;
    for (int h = 0; h < 3; ++h) {
      double like = state.subject_weights(h);
      for (int i = 0; i < 2; ++i) {
        double mix = 0.0;
        for (int l = 0; l < 2; ++l) mix += state.atom_weights(l, h) * normal_pdf2(pts.col(i), state.atoms[h][l][0]);
        like *= mix;
      }
      expected(h) = like;
    }
    expected /= expected.sum();
    Eigen::Vector3d freq = Eigen::Vector3d::Zero();
    const int draws = 30000;
    for (int t = 0; t < draws; ++t) {
      sample_subject_assign(state, model, rng);
      freq(state.subject_assign[0]) += 1.0;
    }
    freq /= draws;
    for (int h = 0; h < 3; ++h) {
      CHECK(std::abs(freq(h) - expected(h)) < 4 * std::sqrt(expected(h) * (1 - expected(h)) / draws));
    }
  }
  SUBCASE("fiber atoms") {
    state.subject_assign = {1, 2};
    const Eigen::Vector2d x = subjects[0].fibers.blocks[0].col(1);
    const double p0 = state.atom_weights(0, 1) * normal_pdf2(x, state.atoms[1][0][0]);
    const double p1 = state.atom_weights(1, 1) * normal_pdf2(x, state.atoms[1][1][0]);
    const double expected = p0 / (p0 + p1);
    double freq = 0.0;
    const int draws = 30000;
    for (int t = 0; t < draws; ++t) {
      sample_fiber_assign(state, model, rng);
      freq += state.fiber_assign[0][1] == 0;
    }
    freq /= draws;
    CHECK(std::abs(freq - expected) < 4 * std::sqrt(expected * (1 - expected) / draws));
  }
  SUBCASE("identical clusters are exchangeable") {
    state.subject_weights = Eigen::Vector3d::Constant(1.0 / 3.0);
    state.atom_weights.setConstant(0.5);
    state.atoms = {{{iso(0, 0, 1)}, {iso(1, 0, 1)}}, {{iso(0, 0, 1)}, {iso(1, 0, 1)}}, {{iso(0, 0, 1)}, {iso(1, 0, 1)}}};
    Eigen::Vector3d freq = Eigen::Vector3d::Zero();
    const int draws = 30000;
    for (int t = 0; t < draws; ++t) {
      sample_subject_assign(state, model, rng);
      freq(state.subject_assign[1]) += 1.0;
    }
    freq /= draws;
    for (int h = 0; h < 3; ++h) CHECK(std::abs(freq(h) - 1.0 / 3.0) < 4 * std::sqrt(2.0 / 9.0 / draws));
  }
}

TEST_CASE("stick and concentration steps") {
  NdpConfig config;
  config.K = 4;
  config.L = 3;
  std::mt19937_64 gen(42);
  std::vector<SubjectData> subjects;
  for (int j = 0; j < 5; ++j) subjects.push_back(subject("s" + std::to_string(j), sample_blobs(gen, {{0, 0}}, 6, 1.0), 6));
  const NdpModel model(subjects, config);
  Rng rng(43);
  NdpState state = initial_ndp_state(model, config, rng);
  for (int t = 0; t < 50; ++t) {
    sample_subject_assign(state, model, rng);
    sample_fiber_assign(state, model, rng);
    sample_subject_sticks(state, rng);
    sample_atom_sticks(state, model, rng);
    CHECK(state.subject_weights.sum() == Approx(1.0).epsilon(1e-12));
    CHECK((state.subject_weights.array() >= 0.0).all());
    for (int h = 0; h < 4; ++h) CHECK(state.atom_weights.col(h).sum() == Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(state.validate());
  }

  const double sum_v = state.subject_stick_log_complement.sum();
  const double sum_u = state.atom_stick_log_complement.sum();
  const NdpPriors priors;
  const double mean_alpha = (priors.alpha.shape + 3) / (priors.alpha.rate - sum_v);
  const double mean_beta = (priors.beta.shape + 4 * 2) / (priors.beta.rate - sum_u);
  double a = 0.0;
  double b = 0.0;
  const int draws = 40000;
  for (int t = 0; t < draws; ++t) {
    sample_concentrations(state, priors, rng);
    a += state.alpha;
    b += state.beta;
  }
  const double sd_alpha = std::sqrt(priors.alpha.shape + 3) / (priors.alpha.rate - sum_v);
  const double sd_beta = std::sqrt(priors.beta.shape + 8) / (priors.beta.rate - sum_u);
  CHECK(std::abs(a / draws - mean_alpha) < 4 * sd_alpha / std::sqrt(draws));
  CHECK(std::abs(b / draws - mean_beta) < 4 * sd_beta / std::sqrt(draws));
}

TEST_CASE("prior simulation keeps the concentration hyperprior") {
  NdpConfig config;
  config.K = 6;
  config.L = 5;
  config.n_iter = 20000;
  config.burn_in = 1000;
  config.likelihood_free = true;
  config.seed = 44;
  std::vector<SubjectData> subjects;
  for (int j = 0; j < 6; ++j) subjects.push_back(subject("s" + std::to_string(j), {{0.0, 0.0}, {1.0, 1.0}}, 2));
  const NdpChain chain = fit_ndp(subjects, config);
  std::vector<double> alpha;
  std::vector<double> beta;
  for (const NdpDraw& d : chain.draws) {
    alpha.push_back(d.alpha);
    beta.push_back(d.beta);
  }
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    ma += alpha[t];
    mb += beta[t];
  }
  ma /= static_cast<double>(alpha.size());
  mb /= static_cast<double>(beta.size());
  // Gamma(3, 3) hyperprior: mean 1.
  CHECK(std::abs(ma - 1.0) < 4 * fbtest::batch_se(alpha));
  CHECK(std::abs(mb - 1.0) < 4 * fbtest::batch_se(beta));
}

TEST_CASE("count step targets the rounded-Gaussian posterior") {
  NdpConfig config;
  config.K = 2;
  config.L = 2;
  config.joint_counts = true;
  const std::vector<long> counts{3, 5, 4, 6, 2, 5};
  std::vector<SubjectData> subjects;
  for (std::size_t j = 0; j < counts.size(); ++j) subjects.push_back(count_only("s" + std::to_string(j), counts[j]));
  const NdpModel model(subjects, config);
  Rng rng(45);
  NdpState state = initial_ndp_state(model, config, rng);
  state.subject_assign.assign(counts.size(), 0);

  // Posterior moments by quadrature over (mu, log variance).
  const NigParams& nig = config.priors.counts;
  const CountScaling& sc = model.count_scaling;
  double z = 0.0;
  double m_mu = 0.0;
  double m_var = 0.0;
  for (double mu = -4.0; mu <= 4.0; mu += 0.01) {
    for (double t = -7.0; t <= 3.0; t += 0.01) {
      const double var = std::exp(t);
      const double sd = std::sqrt(var);
      double log_post = -(nig.a0 + 1.0) * t - nig.b0 / var - 0.5 * t - 0.5 * nig.kappa0 * (mu - nig.mu0) * (mu - nig.mu0) / var + t;
      double like = 1.0;
      for (long w : counts) {
        const double hi = (static_cast<double>(w) - sc.center) / sc.scale;
        const double lo = w == 0 ? -std::numeric_limits<double>::infinity() : (static_cast<double>(w) - 1.0 - sc.center) / sc.scale;
        like *= normal_cdf((hi - mu) / sd) - (std::isinf(lo) ? 0.0 : normal_cdf((lo - mu) / sd));
      }
      const double p = std::exp(log_post) * like;
      z += p;
      m_mu += p * mu;
      m_var += p * var;
    }
  }
  m_mu /= z;
  m_var /= z;

  std::vector<double> mu_draws;
  std::vector<double> var_draws;
  for (int t = 0; t < 60000; ++t) {
    sample_count_params(state, model, rng);
    mu_draws.push_back(state.count_params[0].mean);
    var_draws.push_back(state.count_params[0].variance);
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const double raw = sc.center + sc.scale * state.latent_counts[j];
      CHECK((raw > counts[j] - 1 - 1e-9 && raw <= counts[j] + 1e-9));
    }
  }
  double sm = 0.0;
  double sv = 0.0;
  for (std::size_t t = 0; t < mu_draws.size(); ++t) {
    sm += mu_draws[t];
    sv += var_draws[t];
  }
  sm /= static_cast<double>(mu_draws.size());
  sv /= static_cast<double>(var_draws.size());
  CHECK(std::abs(sm - m_mu) < 4 * fbtest::batch_se(mu_draws));
  CHECK(std::abs(sv - m_var) < 4 * fbtest::batch_se(var_draws));
}

TEST_CASE("population sampler") {
  std::mt19937_64 gen(46);
  NdpConfig config;
  config.K = 5;
  config.L = 6;
  config.n_iter = 600;
  config.burn_in = 100;
  config.seed = 47;

  SUBCASE("fiber distributions separate subject groups") {
    std::vector<SubjectData> subjects;
    std::vector<int> truth;
    for (int j = 0; j < 6; ++j) {
      const bool a = j % 2 == 0;
      const std::vector<Eigen::Vector2d> centers =
          a ? std::vector<Eigen::Vector2d>{{-2, 0}, {2, 0}} : std::vector<Eigen::Vector2d>{{0, 2}, {0, -2}};
      subjects.push_back(subject("s" + std::to_string(j), sample_blobs(gen, centers, 15, 0.3), 30));
      truth.push_back(a ? 0 : 1);
    }
    const NdpChain chain = fit_ndp(subjects, config);
    CHECK(posterior_mode_k(chain.occupied_counts()) == 2);
    const PartitionEstimate est = extract_partition(coclustering(chain.subject_assign_draws()), 2);
    CHECK(adjusted_rand_index(Partition(truth), est.partition) == Approx(1.0));
  }
  SUBCASE("counts alone separate subject groups") {
    // The default count prior puts the cluster variance near the population
    // variance, which merges tight count groups; a smaller scale lets them split.
    config.joint_counts = true;
    config.priors.counts.b0 = 0.02;
    std::vector<SubjectData> subjects;
    std::vector<int> truth;
    std::normal_distribution<double> z(0.0, 3.0);
    for (int j = 0; j < 16; ++j) {
      const long base = j % 2 == 0 ? 20 : 120;
      subjects.push_back(count_only("s" + std::to_string(j), base + std::lround(z(gen))));
      truth.push_back(j % 2);
    }
    const NdpChain chain = fit_ndp(subjects, config);
    const int k = posterior_mode_k(chain.occupied_counts());
    CHECK(k == 2);
    const PartitionEstimate est = extract_partition(coclustering(chain.subject_assign_draws()), 2);
    CHECK(adjusted_rand_index(Partition(truth), est.partition) == Approx(1.0));
    CHECK(chain.draws.front().count_params.size() == 5);
  }
  SUBCASE("identical seeds give identical chains") {
    std::vector<SubjectData> subjects;
    for (int j = 0; j < 4; ++j) subjects.push_back(subject("s" + std::to_string(j), sample_blobs(gen, {{0, 0}}, 5, 1.0), 5));
    config.n_iter = 100;
    config.burn_in = 10;
    config.atom_stride = 30;
    const NdpChain a = fit_ndp(subjects, config);
    const NdpChain b = fit_ndp(subjects, config);
    REQUIRE(a.draws.size() == b.draws.size());
    for (std::size_t t = 0; t < a.draws.size(); ++t) {
      CHECK(a.draws[t].subject_assign == b.draws[t].subject_assign);
      CHECK(a.draws[t].fiber_assign == b.draws[t].fiber_assign);
      CHECK(a.draws[t].alpha == b.draws[t].alpha);
    }
    CHECK(a.atoms.size() == 3);
  }
}

TEST_CASE("stick steps: documented moments") {
  NdpState s;
  s.K = 4;
  s.L = 3;
  s.alpha = 1.0;
  s.beta = 1.5;
  s.subject_sticks = Eigen::VectorXd::Zero(3);
  s.subject_stick_log_complement = Eigen::VectorXd::Zero(3);
  Rng rng(48);
  double first = 0.0;
  const int draws = 40000;
  for (int t = 0; t < draws; ++t) {
    sample_subject_sticks(s, rng);
    first += s.subject_weights(0);
    CHECK(s.subject_weights.sum() == Approx(1.0).epsilon(1e-12));
  }
  // Beta(1, 1) first stick.
  CHECK(std::abs(first / draws - 0.5) < 4 * std::sqrt(1.0 / 12.0 / draws));

  s.subject_assign.assign(10000, 0);
  int big = 0;
  for (int t = 0; t < 1000; ++t) {
    sample_subject_sticks(s, rng);
    big += s.subject_weights(0) > 0.99;
  }
  CHECK(big >= 999);
}

TEST_CASE("atom steps: empty columns, pooling and determinism") {
  NdpConfig config;
  config.K = 3;
  config.L = 2;
  config.beta_init = 1.5;
  const std::vector<SubjectData> subjects{subject("a", {{1.0, 2.0}, {1.5, 2.5}}, 2),
                                          subject("b", {{2.0, 1.0}, {0.5, 1.5}, {1.0, 1.0}}, 3)};
  const NdpModel model(subjects, config);
  Rng rng(49);
  NdpState state = initial_ndp_state(model, config, rng);
  state.beta = 1.5;

  SUBCASE("empty column sticks come from the prior") {
    state.subject_assign = {0, 0};
    double first = 0.0;
    const int draws = 40000;
    for (int t = 0; t < draws; ++t) {
      sample_atom_sticks(state, model, rng);
      first += state.atom_weights(0, 2);
    }
    const double m = 1.0 / 2.5;
    const double var = 1.5 / (2.5 * 2.5 * 3.5);
    CHECK(std::abs(first / draws - m) < 4 * std::sqrt(var / draws));
  }
  SUBCASE("pooled cell matches the single-cluster conjugate posterior") {
    state.subject_assign = {1, 1};
    state.fiber_assign = {{0, 0}, {0, 0, 0}};
    SufficientStats stats(2);
    for (const SubjectData& sd : subjects) {
      for (Eigen::Index i = 0; i < sd.fibers.size(); ++i) stats.add(sd.fibers.blocks[0].col(i));
    }
    CHECK(stats.count == 5);
    const NiwParams post = niw_posterior(model.atom_priors[0], stats);
    Eigen::Vector2d mean_full = Eigen::Vector2d::Zero();
    Eigen::Vector2d mean_empty = Eigen::Vector2d::Zero();
    std::vector<double> xs;
    std::vector<double> es;
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
      sample_atoms(state, model, rng);
      mean_full += state.atoms[1][0][0].mean;
      mean_empty += state.atoms[2][1][0].mean;
      xs.push_back(state.atoms[1][0][0].mean(0));
      es.push_back(state.atoms[2][1][0].mean(0));
    }
    mean_full /= draws;
    mean_empty /= draws;
    CHECK(std::abs(mean_full(0) - post.mu0(0)) < 4 * fbtest::batch_se(xs));
    CHECK(std::abs(mean_empty(0) - model.atom_priors[0].mu0(0)) < 4 * fbtest::batch_se(es));
  }
  SUBCASE("fiber allocation limits") {
    state.subject_assign = {0, 0};
    state.atom_weights.col(0) = Eigen::Vector2d(0.0, 1.0);
    sample_fiber_assign(state, model, rng);
    for (const auto& f : state.fiber_assign) {
      for (int l : f) CHECK(l == 1);
    }
    state.atom_weights.col(0) = Eigen::Vector2d(0.5, 0.5);
    state.atoms[0][1] = state.atoms[0][0];
    double zero = 0.0;
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
      sample_fiber_assign(state, model, rng);
      zero += state.fiber_assign[1][2] == 0;
    }
    CHECK(std::abs(zero / draws - 0.5) < 4 * std::sqrt(0.25 / draws));
  }
}

TEST_CASE("concentration step limits and monotonicity") {
  NdpState s;
  s.K = 9;
  s.L = 15;
  const NdpPriors priors;
  Rng rng(50);
  auto mean_alpha = [&](double stick) {
    s.subject_stick_log_complement = Eigen::VectorXd::Constant(s.K - 1, std::log1p(-stick));
    s.atom_stick_log_complement = Eigen::MatrixXd::Constant(s.L - 1, s.K, std::log1p(-stick));
    double a = 0.0;
    for (int t = 0; t < 20000; ++t) {
      sample_concentrations(s, priors, rng);
      a += s.alpha;
    }
    return a / 20000.0;
  };
  const double limit = mean_alpha(1e-12);
  const double expected = (priors.alpha.shape + 8) / priors.alpha.rate;
  CHECK(std::abs(limit - expected) < 4 * std::sqrt(priors.alpha.shape + 8) / priors.alpha.rate / std::sqrt(20000.0));
  CHECK(mean_alpha(0.5) < limit);
  CHECK(mean_alpha(0.9) < mean_alpha(0.5));
}

TEST_CASE("count step with equal counts and empty clusters") {
  NdpConfig config;
  config.K = 2;
  config.L = 2;
  config.joint_counts = true;
  config.priors.counts = NigParams{0.0, 0.01, 50.0, 5.0};
  std::vector<SubjectData> subjects;
  for (int j = 0; j < 8; ++j) subjects.push_back(count_only("s" + std::to_string(j), 37));
  const NdpModel model(subjects, config);
  Rng rng(51);
  NdpState state = initial_ndp_state(model, config, rng);
  state.subject_assign.assign(8, 0);
  double raw_mean = 0.0;
  double empty_var = 0.0;
  std::vector<double> ev;
  const int draws = 20000;
  for (int t = 0; t < draws; ++t) {
    sample_count_params(state, model, rng);
    raw_mean += model.count_scaling.to_raw(state.count_params[0]).mean;
    ev.push_back(state.count_params[1].variance);
    empty_var += ev.back();
  }
  CHECK(std::abs(raw_mean / draws - 37.0) < 1.0);
  // Empty cluster: variance from IG(50, 5), mean 5/49.
  CHECK(std::abs(empty_var / draws - 5.0 / 49.0) < 4 * fbtest::batch_se(ev));
}

TEST_CASE("joint mode with a flat count kernel matches curve-only mode") {
  std::mt19937_64 gen(52);
  std::vector<SubjectData> subjects;
  std::normal_distribution<double> z(0.0, 20.0);
  for (int j = 0; j < 6; ++j) {
    const std::vector<Eigen::Vector2d> centers =
        j % 3 == 0 ? std::vector<Eigen::Vector2d>{{-2, 0}, {2, 0}}
                   : (j % 3 == 1 ? std::vector<Eigen::Vector2d>{{0, 2}, {0, -2}} : std::vector<Eigen::Vector2d>{{0, 0}});
    subjects.push_back(subject("s" + std::to_string(j), sample_blobs(gen, centers, 8, 0.3), 50 + std::lround(z(gen))));
  }
  NdpConfig config;
  config.K = 5;
  config.L = 5;
  config.n_iter = 1500;
  config.burn_in = 300;
  config.seed = 53;
  const Eigen::MatrixXd curve_only = coclustering(fit_ndp(subjects, config).subject_assign_draws());
  config.joint_counts = true;
  // Variance concentrated at 1e8 in standardized units.
  config.priors.counts = NigParams{0.0, 1e-8, 1e6, 1e14};
  const Eigen::MatrixXd joint = coclustering(fit_ndp(subjects, config).subject_assign_draws());
  CHECK((curve_only - joint).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("ndp validation") {
  NdpConfig config;
  config.L = 1;
  CHECK_THROWS_AS(config.validate(), InvalidArgument);
  config.L = 4;
  config.priors.alpha.rate = 0.0;
  CHECK_THROWS_AS(config.validate(), InvalidArgument);
  config = NdpConfig{};
  CHECK_THROWS_AS(NdpModel({subject("a", {{0, 0}}, 1)}, config), InvalidArgument);
  CHECK_THROWS_AS(NdpModel({count_only("a", 1), count_only("b", 2)}, config), InvalidArgument);
  CHECK_THROWS_AS(NdpModel({subject("a", {{0, 0}}, -1), subject("b", {{0, 0}}, 1)}, config), InvalidArgument);
  config.joint_counts = true;
  CHECK_NOTHROW(NdpModel({count_only("a", 1), count_only("b", 2)}, config));
}
