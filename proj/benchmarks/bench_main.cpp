#include "fiberbayes/alignment.hpp"
#include "fiberbayes/mixture.hpp"
#include "fiberbayes/ndp.hpp"
#include "fiberbayes/preprocess.hpp"
#include "fiberbayes/synth.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace fiberbayes;

namespace {

Curve wavy(Eigen::Index n, double phase) {
  Points p(n, 3);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n - 1);
    p.row(k) << 40.0 * s, 3.0 * std::sin(std::numbers::pi * s + phase), std::cos(2.0 * std::numbers::pi * s);
  }
  return Curve(std::move(p));
}

// Standardized features of a two-bundle data set, built once.
const PreparedData& two_bundle_features() {
  static const PreparedData prepared = [] {
    PreprocessOptions opt;
    opt.basis_fibers = 100;
    opt.template_options.max_iter = 3;
    return preprocess(synth_generate(synth_preset("two-bundle", 1)).data,
                      {Component::Translation, Component::Shape, Component::Rotation}, opt);
  }();
  return prepared;
}

const PreparedData& population_features() {
  static const PreparedData prepared = [] {
    PreprocessOptions opt;
    opt.per_scan_demean = true;
    opt.basis_fibers = 100;
    opt.template_options.max_iter = 3;
    return preprocess(synth_generate(synth_preset("population", 1)).data,
                      {Component::Translation, Component::Shape, Component::Rotation}, opt);
  }();
  return prepared;
}

void BM_OptimalWarping(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Srvf a = to_srvf(wavy(n, 0.0));
  const Srvf b = to_srvf(wavy(n, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(optimal_warping(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OptimalWarping)->Arg(50)->Arg(100)->Arg(200)->Complexity();

void BM_AlignPair(benchmark::State& state) {
  const Srvf a = to_srvf(wavy(100, 0.0));
  const Srvf b = to_srvf(wavy(100, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(align_pair(a, b));
}
BENCHMARK(BM_AlignPair);

void BM_MixtureSweep(benchmark::State& state) {
  const FeatureTable& data = two_bundle_features().features;
  MixtureConfig config;
  config.K = static_cast<int>(state.range(0));
  const std::vector<NiwParams> priors = resolve_priors({}, data);
  Rng rng(7);
  MixtureState s = initial_mixture_state(data, config, priors, rng);
  for (auto _ : state) {
    gibbs_allocations(s, data, rng);
    gibbs_weights(s, rng);
    gibbs_params(s, data, priors, rng);
  }
  state.SetItemsProcessed(state.iterations() * data.size());
}
BENCHMARK(BM_MixtureSweep)->Arg(10)->Arg(20);

void BM_NdpSweep(benchmark::State& state) {
  NdpConfig config;
  config.joint_counts = state.range(0) != 0;
  const NdpModel model(split_by_scan(population_features()), config);
  Rng rng(9);
  NdpState s = initial_ndp_state(model, config, rng);
  for (auto _ : state) {
    sample_subject_assign(s, model, rng);
    sample_fiber_assign(s, model, rng);
    sample_subject_sticks(s, rng);
    sample_atom_sticks(s, model, rng);
    sample_atoms(s, model, rng);
    sample_concentrations(s, model.priors, rng);
    if (config.joint_counts) sample_count_params(s, model, rng);
  }
}
BENCHMARK(BM_NdpSweep)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
