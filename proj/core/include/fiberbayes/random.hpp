#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>

namespace fiberbayes {

/// A draw from Beta(a, b) together with log(1 - v), computed without
/// cancellation so that sticks near 1 keep a finite complement.
struct BetaDraw {
  double value;
  double log_complement;
};

/// Seeded random source. Every stochastic routine in the library takes one
/// of these by reference; there is no global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();

  /// Gamma with shape/rate parameterization.
  double gamma(double shape, double rate);

  /// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
  double log_gamma(double shape);

  BetaDraw beta(double a, double b);

  /// Dirichlet draw, normalized in log space so that tiny concentration
  /// parameters cannot produce an all-zero vector.
  Eigen::VectorXd dirichlet(const Eigen::VectorXd& concentration);

  /// Index drawn with probability proportional to exp(log_weights[i]).
  /// Throws NumericalError when no entry has positive finite weight.
  int categorical_log(std::span<const double> log_weights);

  /// Standard normal truncated to [lower, upper] (either may be infinite).
  double truncated_standard_normal(double lower, double upper);

  /// Normal(mean, sd^2) truncated to [lower, upper].
  double truncated_normal(double mean, double sd, double lower, double upper);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Numerically stable log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);

}  // namespace fiberbayes
