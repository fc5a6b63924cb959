#include "fiberbayes/random.hpp"

#include "fiberbayes/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace fiberbayes {

double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double Rng::uniform() {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(engine_);
    if (u > 0.0 && u < 1.0) return u;
  }
}

double Rng::normal() { return normal_(engine_); }

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw InvalidArgument("gamma: shape and rate must be positive");
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Rng::log_gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidArgument("gamma: shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return std::log(dist(engine_));
  }
  // Gamma(a) = Gamma(a + 1) * U^(1/a).
  std::gamma_distribution<double> dist(shape + 1.0, 1.0);
  return std::log(dist(engine_)) + std::log(uniform()) / shape;
}

BetaDraw Rng::beta(double a, double b) {
  const double la = log_gamma(a);
  const double lb = log_gamma(b);
  const double m = std::max(la, lb);
  const double lse = m + std::log(std::exp(la - m) + std::exp(lb - m));
  double value = std::exp(la - lse);
  double log_complement = lb - lse;
  // Keep the stick strictly inside (0, 1).
  constexpr double kMin = std::numeric_limits<double>::min();
  const double kMax = std::nextafter(1.0, 0.0);
  value = std::clamp(value, kMin, kMax);
  log_complement = std::min(log_complement, std::log1p(-kMin));
  log_complement = std::max(log_complement, std::log1p(-kMax));
  return {value, log_complement};
}

Eigen::VectorXd Rng::dirichlet(const Eigen::VectorXd& concentration) {
  const auto k = concentration.size();
  std::vector<double> logs(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) logs[static_cast<std::size_t>(i)] = log_gamma(concentration(i));
  const double lse = log_sum_exp(logs);
  Eigen::VectorXd out(k);
  for (Eigen::Index i = 0; i < k; ++i) out(i) = std::exp(logs[static_cast<std::size_t>(i)] - lse);
  out /= out.sum();
  return out;
}

int Rng::categorical_log(std::span<const double> log_weights) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : log_weights) {
    if (std::isnan(v)) throw NumericalError("categorical: NaN log weight");
    m = std::max(m, v);
  }
  if (!std::isfinite(m)) throw NumericalError("categorical: no category has positive probability");
  double total = 0.0;
  for (double v : log_weights) total += std::exp(v - m);
  double u = uniform() * total;
  const int n = static_cast<int>(log_weights.size());
  int last_positive = 0;
  for (int i = 0; i < n; ++i) {
    const double w = std::exp(log_weights[static_cast<std::size_t>(i)] - m);
    if (w > 0.0) last_positive = i;
    if (u < w) return i;
    u -= w;
  }
  return last_positive;
}

double Rng::truncated_standard_normal(double lower, double upper) {
  if (!(lower < upper)) throw InvalidArgument("truncated normal: empty interval");
  if (upper <= 0.0) return -truncated_standard_normal(-upper, -lower);
  if (lower < 0.0) {
    // Interval straddles zero.
    const double width = upper - lower;
    if (width < std::sqrt(2.0 * std::numbers::pi)) {
      for (;;) {
        const double x = lower + width * uniform();
        if (uniform() <= std::exp(-0.5 * x * x)) return x;
      }
    }
    for (;;) {
      const double x = normal();
      if (x >= lower && x <= upper) return x;
    }
  }
  // 0 <= lower < upper: one-sided tail, possibly capped.
  const double width = upper - lower;
  if (width <= 1.0 / (lower + 1.0)) {
    for (;;) {
      const double x = lower + width * uniform();
      if (uniform() <= std::exp(0.5 * (lower * lower - x * x))) return x;
    }
  }
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower + exponential() / rate;
    if (z > upper) continue;
    const double d = z - rate;
    if (uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

double Rng::truncated_normal(double mean, double sd, double lower, double upper) {
  if (!(sd > 0.0)) throw InvalidArgument("truncated normal: sd must be positive");
  return mean + sd * truncated_standard_normal((lower - mean) / sd, (upper - mean) / sd);
}

}  // namespace fiberbayes
