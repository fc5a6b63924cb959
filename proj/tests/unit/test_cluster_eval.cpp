#include "fiberbayes/cluster_eval.hpp"
#include "fiberbayes/error.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

using namespace fiberbayes;
using doctest::Approx;

namespace {

std::vector<int> random_labels(std::mt19937_64& gen, int n, int k) {
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int& x : out) x = pick(gen);
  return out;
}

}  // namespace

TEST_CASE("canonical partitions") {
  const Partition p({5, 5, 2, 9, 2});
  CHECK(p.labels() == std::vector<int>{1, 1, 2, 3, 2});
  CHECK(p.k() == 3);
  CHECK(p.size() == 5);
  CHECK(Partition({0, 1, 0}).labels() == Partition({7, -3, 7}).labels());
}

TEST_CASE("co-clustering matrix") {
  CHECK(coclustering({{3, 3, 3}}) == Eigen::MatrixXd::Ones(3, 3));
  const Eigen::MatrixXd half = coclustering({{0, 0}, {0, 1}});
  CHECK(half(0, 1) == 0.5);
  CHECK(half(1, 0) == 0.5);
  CHECK_THROWS_AS(coclustering({}), InvalidArgument);

  std::mt19937_64 gen(61);
  std::vector<std::vector<int>> draws;
  for (int t = 0; t < 100; ++t) draws.push_back(random_labels(gen, 20, 4));
  Eigen::MatrixXd naive = Eigen::MatrixXd::Zero(20, 20);
  for (const auto& d : draws) {
    for (int a = 0; a < 20; ++a) {
      for (int b = 0; b < 20; ++b) naive(a, b) += d[a] == d[b] ? 1.0 : 0.0;
    }
  }
  naive /= 100.0;
  const Eigen::MatrixXd p = coclustering(draws);
  CHECK((p - naive).cwiseAbs().maxCoeff() < 1e-15);

  // Relabeling every draw leaves the matrix unchanged.
  std::vector<std::vector<int>> relabeled = draws;
  for (auto& d : relabeled) {
    for (int& x : d) x = (x * 3 + 1) % 4;
  }
  CHECK((coclustering(relabeled) - p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("posterior mode of the cluster count") {
  CHECK(posterior_mode_k({2, 2, 2, 3}) == 2);
  CHECK(posterior_mode_k({2, 3, 2, 3}) == 2);
  CHECK_THROWS_AS(posterior_mode_k({}), InvalidArgument);
  std::mt19937_64 gen(62);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<int> counts = random_labels(gen, 15, 5);
    std::map<int, int> hist;
    for (int c : counts) ++hist[c];
    int best = -1;
    int best_n = 0;
    for (const auto& [k, n] : hist) {
      if (n > best_n) {
        best = k;
        best_n = n;
      }
    }
    CHECK(posterior_mode_k(counts) == best);
  }
}

TEST_CASE("partition extraction") {
  const std::vector<int> truth{0, 0, 0, 1, 1, 2, 2, 2, 2};
  const int n = static_cast<int>(truth.size());
  Eigen::MatrixXd blocks(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) blocks(a, b) = truth[a] == truth[b] ? 1.0 : 0.0;
  }
  const PartitionEstimate exact = extract_partition(blocks, 3);
  CHECK(exact.partition.labels() == Partition(truth).labels());
  CHECK(exact.discrepancy == 0.0);
  CHECK(extract_partition(blocks, 1).partition.k() == 1);

  std::mt19937_64 gen(63);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd noisy = blocks;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        noisy(a, b) = std::clamp(noisy(a, b) + u(gen), 0.0, 1.0);
        noisy(b, a) = noisy(a, b);
      }
    }
    const PartitionEstimate est = extract_partition(noisy, 3);
    CHECK(adjusted_rand_index(est.partition, Partition(truth)) == 1.0);
    CHECK(est.discrepancy == Approx((noisy - blocks).norm()).epsilon(1e-12));
  }
  CHECK_THROWS_AS(extract_partition(blocks, 0), InvalidArgument);
  CHECK_THROWS_AS(extract_partition(blocks, n + 1), InvalidArgument);
}

TEST_CASE("Rand and adjusted Rand indices") {
  CHECK(rand_index(Partition({1, 1, 2}), Partition({1, 2, 2})) == Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(rand_index(Partition({1, 2, 2, 3}), Partition({4, 5, 5, 6})) == 1.0);
  CHECK(adjusted_rand_index(Partition({1, 2, 2, 3}), Partition({4, 5, 5, 6})) == 1.0);
  CHECK(adjusted_rand_index(Partition({1, 1, 1}), Partition({2, 2, 2})) == 1.0);
  CHECK(adjusted_rand_index(Partition({1, 2, 3}), Partition({1, 2, 3})) == 1.0);
  CHECK(adjusted_rand_index(Partition({1, 1, 1}), Partition({1, 2, 3})) == 0.0);
  CHECK(adjusted_rand_index(Partition({1, 1, 2, 2}), Partition({1, 2, 1, 2})) < 0.0);
  CHECK_THROWS_AS(rand_index(Partition({1}), Partition({1})), InvalidArgument);
  CHECK_THROWS_AS(rand_index(Partition({1, 2}), Partition({1, 2, 3})), InvalidArgument);

  std::mt19937_64 gen(64);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_int_distribution<int> kk(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(gen);
    const std::vector<int> a = random_labels(gen, n, kk(gen));
    const std::vector<int> b = random_labels(gen, n, kk(gen));
    const fbtest::PairCounts c = fbtest::count_pairs(a, b);
    CHECK(std::abs(rand_index(Partition(a), Partition(b)) - fbtest::rand_index_pairs(a, b)) < 1e-15);
    const double denom = 0.5 * (c.in_a + c.in_b) - c.in_a * c.in_b / c.total;
    if (denom != 0.0) {
      CHECK(std::abs(adjusted_rand_index(Partition(a), Partition(b)) - fbtest::ari_from_pairs(c)) < 1e-12);
    }
  }
}

TEST_CASE("ARI agrees with the permutation expectation") {
  std::mt19937_64 gen(65);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<int> a = random_labels(gen, 10, 3);
    const std::vector<int> b = random_labels(gen, 10, 3);
    const fbtest::PairCounts c = fbtest::count_pairs(a, b);
    const double max = 0.5 * (c.in_a + c.in_b);
    std::vector<int> perm = b;
    const int m = 20000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int t = 0; t < m; ++t) {
      std::shuffle(perm.begin(), perm.end(), gen);
      const double x = fbtest::count_pairs(a, perm).both;
      sum += x;
      sum2 += x * x;
    }
    const double e = sum / m;
    const double se_e = std::sqrt((sum2 / m - e * e) / m);
    const double mc = (c.both - e) / (max - e);
    const double se = std::abs(c.both - max) / ((max - e) * (max - e)) * se_e;
    CHECK(std::abs(adjusted_rand_index(Partition(a), Partition(b)) - mc) < 3 * se + 1e-12);
  }
}
