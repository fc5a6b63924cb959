#include "fiberbayes/cluster_eval.hpp"

#include "fiberbayes/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace fiberbayes {

namespace {

double choose2(double x) { return 0.5 * x * (x - 1.0); }

struct Contingency {
  Eigen::MatrixXd table;
  Eigen::VectorXd rows;
  Eigen::VectorXd cols;
};

Contingency contingency(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw InvalidArgument("partitions have different sizes");
  if (a.size() < 2) throw InvalidArgument("partition comparison needs at least 2 items");
  Contingency c{Eigen::MatrixXd::Zero(a.k(), b.k()), {}, {}};
  for (std::size_t i = 0; i < a.size(); ++i) c.table(a.labels()[i] - 1, b.labels()[i] - 1) += 1.0;
  c.rows = c.table.rowwise().sum();
  c.cols = c.table.colwise().sum().transpose();
  return c;
}

}  // namespace

Partition::Partition(const std::vector<int>& labels) {
  std::map<int, int> canonical;
  labels_.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = canonical.try_emplace(l, static_cast<int>(canonical.size()) + 1);
    labels_.push_back(it->second);
  }
  k_ = static_cast<int>(canonical.size());
}

Eigen::MatrixXd coclustering(const std::vector<std::vector<int>>& draws) {
  if (draws.empty()) throw InvalidArgument("coclustering: empty chain");
  const auto n = static_cast<Eigen::Index>(draws.front().size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& d : draws) {
    if (static_cast<Eigen::Index>(d.size()) != n) throw InvalidArgument("coclustering: draws differ in length");
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = a + 1; b < n; ++b) {
        if (d[static_cast<std::size_t>(a)] == d[static_cast<std::size_t>(b)]) counts(a, b) += 1.0;
      }
    }
  }
  Eigen::MatrixXd p = counts / static_cast<double>(draws.size());
  p = p + p.transpose().eval();
  p.diagonal().setOnes();
  return p;
}

int posterior_mode_k(const std::vector<int>& occupied_counts) {
  if (occupied_counts.empty()) throw InvalidArgument("posterior_mode_k: empty chain");
  std::map<int, int> histogram;
  for (int k : occupied_counts) ++histogram[k];
  int best = histogram.begin()->first;
  int freq = 0;
  for (auto [k, f] : histogram) {
    if (f > freq) {
      best = k;
      freq = f;
    }
  }
  return best;
}

PartitionEstimate extract_partition(const Eigen::MatrixXd& coclust, int k) {
  const Eigen::Index n = coclust.rows();
  if (coclust.cols() != n) throw InvalidArgument("extract_partition: matrix must be square");
  if (k < 1 || k > n) throw InvalidArgument("extract_partition: k must lie in [1, n]");

  // Naive O(n^3) agglomeration; fine for the subject and fiber counts at hand.
  std::vector<std::vector<Eigen::Index>> clusters(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) clusters[static_cast<std::size_t>(i)] = {i};
  Eigen::MatrixXd dist = Eigen::MatrixXd::Ones(n, n) - coclust;
  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  for (Eigen::Index remaining = n; remaining > k; --remaining) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index ba = -1;
    Eigen::Index bb = -1;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (!alive[static_cast<std::size_t>(a)]) continue;
      for (Eigen::Index b = a + 1; b < n; ++b) {
        if (alive[static_cast<std::size_t>(b)] && dist(a, b) < best) {
          best = dist(a, b);
          ba = a;
          bb = b;
        }
      }
    }
    const auto na = static_cast<double>(clusters[static_cast<std::size_t>(ba)].size());
    const auto nb = static_cast<double>(clusters[static_cast<std::size_t>(bb)].size());
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!alive[static_cast<std::size_t>(c)] || c == ba || c == bb) continue;
      const double d = (na * dist(ba, c) + nb * dist(bb, c)) / (na + nb);
      dist(ba, c) = dist(c, ba) = d;
    }
    auto& merged = clusters[static_cast<std::size_t>(ba)];
    const auto& absorbed = clusters[static_cast<std::size_t>(bb)];
    merged.insert(merged.end(), absorbed.begin(), absorbed.end());
    alive[static_cast<std::size_t>(bb)] = 0;
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  int next = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (!alive[static_cast<std::size_t>(a)]) continue;
    for (Eigen::Index i : clusters[static_cast<std::size_t>(a)]) labels[static_cast<std::size_t>(i)] = next;
    ++next;
  }
  PartitionEstimate out{Partition(labels), 0.0};
  double sq = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double m = labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
      sq += (coclust(a, b) - m) * (coclust(a, b) - m);
    }
  }
  out.discrepancy = std::sqrt(sq);
  return out;
}

double rand_index(const Partition& a, const Partition& b) {
  const Contingency c = contingency(a, b);
  const auto n = static_cast<double>(a.size());
  const double same_both = c.table.unaryExpr(&choose2).sum();
  const double same_a = c.rows.unaryExpr(&choose2).sum();
  const double same_b = c.cols.unaryExpr(&choose2).sum();
  const double total = choose2(n);
  const double diff_both = total - same_a - same_b + same_both;
  return (same_both + diff_both) / total;
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  const Contingency c = contingency(a, b);
  const auto n = static_cast<double>(a.size());
  const double index = c.table.unaryExpr(&choose2).sum();
  const double sa = c.rows.unaryExpr(&choose2).sum();
  const double sb = c.cols.unaryExpr(&choose2).sum();
  const double expected = sa * sb / choose2(n);
  const double denom = 0.5 * (sa + sb) - expected;
  if (denom == 0.0) return a.labels() == b.labels() ? 1.0 : 0.0;
  return (index - expected) / denom;
}

}  // namespace fiberbayes
