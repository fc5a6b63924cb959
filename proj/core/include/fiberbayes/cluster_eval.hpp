#pragma once

#include <Eigen/Core>

#include <vector>

namespace fiberbayes {

/// Hard clustering with canonical labels 1..k in order of first appearance.
class Partition {
 public:
  Partition() = default;
  /// Accepts arbitrary integer labels and relabels them canonically.
  explicit Partition(const std::vector<int>& labels);

  const std::vector<int>& labels() const { return labels_; }
  int k() const { return k_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

/// P(a, b) = fraction of draws in which items a and b share a label.
Eigen::MatrixXd coclustering(const std::vector<std::vector<int>>& draws);

/// Most frequent occupied-cluster count; ties go to the smaller k.
int posterior_mode_k(const std::vector<int>& occupied_counts);

struct PartitionEstimate {
  Partition partition;
  /// ||P - B||_F with B the membership matrix of the partition.
  double discrepancy = 0.0;
};

/// Average-linkage agglomeration on 1 - P, cut at k clusters.
PartitionEstimate extract_partition(const Eigen::MatrixXd& coclust, int k);

double rand_index(const Partition& a, const Partition& b);

/// Hubert-Arabie adjusted Rand index. When the denominator vanishes the
/// result is 1 for identical partitions and 0 otherwise.
double adjusted_rand_index(const Partition& a, const Partition& b);

}  // namespace fiberbayes
