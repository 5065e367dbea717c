#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nggmix/observation.hpp"
#include "nggmix/par.hpp"
#include "nggmix/sampler.hpp"

namespace nggmix {

/// Cluster labels 0..K-1 in first-occurrence order.
using Partition = std::vector<int>;

Partition canonicalize(std::span<const int> labels);
std::size_t cluster_count(std::span<const int> labels);

/// Pairwise co-clustering probabilities, symmetric with unit diagonal.
struct SimilarityMatrix {
  std::size_t n = 0;
  std::vector<double> p;  // row-major n × n

  double operator()(std::size_t i, std::size_t j) const { return p[i * n + j]; }
};

SimilarityMatrix posterior_similarity(std::span<const std::vector<int>> labelings, Exec exec = Exec::parallel);
/// Labelings of every kept iteration of the given chains.
std::vector<std::vector<int>> trace_labelings(std::span<const ChainTrace> chains);

/// Number of pairs on which the two partitions disagree about co-clustering.
double binder_distance(std::span<const int> a, std::span<const int> b);
/// Σ_{i<j} |1[c_i = c_j] - p_ij|.
double expected_binder_loss(std::span<const int> c, const SimilarityMatrix& psm);

/// Variation of information in nats: H(a) + H(b) - 2 I(a, b).
double vi_distance(std::span<const int> a, std::span<const int> b);
/// Lower bound on the posterior expected VI obtained from the PSM by Jensen's
/// inequality:
///   (1/n) Σ_i [ln |C(i)| - 2 ln Σ_{j∈C(i)} p_ij + ln Σ_j p_ij].
double expected_vi_lower_bound(std::span<const int> c, const SimilarityMatrix& psm);
/// Average VI to the sampled partitions.
double expected_vi_exact(std::span<const int> c, std::span<const std::vector<int>> labelings);

enum class ClusterLoss { binder, vi };

struct GreedyConfig {
  std::size_t max_steps = 1000;
  bool merges = true;
  bool splits = true;
  /// Use the exact expected VI instead of the PSM lower bound (slow).
  bool exact_vi = false;
};

struct ClusterEstimate {
  Partition partition;
  double expected_loss = 0.0;
  double initial_loss = 0.0;  // best partition visited by the chain
  std::size_t steps = 0;
  bool step_cap_reached = false;
};

/// Expected loss of `c` under the chosen loss (PSM based unless exact_vi).
double expected_loss(std::span<const int> c, ClusterLoss loss, const SimilarityMatrix& psm,
                     std::span<const std::vector<int>> labelings, const GreedyConfig& config = {});

/// Starts from the sampled partition with the lowest expected loss and
/// repeatedly applies the best single-point move, merge of two clusters, or
/// split of one cluster until nothing improves.
ClusterEstimate minimize_loss(std::span<const std::vector<int>> labelings, ClusterLoss loss,
                              const GreedyConfig& config = {}, Exec exec = Exec::parallel);

/// Visits every set partition of {0..n-1} as a restricted growth string.
void for_each_partition(std::size_t n, const std::function<void(const Partition&)>& visit);

/// Rows of the cluster-coloured empirical CDF: exact values and interval
/// midpoints, one-sided censored points omitted.
struct ClusterCdfPoint {
  std::size_t index = 0;
  double value = 0.0;
  double ecdf = 0.0;
  int label = 0;
};
std::vector<ClusterCdfPoint> cluster_cdf_overlay(std::span<const Observation> data, std::span<const int> labels);

}  // namespace nggmix
