#include "nggmix/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "nggmix/error.hpp"

namespace nggmix {

Partition canonicalize(std::span<const int> labels) {
  Partition out(labels.size());
  std::map<int, int> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

std::size_t cluster_count(std::span<const int> labels) {
  const Partition c = canonicalize(labels);
  return c.empty() ? 0 : static_cast<std::size_t>(*std::max_element(c.begin(), c.end()) + 1);
}

SimilarityMatrix posterior_similarity(std::span<const std::vector<int>> labelings, Exec exec) {
  if (labelings.empty()) throw ValidationError("no partitions to summarize");
  const std::size_t n = labelings.front().size();
  SimilarityMatrix psm;
  psm.n = n;
  psm.p = coclustering_counts(labelings, n, exec);
  const double t = static_cast<double>(labelings.size());
  for (double& v : psm.p) v /= t;
  return psm;
}

std::vector<std::vector<int>> trace_labelings(std::span<const ChainTrace> chains) {
  std::vector<std::vector<int>> out;
  for (const ChainTrace& c : chains) {
    for (const TraceRow& r : c.rows) out.push_back(r.labels);
  }
  return out;
}

namespace {

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw ValidationError("partitions have different lengths");
}

void check_psm(std::size_t n, const SimilarityMatrix& psm) {
  if (psm.n != n) throw ValidationError("partition and similarity matrix sizes differ");
}

double entropy_of_counts(std::vector<double> counts, double n) {
  for (double& c : counts) c = c > 0.0 ? -(c / n) * std::log(c / n) : 0.0;
  std::sort(counts.begin(), counts.end());
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

}  // namespace

double binder_distance(std::span<const int> a, std::span<const int> b) {
  check_same_size(a.size(), b.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) total += 1.0;
    }
  }
  return total;
}

double expected_binder_loss(std::span<const int> c, const SimilarityMatrix& psm) {
  check_psm(c.size(), psm);
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      total += std::fabs((c[i] == c[j] ? 1.0 : 0.0) - psm(i, j));
    }
  }
  return total;
}

double vi_distance(std::span<const int> a, std::span<const int> b) {
  check_same_size(a.size(), b.size());
  if (a.empty()) return 0.0;
  const Partition ca = canonicalize(a);
  const Partition cb = canonicalize(b);
  if (ca == cb) return 0.0;
  const std::size_t ka = static_cast<std::size_t>(*std::max_element(ca.begin(), ca.end()) + 1);
  const std::size_t kb = static_cast<std::size_t>(*std::max_element(cb.begin(), cb.end()) + 1);
  const double n = static_cast<double>(a.size());
  std::vector<double> na(ka, 0.0), nb(kb, 0.0), table(ka * kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    na[ca[i]] += 1.0;
    nb[cb[i]] += 1.0;
    table[ca[i] * kb + cb[i]] += 1.0;
  }
  std::vector<double> cells;
  for (std::size_t x = 0; x < ka; ++x) {
    for (std::size_t y = 0; y < kb; ++y) {
      const double c = table[x * kb + y];
      if (c > 0.0) cells.push_back((c / n) * std::log(n * c / (na[x] * nb[y])));
    }
  }
  // Sorted summation keeps the result exactly symmetric in (a, b).
  std::sort(cells.begin(), cells.end());
  const double mutual = std::accumulate(cells.begin(), cells.end(), 0.0);
  const double vi = (entropy_of_counts(na, n) + entropy_of_counts(nb, n)) - 2.0 * mutual;
  return std::max(vi, 0.0);
}

double expected_vi_lower_bound(std::span<const int> c, const SimilarityMatrix& psm) {
  check_psm(c.size(), psm);
  const std::size_t n = c.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double size = 0.0, shared = 0.0, row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += psm(i, j);
      if (c[i] == c[j]) {
        size += 1.0;
        shared += psm(i, j);
      }
    }
    total += std::log(size) - 2.0 * std::log(shared) + std::log(row);
  }
  return total / static_cast<double>(n);
}

double expected_vi_exact(std::span<const int> c, std::span<const std::vector<int>> labelings) {
  if (labelings.empty()) throw ValidationError("no partitions to average over");
  double total = 0.0;
  for (const auto& l : labelings) total += vi_distance(c, l);
  return total / static_cast<double>(labelings.size());
}

double expected_loss(std::span<const int> c, ClusterLoss loss, const SimilarityMatrix& psm,
                     std::span<const std::vector<int>> labelings, const GreedyConfig& config) {
  if (loss == ClusterLoss::binder) return expected_binder_loss(c, psm);
  if (config.exact_vi) return expected_vi_exact(c, labelings);
  return expected_vi_lower_bound(c, psm);
}

namespace {

// Greedy search state. For the PSM-based losses the objective decomposes as
// constant + Σ_clusters term(C), so candidate moves are scored by the terms
// of the clusters they touch.
class Search {
 public:
  Search(ClusterLoss loss, const SimilarityMatrix& psm, std::span<const std::vector<int>> labelings,
         const GreedyConfig& config)
      : loss_(loss), psm_(psm), labelings_(labelings), config_(config), n_(psm.n) {
    decomposable_ = !(loss == ClusterLoss::vi && config.exact_vi);
  }

  double full_loss(std::span<const int> c) const { return expected_loss(c, loss_, psm_, labelings_, config_); }

  void reset(const Partition& c) {
    labels_ = canonicalize(c);
    const std::size_t k = cluster_count(labels_);
    clusters_.assign(k, {});
    for (std::size_t i = 0; i < n_; ++i) clusters_[labels_[i]].push_back(i);
    terms_.resize(k);
    for (std::size_t j = 0; j < k; ++j) terms_[j] = decomposable_ ? term(clusters_[j]) : 0.0;
    loss_value_ = full_loss(labels_);
  }

  const Partition& labels() const { return labels_; }
  double loss() const { return loss_value_; }

  struct Candidate {
    enum Kind { move, merge, split } kind;
    std::size_t a;  // point (move) or first cluster
    std::size_t b;  // target cluster (clusters_.size() means new) or second cluster
  };

  std::vector<Candidate> candidates() const {
    std::vector<Candidate> out;
    const std::size_t k = clusters_.size();
    for (std::size_t i = 0; i < n_; ++i) {
      const auto own = static_cast<std::size_t>(labels_[i]);
      for (std::size_t t = 0; t < k; ++t) {
        if (t != own) out.push_back({Candidate::move, i, t});
      }
      if (clusters_[own].size() > 1) out.push_back({Candidate::move, i, k});
    }
    if (config_.merges) {
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) out.push_back({Candidate::merge, a, b});
      }
    }
    if (config_.splits) {
      for (std::size_t a = 0; a < k; ++a) {
        if (clusters_[a].size() > 1) out.push_back({Candidate::split, a, 0});
      }
    }
    return out;
  }

  double delta(const Candidate& cand) const {
    if (!decomposable_) return full_loss(apply_to_labels(cand)) - loss_value_;
    switch (cand.kind) {
      case Candidate::move: {
        const auto own = static_cast<std::size_t>(labels_[cand.a]);
        std::vector<std::size_t> from;
        for (std::size_t x : clusters_[own]) {
          if (x != cand.a) from.push_back(x);
        }
        std::vector<std::size_t> to = cand.b < clusters_.size() ? clusters_[cand.b] : std::vector<std::size_t>{};
        to.insert(std::upper_bound(to.begin(), to.end(), cand.a), cand.a);
        const double old_terms = terms_[own] + (cand.b < clusters_.size() ? terms_[cand.b] : 0.0);
        return term(from) + term(to) - old_terms;
      }
      case Candidate::merge: {
        std::vector<std::size_t> merged;
        std::merge(clusters_[cand.a].begin(), clusters_[cand.a].end(), clusters_[cand.b].begin(),
                   clusters_[cand.b].end(), std::back_inserter(merged));
        return term(merged) - terms_[cand.a] - terms_[cand.b];
      }
      case Candidate::split: {
        const auto [left, right] = split_members(cand.a);
        return term(left) + term(right) - terms_[cand.a];
      }
    }
    return 0.0;
  }

  void apply(const Candidate& cand) { reset(apply_to_labels(cand)); }

 private:
  double term(const std::vector<std::size_t>& members) const {
    if (members.empty()) return 0.0;
    if (loss_ == ClusterLoss::binder) {
      double t = 0.0;
      for (std::size_t x = 0; x < members.size(); ++x) {
        for (std::size_t y = x + 1; y < members.size(); ++y) t += 1.0 - 2.0 * psm_(members[x], members[y]);
      }
      return t;
    }
    const double size = static_cast<double>(members.size());
    double t = size * std::log(size);
    for (std::size_t i : members) {
      double shared = 0.0;
      for (std::size_t j : members) shared += psm_(i, j);
      t -= 2.0 * std::log(shared);
    }
    return t / static_cast<double>(n_);
  }

  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_members(std::size_t cluster) const {
    const auto& m = clusters_[cluster];
    std::size_t sa = m[0], sb = m[1];
    double lowest = psm_(sa, sb);
    for (std::size_t x = 0; x < m.size(); ++x) {
      for (std::size_t y = x + 1; y < m.size(); ++y) {
        if (psm_(m[x], m[y]) < lowest) {
          lowest = psm_(m[x], m[y]);
          sa = m[x];
          sb = m[y];
        }
      }
    }
    std::vector<std::size_t> left, right;
    for (std::size_t i : m) {
      if (i == sa || (i != sb && psm_(i, sa) >= psm_(i, sb))) {
        left.push_back(i);
      } else {
        right.push_back(i);
      }
    }
    return {left, right};
  }

  Partition apply_to_labels(const Candidate& cand) const {
    Partition next = labels_;
    const int fresh = static_cast<int>(clusters_.size());
    switch (cand.kind) {
      case Candidate::move:
        next[cand.a] = cand.b < clusters_.size() ? static_cast<int>(cand.b) : fresh;
        break;
      case Candidate::merge:
        for (std::size_t i : clusters_[cand.b]) next[i] = static_cast<int>(cand.a);
        break;
      case Candidate::split:
        for (std::size_t i : split_members(cand.a).second) next[i] = fresh;
        break;
    }
    return next;
  }

  ClusterLoss loss_;
  const SimilarityMatrix& psm_;
  std::span<const std::vector<int>> labelings_;
  GreedyConfig config_;
  std::size_t n_;
  bool decomposable_ = true;
  Partition labels_;
  std::vector<std::vector<std::size_t>> clusters_;
  std::vector<double> terms_;
  double loss_value_ = 0.0;
};

}  // namespace

ClusterEstimate minimize_loss(std::span<const std::vector<int>> labelings, ClusterLoss loss,
                              const GreedyConfig& config, Exec exec) {
  const SimilarityMatrix psm = posterior_similarity(labelings, exec);
  Search search(loss, psm, labelings, config);

  // Best sampled partition; ties go to the lexicographically smallest.
  std::map<Partition, double> visited;
  for (const auto& l : labelings) visited.try_emplace(canonicalize(l), 0.0);
  const Partition* best = nullptr;
  double best_loss = 0.0;
  for (auto& [c, value] : visited) {
    value = search.full_loss(c);
    if (!best || value < best_loss) {
      best = &c;
      best_loss = value;
    }
  }
  search.reset(*best);

  ClusterEstimate est;
  est.initial_loss = search.loss();
  for (;;) {
    if (est.steps >= config.max_steps) {
      est.step_cap_reached = true;
      break;
    }
    const auto cands = search.candidates();
    std::vector<double> deltas(cands.size());
    const long count = static_cast<long>(cands.size());
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
      for (long c = 0; c < count; ++c) deltas[c] = search.delta(cands[c]);
    } else {
      for (long c = 0; c < count; ++c) deltas[c] = search.delta(cands[c]);
    }
    std::size_t pick = cands.size();
    double best_delta = -1e-12 * std::max(1.0, std::fabs(search.loss()));
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (deltas[c] < best_delta) {
        best_delta = deltas[c];
        pick = c;
      }
    }
    if (pick == cands.size()) break;
    const Partition before = search.labels();
    const double before_loss = search.loss();
    search.apply(cands[pick]);
    // Guard against rounding in the incremental scores.
    if (!(search.loss() < before_loss)) {
      search.reset(before);
      break;
    }
    ++est.steps;
  }
  est.partition = search.labels();
  est.expected_loss = search.loss();
  return est;
}

void for_each_partition(std::size_t n, const std::function<void(const Partition&)>& visit) {
  if (n == 0) {
    visit({});
    return;
  }
  Partition a(n, 0);
  std::vector<int> prefix_max(n, 0);
  for (;;) {
    visit(a);
    // Next restricted growth string: rightmost position that can increase.
    std::size_t i = n - 1;
    while (i > 0 && a[i] > prefix_max[i - 1]) --i;
    if (i == 0) return;
    ++a[i];
    prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
}

std::vector<ClusterCdfPoint> cluster_cdf_overlay(std::span<const Observation> data, std::span<const int> labels) {
  if (data.size() != labels.size()) throw ValidationError("labels and data differ in length");
  std::vector<ClusterCdfPoint> points;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Observation& o = data[i];
    if (o.kind() == Censoring::exact || o.kind() == Censoring::interval) {
      points.push_back({i, o.representative(), 0.0, labels[i]});
    }
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const ClusterCdfPoint& x, const ClusterCdfPoint& y) { return x.value < y.value; });
  const double m = static_cast<double>(points.size());
  for (std::size_t r = 0; r < points.size(); ++r) points[r].ecdf = static_cast<double>(r + 1) / m;
  return points;
}

}  // namespace nggmix
