#include "nggmix/par.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nggmix/error.hpp"

namespace nggmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Returns false when every atom has zero likelihood.
bool allocate_one(const Observation& obs, std::span<const double> log_jumps, std::span<const AtomParams> atoms,
                  const KernelSpec& kernel, double uniform, std::vector<double>& scratch, int& label,
                  double& log_mix) {
  const std::size_t m = atoms.size();
  scratch.resize(m);
  double top = kNegInf;
  for (std::size_t j = 0; j < m; ++j) {
    const double s = log_jumps[j] + observation_loglik(obs, kernel, atoms[j]);
    scratch[j] = s;
    top = std::max(top, s);
  }
  if (top == kNegInf) {
    label = -1;
    log_mix = kNegInf;
    return false;
  }
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    scratch[j] = std::exp(scratch[j] - top);
    total += scratch[j];
  }
  const double target = uniform * total;
  double running = 0.0;
  int chosen = -1;
  for (std::size_t j = 0; j < m; ++j) {
    if (scratch[j] <= 0.0) continue;
    chosen = static_cast<int>(j);
    running += scratch[j];
    if (running > target) break;
  }
  label = chosen;
  log_mix = top + std::log(total);
  return true;
}

void check_mixtures(std::span<const MixtureView> mixtures) {
  for (const MixtureView& m : mixtures) {
    if (m.weights.size() != m.atoms.size()) throw ValidationError("mixture weights and atoms differ in length");
  }
}

}  // namespace

long allocate_observations(std::span<const Observation> data, std::span<const double> log_jumps,
                           std::span<const AtomParams> atoms, const KernelSpec& kernel,
                           std::span<const double> uniforms, std::span<int> labels,
                           std::span<double> log_mix, Exec exec) {
  const long n = static_cast<long>(data.size());
  if (log_jumps.size() != atoms.size() || uniforms.size() < data.size() || labels.size() < data.size() ||
      log_mix.size() < data.size()) {
    throw ValidationError("allocate_observations: inconsistent buffer sizes");
  }
  long failed = n;
  if (exec == Exec::serial) {
    std::vector<double> scratch;
    for (long i = 0; i < n; ++i) {
      if (!allocate_one(data[i], log_jumps, atoms, kernel, uniforms[i], scratch, labels[i], log_mix[i])) {
        failed = std::min(failed, i);
      }
    }
  } else {
#pragma omp parallel
    {
      std::vector<double> scratch;
      long local_failed = n;
#pragma omp for schedule(static)
      for (long i = 0; i < n; ++i) {
        if (!allocate_one(data[i], log_jumps, atoms, kernel, uniforms[i], scratch, labels[i], log_mix[i])) {
          local_failed = std::min(local_failed, i);
        }
      }
#pragma omp critical
      failed = std::min(failed, local_failed);
    }
  }
  return failed == n ? -1 : failed;
}

std::vector<double> density_matrix(std::span<const double> grid, std::span<const MixtureView> mixtures,
                                   const KernelSpec& kernel, Exec exec) {
  check_mixtures(mixtures);
  const long t_count = static_cast<long>(mixtures.size());
  const std::size_t g_count = grid.size();
  std::vector<double> out(mixtures.size() * g_count);
  auto row = [&](long t) {
    for (std::size_t g = 0; g < g_count; ++g) {
      out[t * g_count + g] = mixture_density(grid[g], mixtures[t].weights, mixtures[t].atoms, kernel);
    }
  };
  if (exec == Exec::serial) {
    for (long t = 0; t < t_count; ++t) row(t);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (long t = 0; t < t_count; ++t) row(t);
  }
  return out;
}

std::vector<double> cdf_matrix(std::span<const double> grid, std::span<const MixtureView> mixtures,
                               const KernelSpec& kernel, Exec exec) {
  check_mixtures(mixtures);
  const long t_count = static_cast<long>(mixtures.size());
  const std::size_t g_count = grid.size();
  std::vector<double> out(mixtures.size() * g_count);
  auto row = [&](long t) {
    for (std::size_t g = 0; g < g_count; ++g) {
      out[t * g_count + g] = mixture_cdf(grid[g], mixtures[t].weights, mixtures[t].atoms, kernel);
    }
  };
  if (exec == Exec::serial) {
    for (long t = 0; t < t_count; ++t) row(t);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (long t = 0; t < t_count; ++t) row(t);
  }
  return out;
}

std::vector<double> likelihood_matrix(std::span<const Observation> data, std::span<const MixtureView> mixtures,
                                      const KernelSpec& kernel, Exec exec) {
  check_mixtures(mixtures);
  const long t_count = static_cast<long>(mixtures.size());
  const std::size_t n = data.size();
  std::vector<double> out(mixtures.size() * n);
  auto row = [&](long t) {
    for (std::size_t i = 0; i < n; ++i) {
      out[t * n + i] = mixture_observation_likelihood(data[i], mixtures[t].weights, mixtures[t].atoms, kernel);
    }
  };
  if (exec == Exec::serial) {
    for (long t = 0; t < t_count; ++t) row(t);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (long t = 0; t < t_count; ++t) row(t);
  }
  return out;
}

std::vector<double> coclustering_counts(std::span<const std::vector<int>> labelings, std::size_t n, Exec exec) {
  for (const auto& labels : labelings) {
    if (labels.size() != n) throw ValidationError("labeling length differs from n");
  }
  std::vector<double> out(n * n, 0.0);
  const long rows = static_cast<long>(n);
  // Each (i, j) cell is owned by one row, so the parallel loop needs no reduction.
  auto row = [&](long i) {
    for (const auto& labels : labelings) {
      const int li = labels[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] == li) out[i * n + j] += 1.0;
      }
    }
  };
  if (exec == Exec::serial) {
    for (long i = 0; i < rows; ++i) row(i);
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < rows; ++i) row(i);
  }
  return out;
}

}  // namespace nggmix
