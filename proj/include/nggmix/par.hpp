#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nggmix/kernels.hpp"
#include "nggmix/observation.hpp"

namespace nggmix {

/// Execution mode of the data-parallel kernels. Both modes produce
/// bit-identical results; `serial` is the reference implementation.
enum class Exec { serial, parallel };

/// One realization of a mixture: normalized weights and atom parameters.
struct MixtureView {
  std::span<const double> weights;
  std::span<const AtomParams> atoms;
};

/// For each observation i, samples an atom with probability proportional to
/// exp(log_jumps[j] + observation_loglik(x_i | atoms[j])), using uniforms[i]
/// as the driving random number. Writes the chosen atom index and the log of
/// Σ_j exp(log_jumps[j] + loglik_ij). Returns the index of the first
/// observation for which every atom has zero likelihood, or -1.
long allocate_observations(std::span<const Observation> data, std::span<const double> log_jumps,
                           std::span<const AtomParams> atoms, const KernelSpec& kernel,
                           std::span<const double> uniforms, std::span<int> labels,
                           std::span<double> log_mix, Exec exec);

/// Row-major T × G matrix of mixture densities, one row per mixture.
std::vector<double> density_matrix(std::span<const double> grid, std::span<const MixtureView> mixtures,
                                   const KernelSpec& kernel, Exec exec);

/// Row-major T × G matrix of mixture CDF values.
std::vector<double> cdf_matrix(std::span<const double> grid, std::span<const MixtureView> mixtures,
                               const KernelSpec& kernel, Exec exec);

/// Row-major T × n matrix of per-observation mixture likelihoods.
std::vector<double> likelihood_matrix(std::span<const Observation> data, std::span<const MixtureView> mixtures,
                                      const KernelSpec& kernel, Exec exec);

/// Row-major n × n co-clustering counts over the labelings.
std::vector<double> coclustering_counts(std::span<const std::vector<int>> labelings, std::size_t n, Exec exec);

}  // namespace nggmix
