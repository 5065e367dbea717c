#include <mutex>

#include "nggmix/sampler.hpp"

namespace nggmix {

std::vector<ChainResult> run_chains(std::span<const Observation> data, std::span<const SamplerConfig> configs,
                                    Exec exec, const ProgressFn& progress) {
  const long count = static_cast<long>(configs.size());
  std::vector<ChainResult> results(configs.size());
  TruncationCache cache;
  std::mutex progress_mutex;
  ProgressFn guarded;
  if (progress) {
    guarded = [&](std::size_t chain, std::size_t done, std::size_t total) {
      std::lock_guard lock(progress_mutex);
      progress(chain, done, total);
    };
  }

  auto run_one = [&](long c) {
    try {
      results[c].trace = run_chain(data, configs[c], static_cast<std::size_t>(c), &cache, guarded);
    } catch (const std::exception& e) {
      results[c].error = e.what();
    }
  };

  if (exec == Exec::serial) {
    for (long c = 0; c < count; ++c) run_one(c);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (long c = 0; c < count; ++c) run_one(c);
  }
  return results;
}

std::vector<ChainResult> run_chains(std::span<const Observation> data, const SamplerConfig& config,
                                    std::size_t n_chains, Exec exec, const ProgressFn& progress) {
  if (n_chains < 1) throw ValidationError("need at least one chain");
  std::vector<SamplerConfig> configs(n_chains, config);
  for (std::size_t c = 0; c < n_chains; ++c) {
    configs[c].seed = config.seed + c;
    configs[c].jitter_init = config.jitter_init || n_chains > 1;
  }
  return run_chains(data, configs, exec, progress);
}

}  // namespace nggmix
