#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nggmix/base_measure.hpp"
#include "nggmix/kernels.hpp"
#include "nggmix/levy.hpp"
#include "nggmix/observation.hpp"
#include "nggmix/par.hpp"
#include "nggmix/truncation.hpp"

namespace nggmix {

/// semiparametric: clusters share one scale σ with its own prior.
/// fully_nonparametric: each atom carries its own (μ, σ).
enum class ModelKind { semiparametric, fully_nonparametric };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind model);

struct SamplerConfig {
  ModelKind model = ModelKind::semiparametric;
  KernelSpec kernel;
  /// Unset: data-scaled defaults from default_base_measure().
  std::optional<BaseMeasureSpec> base;
  NggParams ngg;
  std::size_t iterations = 1500;
  std::size_t burnin = 150;
  std::size_t thinning = 10;
  double u_proposal_delta = 2.0;
  bool adaptive_u = false;
  TruncationPolicy truncation;
  std::uint64_t seed = 1;
  /// Multiplicative jitter of the initial u and σ (multi-chain runs).
  bool jitter_init = false;
  Exec exec = Exec::serial;

  void validate() const;
};

struct AllocationState {
  std::vector<int> labels;         // canonical: first-occurrence order from 0
  std::vector<AtomParams> atoms;   // distinct atoms θ*_j
  std::vector<std::size_t> counts; // n_j

  std::size_t clusters() const { return atoms.size(); }
};

struct MeasureState {
  JumpSeries unfixed;
  std::vector<AtomParams> unfixed_atoms;
  std::vector<double> fixed_jumps;  // aligned with AllocationState::atoms
  double u = 1.0;
  bool truncation_capped = false;

  /// Log-jumps of all atoms, fixed first then unfixed.
  std::vector<double> log_jumps() const;
  /// Normalized weights in the same order.
  std::vector<double> weights() const;
};

// ---------------------------------------------------------------- latent U

/// log f(u) ∝ (n-1) log u + (rγ - n) log(u+κ) - (α/γ)((u+κ)^γ - κ^γ), with
/// the γ = 0 limit -α log(1 + u/κ) for the last term.
double latent_u_log_target(double u, const NggParams& p, std::size_t n, std::size_t r);

/// log density of the ga(δ, rate δ/from) proposal at `to`.
double u_proposal_log_density(double to, double from, double delta);

/// Log MH acceptance ratio of the gamma-proposal move from → to.
double u_log_acceptance(double from, double to, const NggParams& p, std::size_t n, std::size_t r, double delta);

struct UMove {
  double u;
  bool accepted;
};

UMove sample_latent_u(double u, const NggParams& p, std::size_t n, std::size_t r, double delta, Rng& rng);

/// State of the adaptive log-scale random walk.
struct UAdaptState {
  double log_step = 0.0;  // log of the proposal sd on log u
  std::size_t t = 0;
  bool frozen = false;
  double target_acceptance = 0.44;
  double rate_exponent = 0.6;
};

/// Log MH acceptance ratio of the log-scale random walk from → to; the
/// Jacobian of the log transform is included.
double u_log_acceptance_rw(double from, double to, const NggParams& p, std::size_t n, std::size_t r);

UMove sample_latent_u_adaptive(double u, const NggParams& p, std::size_t n, std::size_t r, UAdaptState& adapt,
                               Rng& rng);

// ---------------------------------------------------------- measure refresh

/// Everything the conditional updates need besides the chain state.
struct ModelContext {
  ModelKind model = ModelKind::semiparametric;
  KernelSpec kernel;
  BaseMeasureSpec base;
  NggParams ngg;
  TruncationPolicy truncation;
  double location_step = 0.1;  // acceleration random-walk sd on μ
  double log_scale_step = 0.3; // acceleration random-walk sd on log σ
  double common_scale_step = 0.15;
  Exec exec = Exec::serial;
};

/// Fixed jumps ~ ga(n_j - γ, rate κ+u); unfixed jumps from the Ferguson–Klass
/// series with Q chosen by the truncation cache; unfixed locations from the
/// location law, scales from the scale prior (fully nonparametric) or equal
/// to the common σ.
MeasureState refresh_measure(const AllocationState& alloc, double u, const LocationPrior& location,
                             double common_sigma, const ModelContext& ctx, TruncationCache& cache, Rng& rng);

double sample_fixed_jump(std::size_t n_j, const NggParams& p, double u, Rng& rng);

// ------------------------------------------------------------- allocations

/// Relabels to first-occurrence order and drops unused atoms.
AllocationState compact_allocations(std::span<const int> atom_index, std::span<const AtomParams> atoms);

struct AllocationResult {
  AllocationState alloc;
  double loglik = 0.0;  // Σ_i log Σ_j w_j k(x_i | θ_j) under the normalized measure
};

/// Samples each observation's atom with probability ∝ J_j exp(loglik_ij).
/// Throws SamplingError naming the observation when all atoms have zero
/// likelihood.
AllocationResult resample_allocations(std::span<const Observation> data, std::span<const double> log_jumps,
                                      std::span<const AtomParams> atoms, const KernelSpec& kernel, Exec exec,
                                      Rng& rng);

// ------------------------------------------------- hyperparameters, atoms, σ

/// Conjugate draw of φ for a normal location law; other laws are returned
/// unchanged.
LocationPrior update_hyperparameters(const AllocationState& alloc, const LocationPrior& current,
                                     const BaseMeasureSpec& base, Rng& rng);

/// Log of the unnormalized conditional of one distinct atom: member
/// likelihoods times the base density (location law, and scale prior when
/// scales are per atom).
double atom_log_target(std::span<const Observation> data, std::span<const std::size_t> members, AtomParams atom,
                       const LocationPrior& location, const ModelContext& ctx);

struct MoveStats {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

/// One random-walk MH step per distinct atom (μ only when the scale is
/// common; μ and log σ otherwise).
void accelerate_unique_values(std::span<const Observation> data, AllocationState& alloc,
                              const LocationPrior& location, const ModelContext& ctx, MoveStats& stats, Rng& rng);

/// Log of the unnormalized conditional of the common scale.
double common_scale_log_target(std::span<const Observation> data, const AllocationState& alloc, double sigma,
                               const ModelContext& ctx);

/// One random-walk MH step on log σ; updates the atoms' σ on acceptance.
double sample_common_scale(std::span<const Observation> data, AllocationState& alloc, double sigma,
                           const ModelContext& ctx, MoveStats& stats, Rng& rng);

// ------------------------------------------------------------------ chains

struct TraceRow {
  std::size_t iteration = 0;
  double u = 0.0;
  double loglik = 0.0;
  std::size_t n_components = 0;
  double common_sigma = 0.0;  // NaN for the fully nonparametric model
  double phi1 = 0.0;
  double phi2 = 0.0;
  std::vector<double> weights;
  std::vector<AtomParams> atoms;
  std::vector<int> labels;

  MixtureView mixture() const { return {weights, atoms}; }
};

struct ChainTrace {
  std::size_t chain = 0;
  std::uint64_t seed = 0;
  ModelKind model = ModelKind::semiparametric;
  KernelSpec kernel;
  std::vector<TraceRow> rows;
  MoveStats u_moves;
  MoveStats atom_moves;
  MoveStats scale_moves;
  double final_u_step = 0.0;  // adaptive sampler's frozen proposal sd
  std::size_t truncation_capped = 0;  // sweeps whose Q hit max_jumps

  std::vector<MixtureView> mixtures() const;
};

/// Complete chain state between sweeps.
struct SamplerState {
  AllocationState alloc;
  MeasureState measure;
  double u = 1.0;
  double common_sigma = 1.0;
  LocationPrior location;
  UAdaptState adapt;
  double loglik = 0.0;
  std::size_t iteration = 0;
};

/// Progress callback: (chain index, iterations done, total iterations).
using ProgressFn = std::function<void(std::size_t, std::size_t, std::size_t)>;

/// Builds the resolved model context (base measure defaults, step sizes).
ModelContext make_context(std::span<const Observation> data, const SamplerConfig& config);

/// Checks the data against the kernel support; throws ValidationError.
void validate_data(std::span<const Observation> data, const KernelSpec& kernel);

/// Single cluster at the data's location statistic, σ at the prior median,
/// u = 1, φ at the location law of the base measure.
SamplerState initial_state(std::span<const Observation> data, const ModelContext& ctx, bool jitter, Rng& rng);

/// One sweep: u, measure refresh, allocations, acceleration, hyperparameters,
/// common scale (semiparametric). Fills `snapshot` when non-null.
void gibbs_step(std::span<const Observation> data, SamplerState& state, const ModelContext& ctx,
                TruncationCache& cache, ChainTrace& stats, Rng& rng, double u_delta, bool adaptive_u,
                TraceRow* snapshot);

ChainTrace run_chain(std::span<const Observation> data, const SamplerConfig& config, std::size_t chain_index = 0,
                     TruncationCache* cache = nullptr, const ProgressFn& progress = {});

struct ChainResult {
  std::optional<ChainTrace> trace;
  std::string error;  // empty on success
};

/// Chains use seeds seed + index and, when more than one, jittered starts.
/// Results are ordered by chain index and do not depend on `exec`.
std::vector<ChainResult> run_chains(std::span<const Observation> data, const SamplerConfig& config,
                                    std::size_t n_chains, Exec exec = Exec::parallel,
                                    const ProgressFn& progress = {});

/// Per-chain configurations (e.g. to isolate one bad chain in tests).
std::vector<ChainResult> run_chains(std::span<const Observation> data, std::span<const SamplerConfig> configs,
                                    Exec exec = Exec::parallel, const ProgressFn& progress = {});

}  // namespace nggmix
