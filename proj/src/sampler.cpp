#include "nggmix/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace nggmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> xs) {
  double top = kNegInf;
  for (double x : xs) top = std::max(top, x);
  if (top == kNegInf) return kNegInf;
  double total = 0.0;
  for (double x : xs) total += std::exp(x - top);
  return top + std::log(total);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

bool accept(double log_ratio, Rng& rng) {
  const double v = uniform01(rng);
  if (std::isnan(log_ratio)) return false;
  return log_ratio >= 0.0 || std::log(v) < log_ratio;
}

}  // namespace

ModelKind parse_model_kind(const std::string& name) {
  if (name == "semi" || name == "semiparametric") return ModelKind::semiparametric;
  if (name == "full" || name == "fully_nonparametric") return ModelKind::fully_nonparametric;
  throw ValidationError("unknown model: " + name + " (expected semi or full)");
}

std::string to_string(ModelKind model) {
  return model == ModelKind::semiparametric ? "semi" : "full";
}

void SamplerConfig::validate() const {
  ngg.validate();
  truncation.validate();
  if (base) base->validate();
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  if (burnin >= iterations) throw ValidationError("burnin must be smaller than iterations");
  if (thinning < 1) throw ValidationError("thinning must be >= 1");
  if (!(u_proposal_delta > 0.0) || !std::isfinite(u_proposal_delta)) {
    throw ValidationError("u proposal delta must be > 0");
  }
}

std::vector<double> MeasureState::log_jumps() const {
  std::vector<double> out;
  out.reserve(fixed_jumps.size() + unfixed.size());
  for (double j : fixed_jumps) out.push_back(std::log(j));
  out.insert(out.end(), unfixed.log_jumps.begin(), unfixed.log_jumps.end());
  return out;
}

std::vector<double> MeasureState::weights() const {
  std::vector<double> w = log_jumps();
  const double log_total = log_sum_exp(w);
  for (double& x : w) x = std::exp(x - log_total);
  return w;
}

// ---------------------------------------------------------------- latent U

double latent_u_log_target(double u, const NggParams& p, std::size_t n, std::size_t r) {
  if (!(u > 0.0) || !std::isfinite(u)) return kNegInf;
  const double nn = static_cast<double>(n);
  const double rr = static_cast<double>(r);
  const double lambda = u + p.kappa;
  double tail;
  if (p.gamma == 0.0) {
    tail = -p.alpha * std::log1p(u / p.kappa);
  } else if (p.kappa == 0.0) {
    tail = -(p.alpha / p.gamma) * std::pow(u, p.gamma);
  } else {
    // (u+κ)^γ - κ^γ without cancellation for small u.
    tail = -(p.alpha / p.gamma) * std::pow(p.kappa, p.gamma) * std::expm1(p.gamma * std::log1p(u / p.kappa));
  }
  return (nn - 1.0) * std::log(u) + (rr * p.gamma - nn) * std::log(lambda) + tail;
}

double u_proposal_log_density(double to, double from, double delta) {
  const double rate = delta / from;
  return delta * std::log(rate) + (delta - 1.0) * std::log(to) - rate * to - std::lgamma(delta);
}

double u_log_acceptance(double from, double to, const NggParams& p, std::size_t n, std::size_t r, double delta) {
  return latent_u_log_target(to, p, n, r) - latent_u_log_target(from, p, n, r) +
         u_proposal_log_density(from, to, delta) - u_proposal_log_density(to, from, delta);
}

UMove sample_latent_u(double u, const NggParams& p, std::size_t n, std::size_t r, double delta, Rng& rng) {
  const double proposal = std::gamma_distribution<double>(delta, u / delta)(rng);
  if (!(proposal > 0.0) || !std::isfinite(proposal)) {
    uniform01(rng);
    return {u, false};
  }
  if (accept(u_log_acceptance(u, proposal, p, n, r, delta), rng)) return {proposal, true};
  return {u, false};
}

double u_log_acceptance_rw(double from, double to, const NggParams& p, std::size_t n, std::size_t r) {
  return latent_u_log_target(to, p, n, r) + std::log(to) - latent_u_log_target(from, p, n, r) - std::log(from);
}

UMove sample_latent_u_adaptive(double u, const NggParams& p, std::size_t n, std::size_t r, UAdaptState& adapt,
                               Rng& rng) {
  const double step = std::exp(adapt.log_step);
  const double proposal = u * std::exp(step * std::normal_distribution<double>(0.0, 1.0)(rng));
  const double log_ratio =
      (proposal > 0.0 && std::isfinite(proposal)) ? u_log_acceptance_rw(u, proposal, p, n, r) : kNegInf;
  const bool ok = accept(log_ratio, rng);
  if (!adapt.frozen) {
    ++adapt.t;
    const double a = std::isnan(log_ratio) ? 0.0 : std::min(1.0, std::exp(log_ratio));
    adapt.log_step += std::pow(static_cast<double>(adapt.t), -adapt.rate_exponent) * (a - adapt.target_acceptance);
    adapt.log_step = std::clamp(adapt.log_step, -10.0, 5.0);
  }
  return ok ? UMove{proposal, true} : UMove{u, false};
}

// ---------------------------------------------------------- measure refresh

double sample_fixed_jump(std::size_t n_j, const NggParams& p, double u, Rng& rng) {
  const double shape = static_cast<double>(n_j) - p.gamma;
  const double j = std::gamma_distribution<double>(shape, 1.0 / (p.kappa + u))(rng);
  return std::max(j, std::numeric_limits<double>::denorm_min());
}

MeasureState refresh_measure(const AllocationState& alloc, double u, const LocationPrior& location,
                             double common_sigma, const ModelContext& ctx, TruncationCache& cache, Rng& rng) {
  MeasureState m;
  m.u = u;
  m.fixed_jumps.reserve(alloc.clusters());
  for (std::size_t n_j : alloc.counts) m.fixed_jumps.push_back(sample_fixed_jump(n_j, ctx.ngg, u, rng));

  const TruncationLevel level = cache.level(ctx.truncation, ctx.ngg, u);
  m.truncation_capped = !level.budget_reached;
  m.unfixed = sample_unfixed_jumps(ctx.ngg, u, level.jumps, rng);
  m.unfixed_atoms.resize(level.jumps);
  for (AtomParams& a : m.unfixed_atoms) {
    a.mu = sample_location(location, rng);
    a.sigma = ctx.model == ModelKind::fully_nonparametric ? scale_prior_sample(ctx.base, rng) : common_sigma;
  }
  return m;
}

// ------------------------------------------------------------- allocations

AllocationState compact_allocations(std::span<const int> atom_index, std::span<const AtomParams> atoms) {
  AllocationState out;
  out.labels.resize(atom_index.size());
  std::vector<int> remap(atoms.size(), -1);
  for (std::size_t i = 0; i < atom_index.size(); ++i) {
    const int a = atom_index[i];
    if (a < 0 || static_cast<std::size_t>(a) >= atoms.size()) throw SamplingError("allocation index out of range");
    if (remap[a] < 0) {
      remap[a] = static_cast<int>(out.atoms.size());
      out.atoms.push_back(atoms[a]);
      out.counts.push_back(0);
    }
    out.labels[i] = remap[a];
    ++out.counts[remap[a]];
  }
  return out;
}

AllocationResult resample_allocations(std::span<const Observation> data, std::span<const double> log_jumps,
                                      std::span<const AtomParams> atoms, const KernelSpec& kernel, Exec exec,
                                      Rng& rng) {
  const std::size_t n = data.size();
  std::vector<double> uniforms(n);
  for (double& v : uniforms) v = uniform01(rng);
  std::vector<int> index(n);
  std::vector<double> log_mix(n);
  const long failed = allocate_observations(data, log_jumps, atoms, kernel, uniforms, index, log_mix, exec);
  if (failed >= 0) {
    const Observation& o = data[failed];
    std::ostringstream os;
    os << "observation " << failed << " (" << to_string(o.kind()) << ", representative " << o.representative()
       << ") has zero likelihood under every atom";
    throw SamplingError(os.str());
  }
  AllocationResult result;
  result.alloc = compact_allocations(index, atoms);
  const double log_total = log_sum_exp(log_jumps);
  double ll = 0.0;
  for (double v : log_mix) ll += v - log_total;
  result.loglik = ll;
  return result;
}

// ------------------------------------------------- hyperparameters, atoms, σ

LocationPrior update_hyperparameters(const AllocationState& alloc, const LocationPrior& current,
                                     const BaseMeasureSpec& base, Rng& rng) {
  if (!base.update_hyper || current.family != LocationFamily::normal) return current;
  std::vector<double> mus;
  mus.reserve(alloc.clusters());
  for (const AtomParams& a : alloc.atoms) mus.push_back(a.mu);
  return sample_location_hyper(mus, base.hyper, rng);
}

double atom_log_target(std::span<const Observation> data, std::span<const std::size_t> members, AtomParams atom,
                       const LocationPrior& location, const ModelContext& ctx) {
  if (!ctx.kernel.valid_location(atom.mu) || !(atom.sigma > 0.0) || !std::isfinite(atom.sigma)) return kNegInf;
  double total = location_log_density(atom.mu, location);
  if (ctx.model == ModelKind::fully_nonparametric) total += ctx.base.scale.log_density(atom.sigma);
  if (total == kNegInf) return total;
  for (std::size_t i : members) {
    total += observation_loglik(data[i], ctx.kernel, atom);
    if (total == kNegInf) return total;
  }
  return total;
}

void accelerate_unique_values(std::span<const Observation> data, AllocationState& alloc,
                              const LocationPrior& location, const ModelContext& ctx, MoveStats& stats, Rng& rng) {
  std::vector<std::vector<std::size_t>> members(alloc.clusters());
  for (std::size_t i = 0; i < alloc.labels.size(); ++i) members[alloc.labels[i]].push_back(i);
  std::normal_distribution<double> z(0.0, 1.0);
  const bool full = ctx.model == ModelKind::fully_nonparametric;
  for (std::size_t j = 0; j < alloc.clusters(); ++j) {
    const AtomParams current = alloc.atoms[j];
    AtomParams proposal = current;
    proposal.mu = current.mu + ctx.location_step * z(rng);
    double log_ratio = 0.0;
    if (full) {
      const double step = ctx.log_scale_step * z(rng);
      proposal.sigma = current.sigma * std::exp(step);
      log_ratio += step;  // Jacobian of the log-scale walk
    }
    const double proposed = atom_log_target(data, members[j], proposal, location, ctx);
    log_ratio = proposed == kNegInf ? kNegInf
                                    : log_ratio + proposed - atom_log_target(data, members[j], current, location, ctx);
    ++stats.proposed;
    if (accept(log_ratio, rng)) {
      alloc.atoms[j] = proposal;
      ++stats.accepted;
    }
  }
}

double common_scale_log_target(std::span<const Observation> data, const AllocationState& alloc, double sigma,
                               const ModelContext& ctx) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return kNegInf;
  double total = ctx.base.scale.log_density(sigma);
  if (total == kNegInf) return total;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += observation_loglik(data[i], ctx.kernel, {alloc.atoms[alloc.labels[i]].mu, sigma});
    if (total == kNegInf) return total;
  }
  return total;
}

double sample_common_scale(std::span<const Observation> data, AllocationState& alloc, double sigma,
                           const ModelContext& ctx, MoveStats& stats, Rng& rng) {
  const double step = ctx.common_scale_step * std::normal_distribution<double>(0.0, 1.0)(rng);
  const double proposal = sigma * std::exp(step);
  const double proposed = common_scale_log_target(data, alloc, proposal, ctx);
  const double log_ratio =
      proposed == kNegInf ? kNegInf : proposed + step - common_scale_log_target(data, alloc, sigma, ctx);
  ++stats.proposed;
  if (!accept(log_ratio, rng)) return sigma;
  ++stats.accepted;
  for (AtomParams& a : alloc.atoms) a.sigma = proposal;
  return proposal;
}

// ------------------------------------------------------------------ chains

std::vector<MixtureView> ChainTrace::mixtures() const {
  std::vector<MixtureView> out;
  out.reserve(rows.size());
  for (const TraceRow& r : rows) out.push_back(r.mixture());
  return out;
}

void validate_data(std::span<const Observation> data, const KernelSpec& kernel) {
  if (data.empty()) throw ValidationError("dataset is empty");
  const Support s = kernel.support();
  const double lo = s == Support::real_line ? -std::numeric_limits<double>::infinity() : 0.0;
  const double hi = s == Support::unit_interval ? 1.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Observation& o = data[i];
    bool ok = true;
    switch (o.kind()) {
      case Censoring::exact:
        ok = kernel.in_support(o.value());
        break;
      case Censoring::left_censored:
        ok = *o.right() > lo;
        break;
      case Censoring::right_censored:
        ok = *o.left() < hi;
        break;
      case Censoring::interval:
        ok = *o.right() > lo && *o.left() < hi;
        break;
    }
    if (!ok) {
      std::ostringstream os;
      os << "observation " << i << " (" << to_string(o.kind()) << ", representative " << o.representative()
         << ") lies outside the support of the " << to_string(kernel.family) << " kernel";
      throw ValidationError(os.str());
    }
  }
}

ModelContext make_context(std::span<const Observation> data, const SamplerConfig& config) {
  config.validate();
  validate_data(data, config.kernel);
  ModelContext ctx;
  ctx.model = config.model;
  ctx.kernel = config.kernel;
  ctx.base = config.base ? *config.base : default_base_measure(data, config.kernel);
  ctx.ngg = config.ngg;
  ctx.truncation = config.truncation;
  ctx.location_step = summarize_data(data, config.kernel).spread / 10.0;
  ctx.exec = config.exec;
  return ctx;
}

SamplerState initial_state(std::span<const Observation> data, const ModelContext& ctx, bool jitter, Rng& rng) {
  SamplerState s;
  double centre = 0.0;
  for (const Observation& o : data) {
    const double x = o.representative();
    centre += ctx.kernel.family == KernelFamily::lognormal ? std::log(x) : x;
  }
  centre /= static_cast<double>(data.size());
  if (ctx.kernel.family == KernelFamily::gamma) centre = std::max(centre, 1e-6);
  if (ctx.kernel.family == KernelFamily::beta) centre = std::clamp(centre, 1e-3, 1.0 - 1e-3);

  s.common_sigma = ctx.base.scale.median();
  s.u = 1.0;
  if (jitter) {
    std::normal_distribution<double> z(0.0, 1.0);
    s.u *= std::exp(0.5 * z(rng));
    const double jittered = s.common_sigma * std::exp(0.3 * z(rng));
    if (ctx.base.scale.log_density(jittered) > kNegInf) s.common_sigma = jittered;
  }
  s.location = ctx.base.location;
  s.alloc.labels.assign(data.size(), 0);
  s.alloc.atoms = {{centre, s.common_sigma}};
  s.alloc.counts = {data.size()};
  return s;
}

void gibbs_step(std::span<const Observation> data, SamplerState& state, const ModelContext& ctx,
                TruncationCache& cache, ChainTrace& stats, Rng& rng, double u_delta, bool adaptive_u,
                TraceRow* snapshot) {
  const std::size_t n = data.size();
  const std::size_t r = state.alloc.clusters();
  ++state.iteration;

  const UMove move = adaptive_u ? sample_latent_u_adaptive(state.u, ctx.ngg, n, r, state.adapt, rng)
                                : sample_latent_u(state.u, ctx.ngg, n, r, u_delta, rng);
  state.u = move.u;
  ++stats.u_moves.proposed;
  if (move.accepted) ++stats.u_moves.accepted;

  state.measure = refresh_measure(state.alloc, state.u, state.location, state.common_sigma, ctx, cache, rng);
  if (state.measure.truncation_capped) ++stats.truncation_capped;

  std::vector<AtomParams> atoms = state.alloc.atoms;
  atoms.insert(atoms.end(), state.measure.unfixed_atoms.begin(), state.measure.unfixed_atoms.end());
  const std::vector<double> log_jumps = state.measure.log_jumps();
  AllocationResult res = resample_allocations(data, log_jumps, atoms, ctx.kernel, ctx.exec, rng);
  state.alloc = std::move(res.alloc);
  state.loglik = res.loglik;

  if (snapshot) {
    snapshot->weights = state.measure.weights();
    snapshot->atoms = std::move(atoms);
  }

  accelerate_unique_values(data, state.alloc, state.location, ctx, stats.atom_moves, rng);
  state.location = update_hyperparameters(state.alloc, state.location, ctx.base, rng);
  if (ctx.model == ModelKind::semiparametric) {
    state.common_sigma = sample_common_scale(data, state.alloc, state.common_sigma, ctx, stats.scale_moves, rng);
  }

  if (snapshot) {
    snapshot->iteration = state.iteration;
    snapshot->u = state.u;
    snapshot->loglik = state.loglik;
    snapshot->n_components = state.alloc.clusters();
    snapshot->common_sigma =
        ctx.model == ModelKind::semiparametric ? state.common_sigma : std::numeric_limits<double>::quiet_NaN();
    snapshot->phi1 = state.location.phi1;
    snapshot->phi2 = state.location.phi2;
    snapshot->labels = state.alloc.labels;
  }
}

ChainTrace run_chain(std::span<const Observation> data, const SamplerConfig& config, std::size_t chain_index,
                     TruncationCache* cache, const ProgressFn& progress) {
  const ModelContext ctx = make_context(data, config);
  TruncationCache local_cache;
  TruncationCache& memo = cache ? *cache : local_cache;

  Rng rng(config.seed);
  SamplerState state = initial_state(data, ctx, config.jitter_init, rng);
  ChainTrace trace;
  trace.chain = chain_index;
  trace.seed = config.seed;
  trace.model = config.model;
  trace.kernel = config.kernel;
  trace.rows.reserve((config.iterations - config.burnin) / config.thinning);

  const std::size_t cadence = std::max<std::size_t>(1, config.iterations / 10);
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    state.adapt.frozen = it > config.burnin;
    const bool keep = it > config.burnin && (it - config.burnin) % config.thinning == 0;
    TraceRow row;
    gibbs_step(data, state, ctx, memo, trace, rng, config.u_proposal_delta, config.adaptive_u,
               keep ? &row : nullptr);
    if (keep) trace.rows.push_back(std::move(row));
    if (progress && (it % cadence == 0 || it == config.iterations)) progress(chain_index, it, config.iterations);
  }
  trace.final_u_step = std::exp(state.adapt.log_step);
  return trace;
}

}  // namespace nggmix
