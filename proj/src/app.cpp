#include "nggmix/app.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "nggmix/cluster_prior.hpp"
#include "nggmix/clustering.hpp"
#include "nggmix/diagnostics.hpp"
#include "nggmix/io.hpp"
#include "nggmix/posterior.hpp"

namespace nggmix {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string band_csv(const BandEstimate& est) {
  std::string out = "x,mean,lower,upper\n";
  for (std::size_t g = 0; g < est.grid.size(); ++g) {
    out += format_double(est.grid[g]) + ',' + format_double(est.mean[g]) + ',' + format_double(est.lower[g]) + ',' +
           format_double(est.upper[g]) + '\n';
  }
  return out;
}

json number_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json config_json(const RunOptions& o, const BaseMeasureSpec& base) {
  const SamplerConfig& s = o.sampler;
  json j;
  j["dataset"] = o.dataset;
  j["model"] = to_string(s.model);
  j["kernel"] = to_string(s.kernel.family);
  j["alpha"] = s.ngg.alpha;
  j["kappa"] = s.ngg.kappa;
  j["gamma"] = s.ngg.gamma;
  j["scale_prior"] = base.scale.describe();
  j["location_prior"] = {{"family", base.location.family == LocationFamily::normal  ? "normal"
                                    : base.location.family == LocationFamily::gamma ? "gamma"
                                                                                    : "beta"},
                         {"phi1", base.location.phi1},
                         {"phi2", base.location.phi2}};
  j["hyperprior"] = {{"psi1", base.hyper.psi1},
                     {"psi2", base.hyper.psi2},
                     {"psi3", base.hyper.psi3},
                     {"psi4", base.hyper.psi4},
                     {"update", base.update_hyper}};
  j["iterations"] = s.iterations;
  j["burnin"] = s.burnin;
  j["thin"] = s.thinning;
  j["chains"] = o.chains;
  j["seed"] = s.seed;
  j["u_proposal_delta"] = s.u_proposal_delta;
  j["adaptive_u"] = s.adaptive_u;
  j["truncation_ell"] = s.truncation.target_index;
  j["truncation_max_jumps"] = s.truncation.max_jumps;
  j["grid_points"] = o.grid_points;
  j["quantiles"] = o.quantiles;
  j["clustering"] = o.clustering;
  j["level"] = o.level;
  j["qq_thin"] = o.qq_thin;
  return j;
}

}  // namespace

RunReport run_command(const RunOptions& options, std::ostream* progress) {
  const auto start = std::chrono::steady_clock::now();
  if (options.chains < 1) throw ValidationError("chains must be >= 1");
  if (options.grid_points < 2) throw ValidationError("grid-points must be >= 2");
  if (options.clustering != "none" && options.clustering != "binder" && options.clustering != "vi") {
    throw ValidationError("clustering must be none, binder or vi");
  }
  for (double p : options.quantiles) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile probabilities must lie in (0, 1)");
  }
  const std::vector<Observation> data = parse_dataset(options.dataset);

  SamplerConfig config = options.sampler;
  config.validate();
  validate_data(data, config.kernel);
  BaseMeasureSpec base = config.base ? *config.base : default_base_measure(data, config.kernel);
  if (!options.scale_prior.empty()) base.scale = make_scale_prior(options.scale_prior, options.scale_params);
  config.base = base;

  const fs::path dir(options.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + options.output_dir + ": " + ec.message());

  ProgressFn report;
  if (progress) {
    report = [progress](std::size_t chain, std::size_t done, std::size_t total) {
      *progress << "chain " << chain << ": MCMC iteration " << done << " of " << total << '\n' << std::flush;
    };
  }
  const auto t_sample = std::chrono::steady_clock::now();
  const auto results =
      run_chains(data, config, options.chains, options.sequential_chains ? Exec::serial : Exec::parallel, report);
  RunReport out;
  out.sampling_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_sample).count();
  std::vector<ChainTrace> chains;
  for (std::size_t c = 0; c < results.size(); ++c) {
    if (!results[c].error.empty()) out.chain_errors.push_back("chain " + std::to_string(c) + ": " + results[c].error);
    if (results[c].trace) chains.push_back(*results[c].trace);
  }
  if (!out.chain_errors.empty()) {
    std::string msg;
    for (const auto& e : out.chain_errors) msg += (msg.empty() ? "" : "; ") + e;
    throw SamplingError(msg);
  }

  auto emit = [&](const std::string& name, const std::string& content) {
    write_text_file((dir / name).string(), content);
    out.files.push_back(name);
  };

  // Traces.
  {
    std::ostringstream trace, atoms;
    trace << "chain,iteration,quantity,value\n";
    atoms << "chain,iteration,atom,weight,mu,sigma\n";
    for (const ChainTrace& c : chains) {
      for (const TraceRow& r : c.rows) {
        const std::string prefix = std::to_string(c.chain) + ',' + std::to_string(r.iteration) + ',';
        trace << prefix << "u," << format_double(r.u) << '\n';
        trace << prefix << "loglik," << format_double(r.loglik) << '\n';
        trace << prefix << "n_components," << r.n_components << '\n';
        if (c.model == ModelKind::semiparametric) trace << prefix << "sigma," << format_double(r.common_sigma) << '\n';
        trace << prefix << "phi1," << format_double(r.phi1) << '\n';
        trace << prefix << "phi2," << format_double(r.phi2) << '\n';
        for (std::size_t j = 0; j < r.atoms.size(); ++j) {
          atoms << prefix << j << ',' << format_double(r.weights[j]) << ',' << format_double(r.atoms[j].mu) << ','
                << format_double(r.atoms[j].sigma) << '\n';
        }
      }
    }
    emit("trace.csv", trace.str());
    emit("atoms.csv", atoms.str());
  }

  const std::vector<MixtureView> mixtures = pooled_mixtures(chains);
  const std::vector<double> grid = default_grid(data, config.kernel, options.grid_points);
  emit("density.csv", band_csv(density_estimate(mixtures, grid, config.kernel, options.level)));
  emit("cdf.csv", band_csv(cdf_estimate(mixtures, grid, config.kernel, options.level)));

  json quantiles = json::array();
  for (double p : options.quantiles) {
    const QuantileEstimate q = quantile_estimate(mixtures, config.kernel, p, options.level);
    quantiles.push_back({{"p", p}, {"point", q.point}, {"lower", q.lower}, {"upper", q.upper}, {"level", options.level}});
  }
  emit("quantiles.json", quantiles.dump(2) + "\n");

  const CpoEstimate cpos = cpo(mixtures, data, config.kernel);
  {
    std::string csv = "index,cpo\n";
    for (std::size_t i = 0; i < cpos.values.size(); ++i) csv += std::to_string(i + 1) + ',' + format_double(cpos.values[i]) + '\n';
    emit("cpo.csv", csv);
  }

  json psrf_json;
  if (chains.size() >= 2) {
    const PsrfResult pr = psrf(scalar_traces(chains));
    json uni = json::array();
    for (const PsrfValue& v : pr.univariate) {
      uni.push_back({{"name", v.name},
                     {"point", number_or_null(v.point)},
                     {"upper", number_or_null(v.upper)},
                     {"degenerate", v.degenerate},
                     {"note", v.note}});
    }
    psrf_json = {{"available", true},
                 {"univariate", uni},
                 {"multivariate", number_or_null(pr.multivariate)},
                 {"multivariate_degenerate", pr.multivariate_degenerate}};
  } else {
    psrf_json = {{"available", false}, {"reason", "PSRF needs at least 2 chains"}};
  }
  emit("psrf.json", psrf_json.dump(2) + "\n");

  if (options.clustering != "none") {
    const auto labelings = trace_labelings(chains);
    const ClusterEstimate est =
        minimize_loss(labelings, options.clustering == "vi" ? ClusterLoss::vi : ClusterLoss::binder);
    std::string csv = "index,label\n";
    for (std::size_t i = 0; i < est.partition.size(); ++i) {
      csv += std::to_string(i + 1) + ',' + std::to_string(est.partition[i] + 1) + '\n';
    }
    emit("clustering.csv", csv);
    std::string overlay = "index,value,ecdf,label\n";
    for (const ClusterCdfPoint& p : cluster_cdf_overlay(data, est.partition)) {
      overlay += std::to_string(p.index + 1) + ',' + format_double(p.value) + ',' + format_double(p.ecdf) + ',' +
                 std::to_string(p.label + 1) + '\n';
    }
    emit("clustering_cdf.csv", overlay);
  }

  const GofData gof = gof_data(mixtures, data, config.kernel, options.qq_thin);
  {
    std::string pp = "x,empirical,model\n";
    for (const PpPoint& p : gof.pp) pp += format_double(p.x) + ',' + format_double(p.empirical) + ',' + format_double(p.model) + '\n';
    emit("gof_pp.csv", pp);
    std::string qq = "p,empirical,model\n";
    for (const QqPoint& q : gof.qq) qq += format_double(q.p) + ',' + format_double(q.empirical) + ',' + format_double(q.model) + '\n';
    emit("gof_qq.csv", qq);
  }

  out.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest;
  manifest["software"] = {{"name", "nggmix"}, {"version", kVersion}};
  manifest["config"] = config_json(options, base);
  json seeds = json::array();
  json acceptance = json::array();
  for (const ChainTrace& c : chains) {
    seeds.push_back(c.seed);
    acceptance.push_back({{"chain", c.chain},
                          {"u", c.u_moves.rate()},
                          {"atoms", c.atom_moves.rate()},
                          {"sigma", c.scale_moves.rate()},
                          {"truncation_capped_sweeps", c.truncation_capped}});
  }
  manifest["seeds"] = seeds;
  manifest["acceptance"] = acceptance;
  manifest["observations"] = data.size();
  manifest["kept_iterations_per_chain"] = chains.front().rows.size();
  manifest["summary"] = {{"cpo_mean", cpos.mean}, {"cpo_median", cpos.median}, {"cpo_zero", cpos.zero_count}};
  manifest["timings_seconds"] = {{"sampling", out.sampling_seconds}, {"total", out.total_seconds}};
  out.files.push_back("manifest.json");
  manifest["files"] = out.files;
  write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  return out;
}

ElicitResult elicit_command(const ElicitOptions& options) {
  const auto rows = plot_prior_number_of_components(options.n, options.gamma, options.alpha);
  ElicitResult out;
  out.csv = "k,dirichlet,stable\n";
  std::vector<double> dp, st;
  for (const PriorPlotRow& r : rows) {
    out.csv += std::to_string(r.k) + ',' + format_double(r.dirichlet) + ',' + format_double(r.stable) + '\n';
    dp.push_back(r.dirichlet);
    st.push_back(r.stable);
  }
  json summary = {{"n", options.n},
                  {"alpha", options.alpha},
                  {"gamma", options.gamma},
                  {"dirichlet_expected_clusters", dirichlet_expected_clusters(options.n, options.alpha)},
                  {"stable_expected_clusters", stable_expected_clusters(options.n, options.gamma)},
                  {"dirichlet_entropy", pmf_entropy(dp)},
                  {"stable_entropy", pmf_entropy(st)}};
  out.summary_json = summary.dump(2) + "\n";
  return out;
}

namespace {

// key=value (INI) settings for options not given on the command line.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  CLI::ConfigINI ini;
  std::vector<CLI::ConfigItem> items;
  try {
    items = ini.from_file(path);
  } catch (const CLI::FileError& e) {
    throw ValidationError(e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == cmd.get_name())) {
      throw ValidationError("config file section '" + item.parents[0] + "' is not recognised");
    }
    CLI::Option* opt = nullptr;
    try {
      opt = cmd.get_option("--" + item.name);
    } catch (const CLI::OptionNotFound&) {
      throw ValidationError("config file key '" + item.name + "' is not a run option");
    }
    if (opt->count() > 0 || item.name == "config") continue;
    try {
      opt->add_result(item.inputs);
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw ValidationError("config file key '" + item.name + "': " + e.what());
    }
  }
}

void print_error(const std::string& kind, const std::string& message) {
  json err = {{"error", kind}, {"message", message}};
  std::cerr << err.dump() << '\n';
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Density estimation with normalized generalized gamma process mixtures"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunOptions run;
  std::string model = "semi";
  std::string kernel = "normal";
  std::vector<std::string> scale_prior;
  bool quiet = false;

  CLI::App* run_cmd = app.add_subcommand("run", "Run the Gibbs sampler and write all analysis products");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "key=value configuration file; command-line flags take precedence");
  run_cmd->add_option("dataset", run.dataset, "CSV dataset (left,right columns or a single column)")->required();
  run_cmd->add_option("-o,--output", run.output_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--model", model, "semi (common scale) or full (per-cluster scale)")->capture_default_str();
  run_cmd->add_option("--kernel", kernel, "normal, laplace, gamma, lognormal or beta")->capture_default_str();
  run_cmd->add_option("--alpha", run.sampler.ngg.alpha, "NGG total mass alpha")->capture_default_str();
  run_cmd->add_option("--kappa", run.sampler.ngg.kappa, "NGG kappa")->capture_default_str();
  run_cmd->add_option("--gamma", run.sampler.ngg.gamma, "NGG discount gamma in [0, 1)")->capture_default_str();
  run_cmd->add_option("--scale-prior", scale_prior, "Scale prior family followed by its parameters")
      ->expected(1, 5)
      ->delimiter(',');
  run_cmd->add_option("--nit", run.sampler.iterations, "Total iterations")->capture_default_str();
  run_cmd->add_option("--burnin", run.sampler.burnin, "Burn-in iterations")->capture_default_str();
  run_cmd->add_option("--thin", run.sampler.thinning, "Thinning interval")->capture_default_str();
  run_cmd->add_option("--chains", run.chains, "Number of chains")->capture_default_str();
  run_cmd->add_option("--seed", run.sampler.seed, "Seed of the first chain")->capture_default_str();
  run_cmd->add_option("--delta", run.sampler.u_proposal_delta, "Shape of the gamma proposal for u")
      ->capture_default_str();
  run_cmd->add_flag("--adaptive-u", run.sampler.adaptive_u, "Adaptive random walk on log u");
  run_cmd->add_option("--truncation-ell", run.sampler.truncation.target_index, "Moment-match budget")
      ->capture_default_str();
  run_cmd->add_option("--max-jumps", run.sampler.truncation.max_jumps, "Cap on the truncation level")
      ->capture_default_str();
  run_cmd->add_option("--grid-points", run.grid_points, "Density grid size")->capture_default_str();
  run_cmd->add_option("--quantiles", run.quantiles, "Quantile probabilities (0.05 gives HC5)")->delimiter(',');
  run_cmd->add_option("--clustering", run.clustering, "none, binder or vi")->capture_default_str();
  run_cmd->add_option("--level", run.level, "Credible level of bands and intervals")->capture_default_str();
  run_cmd->add_option("--qq-thin", run.qq_thin, "Thinning of the chain used for the QQ table")->capture_default_str();
  run_cmd->add_flag("--sequential", run.sequential_chains, "Run chains one after another");
  run_cmd->add_flag("-q,--quiet", quiet, "Suppress progress output");

  ElicitOptions elicit;
  std::string elicit_out;
  CLI::App* elicit_cmd = app.add_subcommand("elicit", "Prior law of the number of clusters (Dirichlet and stable)");
  elicit_cmd->add_option("--n", elicit.n, "Sample size")->capture_default_str();
  elicit_cmd->add_option("--alpha", elicit.alpha, "Dirichlet total mass")->capture_default_str();
  elicit_cmd->add_option("--gamma", elicit.gamma, "Stable discount")->capture_default_str();
  elicit_cmd->add_option("-o,--output", elicit_out, "Write the CSV table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("validation", e.what());
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      if (!config_path.empty()) apply_config_file(*run_cmd, config_path);
      run.sampler.model = parse_model_kind(model);
      run.sampler.kernel.family = parse_kernel_family(kernel);
      if (!scale_prior.empty()) {
        run.scale_prior = scale_prior.front();
        for (std::size_t i = 1; i < scale_prior.size(); ++i) {
          try {
            run.scale_params.push_back(std::stod(scale_prior[i]));
          } catch (const std::exception&) {
            throw ValidationError("scale prior parameter '" + scale_prior[i] + "' is not a number");
          }
        }
      }
      const RunReport report = run_command(run, quiet ? nullptr : &std::cerr);
      std::cout << json({{"status", "ok"}, {"output", run.output_dir}, {"files", report.files}}).dump() << '\n';
    } else if (elicit_cmd->parsed()) {
      const ElicitResult res = elicit_command(elicit);
      if (elicit_out.empty()) {
        std::cout << res.csv;
      } else {
        write_text_file(elicit_out, res.csv);
      }
      std::cerr << res.summary_json;
    }
  } catch (const ValidationError& e) {
    print_error("validation", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("sampling", e.what());
    return 3;
  }
  return 0;
}

}  // namespace nggmix
