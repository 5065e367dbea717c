#include "nggmix/diagnostics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "nggmix/error.hpp"
#include "nggmix/posterior.hpp"

namespace nggmix {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double covariance(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x), my = mean_of(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size() - 1);
}

double f_quantile(double p, double df1, double df2) {
  if (!std::isfinite(df2) || df2 > 1e12) {
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(df1), p) / df1;
  }
  return boost::math::quantile(boost::math::fisher_f_distribution<double>(df1, df2), p);
}

void check_chains(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw ValidationError("PSRF needs at least 2 chains");
  const std::size_t n = chains.front().size();
  if (n < 2) throw ValidationError("PSRF needs at least 2 kept iterations per chain");
  for (const auto& c : chains) {
    if (c.size() != n) throw ValidationError("PSRF chains must have equal lengths");
  }
}

}  // namespace

ScalarTraceSet scalar_traces(std::span<const ChainTrace> chains) {
  ScalarTraceSet set;
  if (chains.empty()) return set;
  const bool semi = chains.front().model == ModelKind::semiparametric;
  set.names = {"n_components", "u", "loglik"};
  if (semi) set.names.push_back("sigma");
  for (const ChainTrace& c : chains) {
    std::vector<std::vector<double>> per(set.names.size());
    for (const TraceRow& r : c.rows) {
      per[0].push_back(static_cast<double>(r.n_components));
      per[1].push_back(r.u);
      per[2].push_back(r.loglik);
      if (semi) per[3].push_back(r.common_sigma);
    }
    set.values.push_back(std::move(per));
  }
  return set;
}

PsrfValue psrf_scalar(const std::vector<std::vector<double>>& chains, double confidence) {
  check_chains(chains);
  const double m = static_cast<double>(chains.size());
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars, means_sq;
  for (const auto& c : chains) {
    means.push_back(mean_of(c));
    vars.push_back(covariance(c, c));
    means_sq.push_back(means.back() * means.back());
  }
  const double w = mean_of(vars);
  const double b = n * covariance(means, means);
  PsrfValue out;
  if (!(w > 0.0)) {
    out.degenerate = true;
    out.note = "zero within-chain variance";
    return out;
  }
  if (b == 0.0) {
    out.degenerate = true;
    out.note = "zero between-chain variance";
  }
  const double muhat = mean_of(means);
  const double var_w = covariance(vars, vars) / m;
  const double var_b = 2.0 * b * b / (m - 1.0);
  const double cov_wb = (n / m) * (covariance(vars, means_sq) - 2.0 * muhat * covariance(vars, means));
  const double v = (n - 1.0) * w / n + (1.0 + 1.0 / m) * b / n;
  const double var_v = ((n - 1.0) * (n - 1.0) * var_w + (1.0 + 1.0 / m) * (1.0 + 1.0 / m) * var_b +
                        2.0 * (n - 1.0) * (1.0 + 1.0 / m) * cov_wb) /
                       (n * n);
  const double df_v = var_v > 0.0 ? 2.0 * v * v / var_v : std::numeric_limits<double>::infinity();
  const double df_adj = std::isfinite(df_v) ? (df_v + 3.0) / (df_v + 1.0) : 1.0;
  const double w_df = var_w > 0.0 ? 2.0 * w * w / var_w : std::numeric_limits<double>::infinity();
  const double r2_fixed = (n - 1.0) / n;
  const double r2_random = (1.0 + 1.0 / m) * (1.0 / n) * (b / w);
  out.point = std::sqrt(df_adj * (r2_fixed + r2_random));
  out.upper = std::sqrt(df_adj * (r2_fixed + f_quantile(0.5 * (1.0 + confidence), m - 1.0, w_df) * r2_random));
  return out;
}

PsrfResult psrf(const ScalarTraceSet& traces, double confidence) {
  if (traces.values.size() < 2) throw ValidationError("PSRF needs at least 2 chains");
  const std::size_t q = traces.names.size();
  PsrfResult result;
  std::vector<std::size_t> usable;
  for (std::size_t k = 0; k < q; ++k) {
    std::vector<std::vector<double>> chains;
    for (const auto& c : traces.values) chains.push_back(c[k]);
    PsrfValue v = psrf_scalar(chains, confidence);
    v.name = traces.names[k];
    if (v.point && !(v.degenerate && !v.upper)) usable.push_back(k);
    if (!v.point) result.multivariate_degenerate = true;
    result.univariate.push_back(std::move(v));
  }
  // Multivariate PSRF over the series with positive within-chain variance.
  const std::size_t p = usable.size();
  if (p == 0) {
    result.multivariate_degenerate = true;
    return result;
  }
  const std::size_t m = traces.values.size();
  const std::size_t n = traces.values.front()[0].size();
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd chain_means(m, p);
  for (std::size_t c = 0; c < m; ++c) {
    Eigen::MatrixXd x(n, p);
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t t = 0; t < n; ++t) x(t, a) = traces.values[c][usable[a]][t];
    }
    const Eigen::RowVectorXd mu = x.colwise().mean();
    chain_means.row(c) = mu;
    const Eigen::MatrixXd centred = x.rowwise() - mu;
    within += centred.transpose() * centred / static_cast<double>(n - 1);
  }
  within /= static_cast<double>(m);
  const Eigen::RowVectorXd grand = chain_means.colwise().mean();
  const Eigen::MatrixXd cm = chain_means.rowwise() - grand;
  const Eigen::MatrixXd between_over_n = cm.transpose() * cm / static_cast<double>(m - 1);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between_over_n, within);
  if (solver.info() != Eigen::Success) {
    result.multivariate_degenerate = true;
    return result;
  }
  const double lambda = std::max(0.0, solver.eigenvalues().maxCoeff());
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  result.multivariate = std::sqrt((nd - 1.0) / nd + (1.0 + 1.0 / md) * lambda);
  return result;
}

// ----------------------------------------------------------------- Turnbull

namespace {

struct Bounds {
  double lo;
  double hi;
  bool lo_closed;  // exact observations only
};

Bounds bounds_of(const Observation& o) {
  const double inf = std::numeric_limits<double>::infinity();
  switch (o.kind()) {
    case Censoring::exact:
      return {o.value(), o.value(), true};
    case Censoring::left_censored:
      return {-inf, *o.right(), false};
    case Censoring::right_censored:
      return {*o.left(), inf, false};
    case Censoring::interval:
      return {*o.left(), *o.right(), false};
  }
  return {-inf, inf, false};
}

bool contains(const Bounds& b, const TurnbullInterval& j) {
  const bool left_ok = j.point ? (b.lo_closed ? j.lo >= b.lo : j.lo > b.lo) : j.lo >= b.lo;
  return left_ok && j.hi <= b.hi;
}

}  // namespace

double TurnbullEstimate::cdf(double x) const {
  double count = 0.0;
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j].hi <= x) count += expected_counts[j];
  }
  return std::min(1.0, count / static_cast<double>(n));
}

TurnbullEstimate turnbull(std::span<const Observation> data, double tol, std::size_t max_iter) {
  if (data.empty()) throw ValidationError("Turnbull estimate needs at least one observation");
  std::vector<Bounds> obs;
  obs.reserve(data.size());
  for (const Observation& o : data) obs.push_back(bounds_of(o));

  // Endpoint order at equal values: closed left ends of exact points, then
  // right ends, then open left ends.
  struct End {
    double value;
    int rank;  // 0 closed left, 1 right, 2 open left
  };
  std::vector<End> ends;
  for (const Bounds& b : obs) {
    ends.push_back({b.lo, b.lo_closed ? 0 : 2});
    ends.push_back({b.hi, 1});
  }
  std::sort(ends.begin(), ends.end(), [](const End& a, const End& b) {
    return a.value < b.value || (a.value == b.value && a.rank < b.rank);
  });
  TurnbullEstimate est;
  est.n = data.size();
  for (std::size_t k = 0; k + 1 < ends.size(); ++k) {
    const End& l = ends[k];
    const End& r = ends[k + 1];
    if (l.rank == 1 || r.rank != 1) continue;
    TurnbullInterval iv{l.value, r.value, l.rank == 0};
    if (est.support.empty() || est.support.back().lo != iv.lo || est.support.back().hi != iv.hi ||
        est.support.back().point != iv.point) {
      est.support.push_back(iv);
    }
  }

  const std::size_t m = est.support.size();
  std::vector<std::vector<std::size_t>> member(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (contains(obs[i], est.support[j])) member[i].push_back(j);
    }
    if (member[i].empty()) throw SamplingError("Turnbull construction left an observation without support");
  }

  const double nd = static_cast<double>(data.size());
  std::vector<double> mass(m, 1.0 / static_cast<double>(m));
  std::vector<double> counts(m);
  est.converged = false;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (const auto& js : member) {
      double denom = 0.0;
      for (std::size_t j : js) denom += mass[j];
      for (std::size_t j : js) counts[j] += mass[j] / denom;
    }
    double change = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double next = counts[j] / nd;
      change = std::max(change, std::fabs(next - mass[j]));
      mass[j] = next;
    }
    est.iterations = it + 1;
    if (change < tol) {
      est.converged = true;
      break;
    }
  }
  est.mass = mass;
  est.expected_counts = counts;
  return est;
}

// ---------------------------------------------------------------- GOF data

GofData gof_data(std::span<const MixtureView> mixtures, std::span<const Observation> data, const KernelSpec& kernel,
                 std::size_t qq_thin) {
  if (mixtures.empty()) throw ValidationError("trace has no kept iterations");
  if (qq_thin < 1) throw ValidationError("QQ thinning must be >= 1");
  const TurnbullEstimate emp = turnbull(data);

  // The posterior-mean CDF is the CDF of the pooled mixture with weights / T.
  auto pool = [&](std::size_t stride, std::vector<double>& w, std::vector<AtomParams>& a) {
    std::size_t used = 0;
    for (std::size_t t = 0; t < mixtures.size(); t += stride) ++used;
    for (std::size_t t = 0; t < mixtures.size(); t += stride) {
      for (std::size_t j = 0; j < mixtures[t].atoms.size(); ++j) {
        w.push_back(mixtures[t].weights[j] / static_cast<double>(used));
        a.push_back(mixtures[t].atoms[j]);
      }
    }
  };
  std::vector<double> w_all, w_thin;
  std::vector<AtomParams> a_all, a_thin;
  pool(1, w_all, a_all);
  pool(qq_thin, w_thin, a_thin);
  const MixtureView thinned{w_thin, a_thin};

  GofData out;
  double previous = 0.0;
  for (std::size_t j = 0; j < emp.support.size(); ++j) {
    const double x = emp.support[j].hi;
    if (!std::isfinite(x)) continue;
    const double f_emp = emp.cdf(x);
    if (!out.pp.empty() && out.pp.back().x == x) continue;
    out.pp.push_back({x, f_emp, mixture_cdf(x, w_all, a_all, kernel)});
    const double p = 0.5 * (previous + f_emp);
    previous = f_emp;
    if (p > 0.0 && p < 1.0) out.qq.push_back({p, x, mixture_quantile(thinned, kernel, p)});
  }
  return out;
}

}  // namespace nggmix
