#include "nggmix/cluster_prior.hpp"

#include <cmath>
#include <mpfr.h>
#include <mutex>
#include <string>

#include "nggmix/error.hpp"

namespace nggmix {

namespace {

constexpr mpfr_prec_t kPrecision = 256;

// Minimal RAII holder for an MPFR value.
class Real {
 public:
  Real() { mpfr_init2(v_, kPrecision); mpfr_set_ui(v_, 0, MPFR_RNDN); }
  explicit Real(double x) { mpfr_init2(v_, kPrecision); mpfr_set_d(v_, x, MPFR_RNDN); }
  explicit Real(const mpz_class& z) { mpfr_init2(v_, kPrecision); mpfr_set_z(v_, z.get_mpz_t(), MPFR_RNDN); }
  Real(const Real& o) { mpfr_init2(v_, kPrecision); mpfr_set(v_, o.v_, MPFR_RNDN); }
  Real& operator=(const Real& o) {
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

void check_n(std::size_t n) {
  if (n < 1) throw ValidationError("sample size must be >= 1");
  if (n > kMaxPriorSampleSize) {
    throw ValidationError("sample size exceeds the supported maximum of " + std::to_string(kMaxPriorSampleSize));
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be > 0");
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("stable gamma must lie in (0, 1)");
}

ClusterCountPrior finish(std::size_t n, const std::vector<Real>& probs) {
  ClusterCountPrior out;
  out.n = n;
  out.pmf.resize(n);
  Real mean;
  Real term;
  for (std::size_t k = 1; k <= n; ++k) {
    out.pmf[k - 1] = probs[k].to_double();
    mpfr_mul_ui(term.get(), probs[k].get(), k, MPFR_RNDN);
    mpfr_add(mean.get(), mean.get(), term.get(), MPFR_RNDN);
  }
  out.expectation = mean.to_double();
  return out;
}

std::mutex stirling_mutex;
std::vector<std::vector<mpz_class>> stirling_rows{{1}};

}  // namespace

std::vector<mpz_class> stirling1_row(std::size_t n) {
  std::lock_guard lock(stirling_mutex);
  while (stirling_rows.size() <= n) {
    const std::vector<mpz_class>& prev = stirling_rows.back();
    const std::size_t m = stirling_rows.size();  // row index being built
    std::vector<mpz_class> row(m + 1, 0);
    for (std::size_t k = 1; k <= m; ++k) {
      row[k] = prev[k - 1];
      if (k < m) row[k] += (m - 1) * prev[k];
    }
    stirling_rows.push_back(std::move(row));
  }
  return stirling_rows[n];
}

double dirichlet_expected_clusters(std::size_t n, double alpha) {
  check_n(n);
  check_alpha(alpha);
  Real total, a(alpha), denom, term;
  for (std::size_t i = 1; i <= n; ++i) {
    mpfr_add_ui(denom.get(), a.get(), i - 1, MPFR_RNDN);
    mpfr_div(term.get(), a.get(), denom.get(), MPFR_RNDN);
    mpfr_add(total.get(), total.get(), term.get(), MPFR_RNDN);
  }
  return total.to_double();
}

ClusterCountPrior dirichlet_cluster_pmf(std::size_t n, double alpha) {
  check_n(n);
  check_alpha(alpha);
  const std::vector<mpz_class> s = stirling1_row(n);
  const Real a(alpha);
  Real rising(1.0), factor;
  for (std::size_t i = 0; i < n; ++i) {
    mpfr_add_ui(factor.get(), a.get(), i, MPFR_RNDN);
    mpfr_mul(rising.get(), rising.get(), factor.get(), MPFR_RNDN);
  }
  std::vector<Real> probs(n + 1);
  Real power(1.0);
  for (std::size_t k = 1; k <= n; ++k) {
    mpfr_mul(power.get(), power.get(), a.get(), MPFR_RNDN);
    Real sk(s[k]);
    mpfr_mul(probs[k].get(), sk.get(), power.get(), MPFR_RNDN);
    mpfr_div(probs[k].get(), probs[k].get(), rising.get(), MPFR_RNDN);
  }
  return finish(n, probs);
}

std::vector<mpq_class> dirichlet_cluster_pmf_exact(std::size_t n, const mpq_class& alpha) {
  check_n(n);
  if (sgn(alpha) <= 0) throw ValidationError("alpha must be > 0");
  const std::vector<mpz_class> s = stirling1_row(n);
  mpq_class rising = 1;
  for (std::size_t i = 0; i < n; ++i) rising *= alpha + mpq_class(i);
  std::vector<mpq_class> pmf(n);
  mpq_class power = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    power *= alpha;
    pmf[k - 1] = mpq_class(s[k]) * power / rising;
    pmf[k - 1].canonicalize();
  }
  return pmf;
}

std::vector<mpq_class> generalized_factorial_row(std::size_t n, const mpq_class& gamma) {
  std::vector<mpq_class> row{1};
  for (std::size_t m = 1; m <= n; ++m) {
    std::vector<mpq_class> next(m + 1, 0);
    for (std::size_t k = 1; k <= m; ++k) {
      next[k] = gamma * row[k - 1];
      if (k < m) next[k] += (mpq_class(m - 1) - mpq_class(k) * gamma) * row[k];
    }
    row = std::move(next);
  }
  return row;
}

ClusterCountPrior stable_cluster_pmf(std::size_t n, double gamma) {
  check_n(n);
  check_gamma(gamma);
  const Real g(gamma);
  // Triangle of C(m, k; γ) in 256-bit floating point; all terms are positive.
  std::vector<Real> row(2);
  mpfr_set_ui(row[0].get(), 1, MPFR_RNDN);
  std::vector<Real> next;
  Real coef, tmp;
  for (std::size_t m = 1; m <= n; ++m) {
    next.assign(m + 1, Real());
    for (std::size_t k = 1; k <= m; ++k) {
      mpfr_mul(next[k].get(), g.get(), row[k - 1].get(), MPFR_RNDN);
      if (k < m) {
        mpfr_mul_ui(coef.get(), g.get(), k, MPFR_RNDN);
        mpfr_ui_sub(coef.get(), m - 1, coef.get(), MPFR_RNDN);
        mpfr_mul(tmp.get(), coef.get(), row[k].get(), MPFR_RNDN);
        mpfr_add(next[k].get(), next[k].get(), tmp.get(), MPFR_RNDN);
      }
    }
    next.emplace_back();
    row.swap(next);
  }
  // P(K = k) = (k-1)! C(n,k) / (γ (n-1)!).
  Real denom, fact(1.0);
  mpfr_fac_ui(denom.get(), n - 1, MPFR_RNDN);
  mpfr_mul(denom.get(), denom.get(), g.get(), MPFR_RNDN);
  std::vector<Real> probs(n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    if (k > 1) mpfr_mul_ui(fact.get(), fact.get(), k - 1, MPFR_RNDN);
    mpfr_mul(probs[k].get(), fact.get(), row[k].get(), MPFR_RNDN);
    mpfr_div(probs[k].get(), probs[k].get(), denom.get(), MPFR_RNDN);
  }
  return finish(n, probs);
}

std::vector<mpq_class> stable_cluster_pmf_exact(std::size_t n, const mpq_class& gamma) {
  check_n(n);
  if (!(sgn(gamma) > 0 && gamma < 1)) throw ValidationError("stable gamma must lie in (0, 1)");
  const std::vector<mpq_class> c = generalized_factorial_row(n, gamma);
  mpz_class denom_fact = 1;
  for (std::size_t i = 2; i < n; ++i) denom_fact *= i;
  const mpq_class denom = gamma * mpq_class(denom_fact);
  std::vector<mpq_class> pmf(n);
  mpz_class fact = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k > 1) fact *= k - 1;
    pmf[k - 1] = mpq_class(fact) * c[k] / denom;
    pmf[k - 1].canonicalize();
  }
  return pmf;
}

double stable_expected_clusters(std::size_t n, double gamma) { return stable_cluster_pmf(n, gamma).expectation; }

std::vector<PriorPlotRow> plot_prior_number_of_components(std::size_t n, double gamma, double alpha) {
  const ClusterCountPrior dp = dirichlet_cluster_pmf(n, alpha);
  const ClusterCountPrior st = stable_cluster_pmf(n, gamma);
  std::vector<PriorPlotRow> rows(n);
  for (std::size_t k = 1; k <= n; ++k) rows[k - 1] = {k, dp.pmf[k - 1], st.pmf[k - 1]};
  return rows;
}

double pmf_entropy(const std::vector<double>& pmf) {
  double h = 0.0;
  for (double p : pmf) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace nggmix
