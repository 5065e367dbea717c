#pragma once

#include <cstddef>
#include <gmpxx.h>
#include <vector>

namespace nggmix {

/// Largest sample size accepted by the cluster-count priors.
inline constexpr std::size_t kMaxPriorSampleSize = 500;

/// Prior law of the number of clusters K_n among n observations.
struct ClusterCountPrior {
  std::size_t n = 0;
  std::vector<double> pmf;  // pmf[k-1] = P(K_n = k)
  double expectation = 0.0;
};

/// Unsigned Stirling numbers of the first kind |s(n, k)|, k = 0..n, from
/// |s(n,k)| = |s(n-1,k-1)| + (n-1)|s(n-1,k)|. Rows are cached.
std::vector<mpz_class> stirling1_row(std::size_t n);

/// Σ_{i=1}^{n} α / (α + i - 1), summed in 256-bit floating point.
double dirichlet_expected_clusters(std::size_t n, double alpha);

/// P(K_n = k) = |s(n,k)| α^k / (α)_n.
ClusterCountPrior dirichlet_cluster_pmf(std::size_t n, double alpha);
/// Same law in exact rational arithmetic (α is taken as its exact binary value).
std::vector<mpq_class> dirichlet_cluster_pmf_exact(std::size_t n, const mpq_class& alpha);

/// Generalized factorial coefficients C(n, k; γ), k = 0..n, from
/// C(n,k) = γ C(n-1,k-1) + (n-1-kγ) C(n-1,k), C(0,0) = 1, exactly.
std::vector<mpq_class> generalized_factorial_row(std::size_t n, const mpq_class& gamma);

/// Normalized stable process: P(K_n = k) = (k-1)! C(n,k;γ) / (γ (n-1)!).
ClusterCountPrior stable_cluster_pmf(std::size_t n, double gamma);
std::vector<mpq_class> stable_cluster_pmf_exact(std::size_t n, const mpq_class& gamma);
double stable_expected_clusters(std::size_t n, double gamma);

struct PriorPlotRow {
  std::size_t k = 0;
  double dirichlet = 0.0;
  double stable = 0.0;
};

/// (k, Dirichlet pmf, stable pmf) for k = 1..n.
std::vector<PriorPlotRow> plot_prior_number_of_components(std::size_t n, double gamma, double alpha);

/// Shannon entropy (nats) of a pmf.
double pmf_entropy(const std::vector<double>& pmf);

}  // namespace nggmix
