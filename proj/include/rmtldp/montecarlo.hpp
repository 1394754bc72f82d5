#pragma once

#include <cstdint>
#include <vector>

#include "rmtldp/dyson.hpp"
#include "rmtldp/measure.hpp"
#include "rmtldp/wigner.hpp"

namespace rmtldp {

struct SpectrumSample {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> eigenvalues;  ///< ascending
  double lambda_max = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replica_index = 0;
};

/// Largest n * m handled by a single sample.
inline constexpr double kMaxMatrixEntries = 4e7;

/// Quantiles of rho at (i - 1/2) / m, ascending.
[[nodiscard]] std::vector<double> build_gamma(const SpectralMeasure& rho, std::size_t m);

/// M = round(alpha n); H = (1/M) Z^* diag(gamma) Z with Z of size M x n.
[[nodiscard]] SpectrumSample sample_spectrum(const CovarianceModel& model, std::size_t n,
                                             std::uint64_t seed, std::uint64_t replica_index);
/// X = W / sqrt(n) + diag(gamma) with gamma from build_gamma(mu_d, n).
[[nodiscard]] SpectrumSample sample_spectrum(const DeformedWignerModel& model, std::size_t n,
                                             std::uint64_t seed, std::uint64_t replica_index);

struct EdgeStats {
  std::vector<double> lambda_max;  ///< in replica order
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> quantile_levels{0.05, 0.25, 0.5, 0.75, 0.95};
  std::vector<double> quantiles;
};

/// lambda_max over replicas 0..replicas-1; OpenMP-parallel over replicas.
[[nodiscard]] EdgeStats edge_stats(const CovarianceModel& model, std::size_t n,
                                   std::size_t replicas, std::uint64_t seed);
[[nodiscard]] EdgeStats edge_stats(const DeformedWignerModel& model, std::size_t n,
                                   std::size_t replicas, std::uint64_t seed);
/// Serial reference for edge_stats.
[[nodiscard]] EdgeStats edge_stats_serial(const CovarianceModel& model, std::size_t n,
                                          std::size_t replicas, std::uint64_t seed);

/// Samples for replicas 0..replicas-1 in replica order.
[[nodiscard]] std::vector<SpectrumSample> sample_replicas(const CovarianceModel& model,
                                                          std::size_t n, std::size_t replicas,
                                                          std::uint64_t seed);
[[nodiscard]] std::vector<SpectrumSample> sample_replicas(const DeformedWignerModel& model,
                                                          std::size_t n, std::size_t replicas,
                                                          std::uint64_t seed);

struct Distances {
  double d_ks = 0.0;
  double w1 = 0.0;
};

/// Kolmogorov-Smirnov and Wasserstein-1 distances between the empirical measure of
/// `sorted_values` and `target`, exact over the merged breakpoints.
[[nodiscard]] Distances cdf_distances(const std::vector<double>& sorted_values,
                                      const SpectralMeasure& target);

/// Distances of one replica's spectrum to the sigma grid measure.
[[nodiscard]] Distances distance_stats(const CovarianceModel& model, const SigmaGrid& sigma,
                                       std::size_t n, std::uint64_t seed,
                                       std::uint64_t replica_index = 0);
[[nodiscard]] Distances distance_stats(const CovarianceModel& model, std::size_t n,
                                       std::uint64_t seed);

struct TailPoint {
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::size_t hits = 0;
  double fraction = 0.0;
  double estimate = 0.0;  ///< -(1/n) log(fraction); a lower bound when hits == 0
  double ci_low = 0.0;    ///< from the upper Wilson bound of the fraction
  double ci_high = 0.0;   ///< from the lower Wilson bound; +inf when it is 0
  bool lower_bound = false;
};

/// -(1/n) log P(lambda_max >= x) per n, with 95% Wilson intervals.
[[nodiscard]] std::vector<TailPoint> tail_curve(const CovarianceModel& model, double x,
                                                const std::vector<std::size_t>& n_list,
                                                std::size_t replicas, std::uint64_t seed);

}  // namespace rmtldp
