#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "stochquad/drm.hpp"
#include "stochquad/network.hpp"
#include "stochquad/quadrature.hpp"

namespace stochquad {

/// One variance measurement of a global quadrature rule at a point budget.
struct VarianceRecord {
  RuleId rule = RuleId::MC;
  int dim = 1;
  long n_points = 0;
  int repetitions = 0;
  double mean = 0.0;
  double sample_variance = 0.0;
  double reference_exponent = -1.0;  // -1 - (2p+2)/d, or -1 for MC
};

using Integrand = std::function<double(const Vec&)>;

/// Unbiased sample variance of Q(f) over independent global draws. Pass a
/// mesh for mesh-based rules or `n_points` alone for MC. Repetitions may run
/// on several threads; per-repetition streams are derived from the master
/// seed, so results are identical for any thread count.
VarianceRecord estimate_variance(const RuleDescriptor& rule, const Mesh* mesh, long n_points,
                                 const Integrand& f, int repetitions, std::uint64_t seed, int threads = 1,
                                 const SamplerOptions& opts = {});

struct ScalingStudy {
  std::vector<VarianceRecord> records;
  double fitted_slope = 0.0;
  std::vector<long> excluded_points;  // N values dropped for zero variance
};

/// Variance vs point count on a log-log grid; least-squares slope over the
/// largest-N half of the usable records.
ScalingStudy variance_scaling_study(RuleId id, int dim, std::span<const long> n_grid, const Integrand& f,
                                    int repetitions, std::uint64_t seed, int threads = 1);

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const std::pair<double, double>> xy);

struct CovarianceMetrics {
  int samples = 0;
  double trace = 0.0;
  double lambda_max = 0.0;
  double loss_variance = 0.0;
  bool converged = true;
};

/// Covariance metrics of S stochastic Ritz gradients at fixed parameters.
/// The leading eigenvalue comes from matrix-free power iteration on the
/// centred sample matrix; the P x P covariance is never materialised.
CovarianceMetrics gradient_covariance_metrics(const NetworkParameters& params, const RuleDescriptor& rule,
                                              const Mesh& mesh, int samples, std::uint64_t seed,
                                              const SamplerOptions& opts = {});

/// Same metrics from an explicit sample set; reused by the synthetic tests.
CovarianceMetrics covariance_metrics_from_samples(const std::vector<std::vector<double>>& gradients,
                                                  std::span<const double> losses, std::uint64_t seed);

/// Geometric binning of an iteration series: bin i covers [beta^i, beta^{i+1})
/// and reports (beta^{i+0.5}, mean over the bin). Entries with k < 1 are
/// ignored; empty bins are omitted.
std::vector<std::pair<double, double>> log_bin(std::span<const std::pair<long, double>> series, double beta);

struct LogBinStats {
  double centre = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  long count = 0;
  long k_lo = 0;  // inclusive
  long k_hi = 0;  // exclusive
};

std::vector<LogBinStats> log_bin_stats(std::span<const std::pair<long, double>> series, double beta);

}  // namespace stochquad
