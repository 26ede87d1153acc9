#include "stochquad/stats.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>

namespace stochquad {

namespace {

double reference_exponent(const RuleDescriptor& rule) {
  if (rule.id == RuleId::MC) return -1.0;
  return -1.0 - (2.0 * rule.order + 2.0) / rule.dim;
}

}  // namespace

VarianceRecord estimate_variance(const RuleDescriptor& rule, const Mesh* mesh, long n_points,
                                 const Integrand& f, int repetitions, std::uint64_t seed, int threads,
                                 const SamplerOptions& opts) {
  if (repetitions < 2) throw std::invalid_argument("estimate_variance: repetitions must be >= 2");
  if (rule.id != RuleId::MC && mesh == nullptr)
    throw std::invalid_argument("estimate_variance: mesh required for mesh-based rules");

  const RandomStream master(seed);
  std::vector<double> values(static_cast<std::size_t>(repetitions));
  auto run_range = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      RandomStream rng = master.substream(static_cast<std::uint64_t>(r));
      values[static_cast<std::size_t>(r)] =
          rule.id == RuleId::MC ? mc_integrate(f, rule.dim, n_points, rng)
                                : integrate_global(rule, *mesh, f, rng, opts);
    }
  };
  const int worker_count = std::max(1, threads);
  if (worker_count == 1) {
    run_range(0, repetitions);
  } else {
    std::vector<std::thread> workers;
    const int chunk = (repetitions + worker_count - 1) / worker_count;
    for (int w = 0; w < worker_count; ++w) {
      const int lo = w * chunk;
      const int hi = std::min(repetitions, lo + chunk);
      if (lo >= hi) break;
      workers.emplace_back(run_range, lo, hi);
    }
    for (auto& t : workers) t.join();
  }

  VarianceRecord rec;
  rec.rule = rule.id;
  rec.dim = rule.dim;
  rec.n_points = rule.id == RuleId::MC
                     ? n_points
                     : static_cast<long>(mesh->elements.size()) * rule.points_per_element;
  rec.repetitions = repetitions;
  rec.mean = sample_mean(values);
  rec.sample_variance = sample_variance(values);
  rec.reference_exponent = reference_exponent(rule);
  return rec;
}

double fit_loglog_slope(std::span<const std::pair<double, double>> xy) {
  if (xy.size() < 2) throw std::invalid_argument("fit_loglog_slope: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(xy.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingStudy variance_scaling_study(RuleId id, int dim, std::span<const long> n_grid, const Integrand& f,
                                    int repetitions, std::uint64_t seed, int threads) {
  if (n_grid.size() < 3) throw std::invalid_argument("variance_scaling_study: need >= 3 point counts");
  const long n_min = *std::min_element(n_grid.begin(), n_grid.end());
  const long n_max = *std::max_element(n_grid.begin(), n_grid.end());
  if (n_max < 10 * n_min)
    throw std::invalid_argument("variance_scaling_study: grid must span at least one decade");

  const RuleDescriptor rule = make_rule(id, dim);
  const RandomStream master(seed);
  ScalingStudy study;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const long n = n_grid[i];
    std::optional<Mesh> mesh;
    if (id != RuleId::MC) mesh = rule_mesh_for_points(rule, n);
    study.records.push_back(estimate_variance(rule, mesh ? &*mesh : nullptr, n, f, repetitions,
                                              master.substream(static_cast<std::uint64_t>(i)).seed(),
                                              threads));
  }

  std::vector<VarianceRecord> usable;
  for (const auto& rec : study.records) {
    if (rec.sample_variance > 0.0) {
      usable.push_back(rec);
    } else {
      study.excluded_points.push_back(rec.n_points);
    }
  }
  std::sort(usable.begin(), usable.end(),
            [](const VarianceRecord& a, const VarianceRecord& b) { return a.n_points < b.n_points; });
  if (usable.size() < 2) throw std::invalid_argument("variance_scaling_study: too few usable records");
  // Fit over the largest-N half to skip the pre-asymptotic regime.
  const std::size_t take = (usable.size() + 1) / 2;
  std::vector<std::pair<double, double>> xy;
  for (std::size_t i = usable.size() - std::max<std::size_t>(take, 2); i < usable.size(); ++i)
    xy.emplace_back(static_cast<double>(usable[i].n_points), usable[i].sample_variance);
  study.fitted_slope = fit_loglog_slope(xy);
  return study;
}

CovarianceMetrics covariance_metrics_from_samples(const std::vector<std::vector<double>>& gradients,
                                                  std::span<const double> losses, std::uint64_t seed) {
  const int s_count = static_cast<int>(gradients.size());
  if (s_count < 2) throw std::invalid_argument("covariance metrics require >= 2 samples");
  const std::size_t p_count = gradients.front().size();

  CovarianceMetrics metrics;
  metrics.samples = s_count;
  metrics.loss_variance = losses.size() >= 2 ? sample_variance(losses) : 0.0;

  // Centred samples y_s = g_s - mean; covariance C = sum_s y_s y_s^T / (S-1).
  std::vector<double> mean(p_count, 0.0);
  for (const auto& g : gradients)
    for (std::size_t i = 0; i < p_count; ++i) mean[i] += g[i];
  for (auto& m : mean) m /= s_count;
  std::vector<std::vector<double>> centred(gradients.size());
  for (std::size_t s = 0; s < gradients.size(); ++s) {
    centred[s].resize(p_count);
    for (std::size_t i = 0; i < p_count; ++i) centred[s][i] = gradients[s][i] - mean[i];
  }

  double trace = 0.0;
  for (const auto& y : centred)
    for (double v : y) trace += v * v;
  trace /= (s_count - 1);
  metrics.trace = trace;

  if (trace == 0.0) {
    metrics.lambda_max = 0.0;
    return metrics;
  }

  // Power iteration on C, applied as C v = sum_s (y_s . v) y_s / (S-1).
  RandomStream rng = RandomStream(seed).substream(0x9d5f);
  std::vector<double> v(p_count);
  for (auto& vi : v) vi = rng.normal();
  auto normalise = [&](std::vector<double>& w) {
    double nrm = 0.0;
    for (double wi : w) nrm += wi * wi;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return false;
    for (auto& wi : w) wi /= nrm;
    return true;
  };
  if (!normalise(v)) v[0] = 1.0;

  const int max_iterations = 200;
  const double tolerance = 1e-6;
  double rayleigh = 0.0;
  bool converged = false;
  std::vector<double> cv(p_count);
  for (int it = 0; it < max_iterations; ++it) {
    std::fill(cv.begin(), cv.end(), 0.0);
    for (const auto& y : centred) {
      double proj = 0.0;
      for (std::size_t i = 0; i < p_count; ++i) proj += y[i] * v[i];
      proj /= (s_count - 1);
      for (std::size_t i = 0; i < p_count; ++i) cv[i] += proj * y[i];
    }
    double new_rayleigh = 0.0;
    for (std::size_t i = 0; i < p_count; ++i) new_rayleigh += cv[i] * v[i];
    if (!normalise(cv)) {
      new_rayleigh = 0.0;
      converged = true;
      rayleigh = 0.0;
      break;
    }
    v = cv;
    if (it > 0 && std::abs(new_rayleigh - rayleigh) <= tolerance * std::abs(new_rayleigh)) {
      rayleigh = new_rayleigh;
      converged = true;
      break;
    }
    rayleigh = new_rayleigh;
  }
  metrics.lambda_max = std::max(0.0, rayleigh);
  metrics.converged = converged;
  return metrics;
}

CovarianceMetrics gradient_covariance_metrics(const NetworkParameters& params, const RuleDescriptor& rule,
                                              const Mesh& mesh, int samples, std::uint64_t seed,
                                              const SamplerOptions& opts) {
  if (samples < 10) throw std::invalid_argument("gradient_covariance_metrics: need >= 10 samples");
  const ProblemSpec spec = make_problem(rule.dim);
  auto f = [&spec](const Vec& x) { return forcing(spec, x); };
  RandomStream master(seed);
  std::vector<std::vector<double>> grads;
  std::vector<double> losses;
  grads.reserve(static_cast<std::size_t>(samples));
  losses.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    RandomStream rng = master.substream(static_cast<std::uint64_t>(s));
    const GlobalSample draw = draw_global_sample(rule, mesh, rng, opts);
    LossGrad lg = grad_wrt_parameters(params, draw.nodes, draw.weights, f);
    grads.push_back(std::move(lg.grad));
    losses.push_back(lg.loss);
  }
  return covariance_metrics_from_samples(grads, losses, seed);
}

std::vector<std::pair<double, double>> log_bin(std::span<const std::pair<long, double>> series, double beta) {
  std::vector<std::pair<double, double>> out;
  for (const auto& stats : log_bin_stats(series, beta)) out.emplace_back(stats.centre, stats.mean);
  return out;
}

std::vector<LogBinStats> log_bin_stats(std::span<const std::pair<long, double>> series, double beta) {
  if (!(beta > 1.0)) throw std::invalid_argument("log_bin: beta must be > 1");
  if (series.empty()) throw std::invalid_argument("log_bin: series must be nonempty");
  struct Accumulator {
    std::vector<double> values;
  };
  std::vector<int> bin_of;
  int max_bin = -1;
  bin_of.reserve(series.size());
  for (const auto& [k, value] : series) {
    (void)value;
    if (k < 1) {
      bin_of.push_back(-1);
      continue;
    }
    const int bin = static_cast<int>(std::floor(std::log(static_cast<double>(k)) / std::log(beta)));
    bin_of.push_back(bin);
    max_bin = std::max(max_bin, bin);
  }
  if (max_bin < 0) return {};
  std::vector<Accumulator> bins(static_cast<std::size_t>(max_bin) + 1);
  for (std::size_t i = 0; i < series.size(); ++i)
    if (bin_of[i] >= 0) bins[static_cast<std::size_t>(bin_of[i])].values.push_back(series[i].second);

  std::vector<LogBinStats> out;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const auto& vals = bins[b].values;
    if (vals.empty()) continue;
    LogBinStats stats;
    stats.centre = std::pow(beta, static_cast<double>(b) + 0.5);
    stats.count = static_cast<long>(vals.size());
    stats.mean = sample_mean(vals);
    stats.stddev = vals.size() >= 2 ? std::sqrt(sample_variance(vals)) : 0.0;
    stats.k_lo = static_cast<long>(std::ceil(std::pow(beta, static_cast<double>(b))));
    stats.k_hi = static_cast<long>(std::ceil(std::pow(beta, static_cast<double>(b) + 1.0)));
    out.push_back(stats);
  }
  return out;
}

}  // namespace stochquad
