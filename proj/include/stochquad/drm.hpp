#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stochquad/network.hpp"
#include "stochquad/quadrature.hpp"

namespace stochquad {

/// Manufactured Poisson problem on [0,1]^d with homogeneous Dirichlet data:
/// u*(x) = 10 (|x - x0|^2 - 1/16) prod sin(pi x_i), f = Laplacian(u*).
struct ProblemSpec {
  int dim = 1;
  Vec centre;                  // all coordinates 1/2
  double exact_loss_min = 0.0; // -1/2 ||grad u*||^2, cached at construction
};

ProblemSpec make_problem(int dim);

double exact_solution(const ProblemSpec& spec, const Vec& x);
Vec exact_gradient(const ProblemSpec& spec, const Vec& x);
double forcing(const ProblemSpec& spec, const Vec& x);

/// Ritz loss density evaluated at the exact solution,
/// |grad u*|^2 / 2 + f u*; the fixed integrand of the variance studies.
double loss_density_at_exact(const ProblemSpec& spec, const Vec& x);

double exact_loss_minimum(const ProblemSpec& spec);

/// Composite tensor Gauss-Legendre quadrature over [0,1]^d with `cells` cells
/// per axis and 2 or 5 points per axis per cell.
template <typename F>
double composite_gauss(int dim, int cells, int pts_per_axis, F&& f);

/// Learning-rate and moment-decay schedule: gamma stays at gamma0 for
/// k < sqrt(k_max), then follows c/(b+k) with the constants pinned by
/// gamma(sqrt(k_max)) = gamma0 and gamma(k_max) = gamma_f.
struct ScheduleValues {
  double gamma = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

ScheduleValues schedule(long k, long k_max, double gamma0 = 1e-2, double gamma_f = 1e-4);

/// First/second moment accumulators with running bias corrections.
struct OptimiserState {
  std::vector<double> m;
  std::vector<double> v;
  double r1 = 0.0;
  double r2 = 0.0;
  long k = 0;

  static OptimiserState zeros(std::size_t parameter_count);
};

/// One componentwise update step; throws NumericError on non-finite gradient
/// components, leaving state and parameters untouched.
void adam_step(OptimiserState& state, std::vector<double>& theta, std::span<const double> grad,
               const ScheduleValues& sched, double epsilon = 1e-2);

using FieldFn = std::function<PointEvaluation(const Vec&)>;

/// H1-seminorm relative error in percent, on fixed deterministic grids
/// (two-point Gauss on 500 / 50^2 / 20^3 cells).
double h1_relative_error(const ProblemSpec& spec, const FieldFn& field);
double h1_relative_error(const ProblemSpec& spec, const NetworkParameters& params);

/// Continuum Ritz loss of an arbitrary field by fine deterministic quadrature.
double continuum_loss(const ProblemSpec& spec, const FieldFn& field);

FieldFn exact_solution_field(const ProblemSpec& spec);
FieldFn network_field(const NetworkParameters& params);

struct TrainConfig {
  int dim = 1;
  RuleId rule = RuleId::P1;
  int mesh_n = 32;      // cells per axis for mesh rules
  long mc_points = 32;  // for rule == MC
  long k_max = 20000;
  std::uint64_t seed = 1;
  int eval_stride = 10;
  bool deterministic = false;  // fixed midpoint nodes instead of stochastic draws
  int det_points_per_axis = 20;
  double gamma0 = 1e-2;
  double gamma_f = 1e-4;
  double epsilon = 1e-2;
  double divergence_guard = 1e6;
  P2SamplingMode p2_mode = P2SamplingMode::Rejection;
  int p2_database_size = 10000;
};

struct TraceRecord {
  long k = 0;
  double loss = 0.0;
  double gamma = 0.0;
  double h1_pct = 0.0;
  bool has_h1 = false;
};

struct TrainingTrace {
  TrainConfig config;
  std::vector<TraceRecord> records;
  bool diverged = false;
  std::string abort_reason;
  double final_h1_pct = 0.0;
  long points_per_iteration = 0;
  NetworkParameters final_params;
};

/// Full training loop; fully reproducible from config.seed. On numeric
/// divergence the trace collected so far is returned with `diverged` set.
TrainingTrace train(const TrainConfig& config);

namespace detail {
std::span<const double> gauss_nodes(int pts);
std::span<const double> gauss_weights(int pts);
}  // namespace detail

template <typename F>
double composite_gauss(int dim, int cells, int pts_per_axis, F&& f) {
  const auto nodes = detail::gauss_nodes(pts_per_axis);
  const auto weights = detail::gauss_weights(pts_per_axis);
  const double h = 1.0 / cells;
  const int p = pts_per_axis;
  const long axis_points = static_cast<long>(cells) * p;
  auto axis_node = [&](long idx, double& x, double& w) {
    const long cell = idx / p;
    const long q = idx % p;
    x = (cell + 0.5 * (1.0 + nodes[static_cast<std::size_t>(q)])) * h;
    w = 0.5 * h * weights[static_cast<std::size_t>(q)];
  };
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= axis_points;
  std::vector<double> terms(static_cast<std::size_t>(total));
  for (long t = 0; t < total; ++t) {
    long rem = t;
    Vec x(dim);
    double w = 1.0;
    for (int i = 0; i < dim; ++i) {
      const long idx = rem % axis_points;
      rem /= axis_points;
      double xi, wi;
      axis_node(idx, xi, wi);
      x[i] = xi;
      w *= wi;
    }
    terms[static_cast<std::size_t>(t)] = w * f(x);
  }
  return pairwise_sum(terms);
}

}  // namespace stochquad
