#include "stochquad/drm.hpp"

#include <cmath>
#include <stdexcept>

namespace stochquad {

namespace detail {

namespace {
// Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 2> kG2Nodes = {-0.5773502691896257645091488, 0.5773502691896257645091488};
constexpr std::array<double, 2> kG2Weights = {1.0, 1.0};
constexpr std::array<double, 5> kG5Nodes = {-0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
                                            0.5384693101056830910363144, 0.9061798459386639927976269};
constexpr std::array<double, 5> kG5Weights = {0.2369268850561890875142640, 0.4786286704993664680412915,
                                              0.5688888888888888888888889, 0.4786286704993664680412915,
                                              0.2369268850561890875142640};
}  // namespace

std::span<const double> gauss_nodes(int pts) {
  if (pts == 2) return kG2Nodes;
  if (pts == 5) return kG5Nodes;
  throw std::invalid_argument("composite_gauss: points per axis must be 2 or 5");
}

std::span<const double> gauss_weights(int pts) {
  if (pts == 2) return kG2Weights;
  return kG5Weights;
}

}  // namespace detail

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

int loss_min_cells(int dim) { return dim == 1 ? 200 : (dim == 2 ? 40 : 13); }
int h1_cells(int dim) { return dim == 1 ? 500 : (dim == 2 ? 50 : 20); }

}  // namespace

double exact_solution(const ProblemSpec& spec, const Vec& x) {
  double g = -1.0 / 16.0;
  double s = 1.0;
  for (int i = 0; i < spec.dim; ++i) {
    const double dxi = x[i] - spec.centre[i];
    g += dxi * dxi;
    s *= std::sin(kPi * x[i]);
  }
  return 10.0 * g * s;
}

Vec exact_gradient(const ProblemSpec& spec, const Vec& x) {
  const int d = spec.dim;
  double g = -1.0 / 16.0;
  std::array<double, 3> sin_i{}, cos_i{};
  double s = 1.0;
  for (int i = 0; i < d; ++i) {
    const double dxi = x[i] - spec.centre[i];
    g += dxi * dxi;
    sin_i[static_cast<std::size_t>(i)] = std::sin(kPi * x[i]);
    cos_i[static_cast<std::size_t>(i)] = std::cos(kPi * x[i]);
    s *= sin_i[static_cast<std::size_t>(i)];
  }
  Vec grad(d);
  for (int i = 0; i < d; ++i) {
    double s_others = 1.0;
    for (int j = 0; j < d; ++j)
      if (j != i) s_others *= sin_i[static_cast<std::size_t>(j)];
    grad[i] = 10.0 * (2.0 * (x[i] - spec.centre[i]) * s +
                      g * kPi * cos_i[static_cast<std::size_t>(i)] * s_others);
  }
  return grad;
}

double forcing(const ProblemSpec& spec, const Vec& x) {
  // f = Laplacian(u*) with u* = 10 g s, g = |x-x0|^2 - 1/16, s = prod sin(pi x_i).
  const int d = spec.dim;
  double g = -1.0 / 16.0;
  std::array<double, 3> sin_i{}, cos_i{};
  double s = 1.0;
  for (int i = 0; i < d; ++i) {
    const double dxi = x[i] - spec.centre[i];
    g += dxi * dxi;
    sin_i[static_cast<std::size_t>(i)] = std::sin(kPi * x[i]);
    cos_i[static_cast<std::size_t>(i)] = std::cos(kPi * x[i]);
    s *= sin_i[static_cast<std::size_t>(i)];
  }
  double lap = 2.0 * d * s - d * kPi * kPi * g * s;
  for (int i = 0; i < d; ++i) {
    double s_others = 1.0;
    for (int j = 0; j < d; ++j)
      if (j != i) s_others *= sin_i[static_cast<std::size_t>(j)];
    lap += 4.0 * kPi * (x[i] - spec.centre[i]) * cos_i[static_cast<std::size_t>(i)] * s_others;
  }
  return 10.0 * lap;
}

double loss_density_at_exact(const ProblemSpec& spec, const Vec& x) {
  const Vec grad = exact_gradient(spec, x);
  return 0.5 * norm2(grad) + forcing(spec, x) * exact_solution(spec, x);
}

ProblemSpec make_problem(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("make_problem: dimension must be 1..3");
  ProblemSpec spec;
  spec.dim = dim;
  spec.centre = Vec(dim);
  for (int i = 0; i < dim; ++i) spec.centre[i] = 0.5;
  spec.exact_loss_min = -0.5 * composite_gauss(dim, loss_min_cells(dim), 5, [&spec](const Vec& x) {
    return norm2(exact_gradient(spec, x));
  });
  return spec;
}

double exact_loss_minimum(const ProblemSpec& spec) { return spec.exact_loss_min; }

ScheduleValues schedule(long k, long k_max, double gamma0, double gamma_f) {
  if (k_max < 4) throw std::invalid_argument("schedule: k_max must be >= 4");
  if (k < 0 || k > k_max) throw std::invalid_argument("schedule: k out of range [0, k_max]");
  const double root = std::sqrt(static_cast<double>(k_max));
  const double ratio = gamma_f / gamma0;
  ScheduleValues s;
  if (static_cast<double>(k) < root) {
    s.gamma = gamma0;
  } else {
    const double b = (-ratio * static_cast<double>(k_max) + root) / (-1.0 + ratio);
    const double c = gamma0 * ((root - static_cast<double>(k_max)) * ratio / (-1.0 + ratio));
    s.gamma = c / (b + static_cast<double>(k));
  }
  s.beta1 = 1.0 - 0.9 * s.gamma / gamma0;
  s.beta2 = 1.0 - 0.1 * s.gamma / gamma0;
  return s;
}

OptimiserState OptimiserState::zeros(std::size_t parameter_count) {
  OptimiserState s;
  s.m.assign(parameter_count, 0.0);
  s.v.assign(parameter_count, 0.0);
  return s;
}

void adam_step(OptimiserState& state, std::vector<double>& theta, std::span<const double> grad,
               const ScheduleValues& sched, double epsilon) {
  if (grad.size() != theta.size() || state.m.size() != theta.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient component");
  const double b1 = sched.beta1, b2 = sched.beta2;
  state.r1 = b1 * state.r1 + (1.0 - b1);
  state.r2 = b2 * state.r2 + (1.0 - b2);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double m_hat = state.m[i] / state.r1;
    const double v_hat = state.v[i] / state.r2;
    theta[i] -= sched.gamma * m_hat / (epsilon + std::sqrt(v_hat));
  }
  ++state.k;
}

FieldFn exact_solution_field(const ProblemSpec& spec) {
  return [spec](const Vec& x) {
    PointEvaluation e;
    e.u = exact_solution(spec, x);
    e.grad = exact_gradient(spec, x);
    return e;
  };
}

FieldFn network_field(const NetworkParameters& params) {
  return [params](const Vec& x) { return evaluate(params, x); };
}

double h1_relative_error(const ProblemSpec& spec, const FieldFn& field) {
  const int cells = h1_cells(spec.dim);
  const double num = composite_gauss(spec.dim, cells, 2, [&](const Vec& x) {
    const Vec diff = field(x).grad - exact_gradient(spec, x);
    return norm2(diff);
  });
  const double den = composite_gauss(spec.dim, cells, 2, [&](const Vec& x) {
    return norm2(exact_gradient(spec, x));
  });
  return 100.0 * std::sqrt(num / den);
}

double h1_relative_error(const ProblemSpec& spec, const NetworkParameters& params) {
  detail::NetWorkspace ws;
  const int cells = h1_cells(spec.dim);
  const int d = spec.dim;
  const double num = composite_gauss(d, cells, 2, [&](const Vec& x) {
    double u_tilde = 0.0;
    Vec grad_u_tilde(d);
    detail::forward_pass(params, x, ws, u_tilde, grad_u_tilde);
    double phi = 0.0;
    Vec grad_phi(d);
    detail::cutoff_eval(d, x, phi, grad_phi);
    const Vec grad_u = phi * grad_u_tilde + u_tilde * grad_phi;
    return norm2(grad_u - exact_gradient(spec, x));
  });
  const double den = composite_gauss(d, cells, 2, [&](const Vec& x) {
    return norm2(exact_gradient(spec, x));
  });
  return 100.0 * std::sqrt(num / den);
}

double continuum_loss(const ProblemSpec& spec, const FieldFn& field) {
  return composite_gauss(spec.dim, loss_min_cells(spec.dim), 5, [&](const Vec& x) {
    const PointEvaluation e = field(x);
    return 0.5 * norm2(e.grad) + forcing(spec, x) * e.u;
  });
}

TrainingTrace train(const TrainConfig& config) {
  const ProblemSpec spec = make_problem(config.dim);
  RandomStream master(config.seed);
  RandomStream init_rng = master.substream(1);
  RandomStream quad_rng = master.substream(2);

  TrainingTrace trace;
  trace.config = config;
  NetworkParameters params = init_parameters(config.dim, init_rng);

  // Quadrature setup: fixed midpoint grid, raw Monte Carlo points, or a
  // mesh-based rule drawing fresh global samples each iteration.
  RuleDescriptor rule{};
  Mesh mesh;
  P2Database database;
  SamplerOptions sampler;
  std::vector<Vec> fixed_nodes;
  std::vector<double> fixed_weights;
  if (config.deterministic) {
    const int m = config.det_points_per_axis;
    long total = 1;
    for (int i = 0; i < config.dim; ++i) total *= m;
    for (long t = 0; t < total; ++t) {
      long rem = t;
      Vec x(config.dim);
      for (int i = 0; i < config.dim; ++i) {
        x[i] = (static_cast<double>(rem % m) + 0.5) / m;
        rem /= m;
      }
      fixed_nodes.push_back(x);
      fixed_weights.push_back(1.0 / static_cast<double>(total));
    }
    trace.points_per_iteration = total;
  } else if (config.rule == RuleId::MC) {
    trace.points_per_iteration = config.mc_points;
  } else {
    rule = make_rule(config.rule, config.dim);
    mesh = rule_mesh(rule, config.mesh_n);
    sampler.p2_mode = config.p2_mode;
    if (config.p2_mode == P2SamplingMode::Database &&
        (config.rule == RuleId::P2Tri || config.rule == RuleId::P2Tet)) {
      RandomStream db_rng = master.substream(3);
      database = build_p2_database(rule, config.p2_database_size, db_rng);
      sampler.database = &database;
    }
    trace.points_per_iteration =
        static_cast<long>(mesh.elements.size()) * rule.points_per_element;
  }

  OptimiserState state = OptimiserState::zeros(params.theta.size());
  auto f = [&spec](const Vec& x) { return forcing(spec, x); };

  GlobalSample draw;
  for (long k = 0; k < config.k_max; ++k) {
    const std::span<const Vec> nodes = [&]() -> std::span<const Vec> {
      if (config.deterministic) return fixed_nodes;
      if (config.rule == RuleId::MC) {
        draw.nodes.assign(static_cast<std::size_t>(config.mc_points), Vec(config.dim));
        draw.weights.assign(static_cast<std::size_t>(config.mc_points),
                            1.0 / static_cast<double>(config.mc_points));
        for (auto& x : draw.nodes)
          for (int i = 0; i < config.dim; ++i) x[i] = quad_rng.uniform();
        return draw.nodes;
      }
      draw = draw_global_sample(rule, mesh, quad_rng, sampler);
      return draw.nodes;
    }();
    const std::span<const double> weights =
        config.deterministic ? std::span<const double>(fixed_weights) : std::span<const double>(draw.weights);

    TraceRecord record;
    record.k = k;
    const ScheduleValues sched = schedule(k, config.k_max, config.gamma0, config.gamma_f);
    record.gamma = sched.gamma;
    try {
      const LossGrad lg = grad_wrt_parameters(params, nodes, weights, f);
      record.loss = lg.loss;
      if (!std::isfinite(lg.loss) || std::abs(lg.loss) > config.divergence_guard) {
        trace.diverged = true;
        trace.abort_reason = "loss magnitude exceeded divergence guard";
        trace.records.push_back(record);
        break;
      }
      if (config.eval_stride > 0 && k % config.eval_stride == 0) {
        record.h1_pct = h1_relative_error(spec, params);
        record.has_h1 = true;
      }
      adam_step(state, params.theta, lg.grad, sched, config.epsilon);
    } catch (const NumericError& err) {
      trace.diverged = true;
      trace.abort_reason = err.what();
      trace.records.push_back(record);
      break;
    }
    trace.records.push_back(record);
  }

  trace.final_h1_pct = h1_relative_error(spec, params);
  trace.final_params = std::move(params);
  return trace;
}

}  // namespace stochquad
