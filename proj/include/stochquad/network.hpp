#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochquad/errors.hpp"
#include "stochquad/geometry.hpp"
#include "stochquad/rng.hpp"
#include "stochquad/summation.hpp"

namespace stochquad {

/// Fully-connected tanh network shape; first entry is the spatial dimension,
/// last is 1 (scalar output).
struct MlpShape {
  std::vector<int> sizes;

  int dim() const { return sizes.front(); }
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }
  long parameter_count() const;
};

/// The trial-space architecture: d -> 30 -> 30 -> 30 -> 1.
MlpShape drm_shape(int dim);

/// Scaling constant making the gradient L2-norm of c_d * prod x_i (1 - x_i)
/// over [0,1]^d equal to one.
double cutoff_constant(int dim);

/// Trainable parameters, stored flat: (W, b) per layer, weights row-major.
/// The realised function is u(x) = mlp(x) * cutoff(x), which vanishes on the
/// boundary of [0,1]^d.
struct NetworkParameters {
  MlpShape shape;
  std::vector<double> theta;

  int dim() const { return shape.dim(); }
  long parameter_count() const { return static_cast<long>(theta.size()); }
};

/// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
NetworkParameters init_parameters(const MlpShape& shape, RandomStream& rng);
NetworkParameters init_parameters(int dim, RandomStream& rng);

struct PointEvaluation {
  double u = 0.0;
  Vec grad;  // spatial gradient
};

/// Forward evaluation of u and its spatial gradient at x in [0,1]^d.
PointEvaluation evaluate(const NetworkParameters& params, const Vec& x);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Quadrature-discretised Ritz loss L = sum_j (|grad u|^2 / 2 + f u)(x_j) w_j
/// and its exact parameter gradient, by reverse accumulation through the
/// value and spatial-tangent channels of every node.
template <typename F>
LossGrad grad_wrt_parameters(const NetworkParameters& params, std::span<const Vec> nodes,
                             std::span<const double> weights, F&& forcing);

/// JSON round trip with a shape header; used to resume runs and to feed the
/// covariance study.
void save_parameters(const NetworkParameters& params, const std::string& path);
NetworkParameters load_parameters(const std::string& path);
std::string parameters_to_json(const NetworkParameters& params);
NetworkParameters parameters_from_json(const std::string& text);

namespace detail {

/// Scratch space for one forward/reverse pass; reused across nodes.
struct NetWorkspace {
  std::vector<std::vector<double>> z;       // activations per layer
  std::vector<std::vector<double>> jac;     // spatial tangents per layer, (width x d) row-major
  std::vector<std::vector<double>> pre_j;   // pre-activation tangents per hidden layer
  std::vector<double> z_bar, j_bar, a_bar, m_bar, z_bar_next, j_bar_next;
};

void forward_pass(const NetworkParameters& params, const Vec& x, NetWorkspace& ws, double& u_tilde,
                  Vec& grad_u_tilde);
void accumulate_node_gradient(const NetworkParameters& params, const Vec& x, NetWorkspace& ws,
                              double u_tilde_adj, const Vec& grad_u_tilde_adj, std::span<double> grad_out);
void cutoff_eval(int dim, const Vec& x, double& phi, Vec& grad_phi);

}  // namespace detail

template <typename F>
LossGrad grad_wrt_parameters(const NetworkParameters& params, std::span<const Vec> nodes,
                             std::span<const double> weights, F&& forcing) {
  if (nodes.size() != weights.size() || nodes.empty())
    throw std::invalid_argument("grad_wrt_parameters: nodes/weights must be nonempty and equal length");
  LossGrad out;
  out.grad.assign(params.theta.size(), 0.0);
  std::vector<double> terms(nodes.size());
  detail::NetWorkspace ws;
  const int d = params.dim();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const Vec& x = nodes[j];
    const double w = weights[j];
    double u_tilde = 0.0;
    Vec grad_u_tilde(d);
    detail::forward_pass(params, x, ws, u_tilde, grad_u_tilde);
    double phi = 0.0;
    Vec grad_phi(d);
    detail::cutoff_eval(d, x, phi, grad_phi);
    const double u = u_tilde * phi;
    Vec grad_u = phi * grad_u_tilde + u_tilde * grad_phi;
    const double f = forcing(x);
    terms[j] = (0.5 * norm2(grad_u) + f * u) * w;
    // d(term)/du = f w;  d(term)/d(grad u) = w grad u.
    const double u_adj = f * w;
    const Vec grad_u_adj = w * grad_u;
    const double u_tilde_adj = u_adj * phi + dot(grad_u_adj, grad_phi);
    const Vec grad_u_tilde_adj = phi * grad_u_adj;
    detail::accumulate_node_gradient(params, x, ws, u_tilde_adj, grad_u_tilde_adj, out.grad);
  }
  out.loss = pairwise_sum(terms);
  if (!std::isfinite(out.loss)) throw NumericError("grad_wrt_parameters: non-finite loss");
  return out;
}

}  // namespace stochquad
