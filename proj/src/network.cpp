#include "stochquad/network.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace stochquad {

long MlpShape::parameter_count() const {
  long count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    count += static_cast<long>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  return count;
}

MlpShape drm_shape(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("drm_shape: dimension must be 1..3");
  return MlpShape{{dim, 30, 30, 30, 1}};
}

double cutoff_constant(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("cutoff_constant: dimension must be 1..3");
  // |grad prod x_i(1-x_i)|^2 integrates to d * (1/3) * (1/30)^(d-1):
  // int (1-2x)^2 dx = 1/3 and int x^2 (1-x)^2 dx = 1/30.
  const double norm_sq = dim * (1.0 / 3.0) * std::pow(1.0 / 30.0, dim - 1);
  return 1.0 / std::sqrt(norm_sq);
}

NetworkParameters init_parameters(const MlpShape& shape, RandomStream& rng) {
  NetworkParameters p;
  p.shape = shape;
  p.theta.assign(static_cast<std::size_t>(shape.parameter_count()), 0.0);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < shape.sizes.size(); ++l) {
    const int fan_in = shape.sizes[l];
    const int fan_out = shape.sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i) p.theta[offset++] = rng.uniform(-bound, bound);
    offset += static_cast<std::size_t>(fan_out);  // biases stay zero
  }
  return p;
}

NetworkParameters init_parameters(int dim, RandomStream& rng) { return init_parameters(drm_shape(dim), rng); }

namespace detail {

void cutoff_eval(int dim, const Vec& x, double& phi, Vec& grad_phi) {
  const double c = cutoff_constant(dim);
  double prod = c;
  std::array<double, 3> factor{};
  for (int i = 0; i < dim; ++i) {
    factor[static_cast<std::size_t>(i)] = x[i] * (1.0 - x[i]);
    prod *= factor[static_cast<std::size_t>(i)];
  }
  phi = prod;
  grad_phi = Vec(dim);
  for (int i = 0; i < dim; ++i) {
    double g = c * (1.0 - 2.0 * x[i]);
    for (int j = 0; j < dim; ++j)
      if (j != i) g *= factor[static_cast<std::size_t>(j)];
    grad_phi[i] = g;
  }
}

namespace {

void ensure_workspace(const MlpShape& shape, NetWorkspace& ws) {
  const std::size_t layers = shape.sizes.size();
  const int d = shape.dim();
  if (ws.z.size() == layers && ws.z.front().size() == static_cast<std::size_t>(shape.sizes.front())) return;
  ws.z.assign(layers, {});
  ws.jac.assign(layers, {});
  ws.pre_j.assign(layers, {});
  int max_width = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    ws.z[l].assign(static_cast<std::size_t>(shape.sizes[l]), 0.0);
    ws.jac[l].assign(static_cast<std::size_t>(shape.sizes[l] * d), 0.0);
    ws.pre_j[l].assign(static_cast<std::size_t>(shape.sizes[l] * d), 0.0);
    max_width = std::max(max_width, shape.sizes[l]);
  }
  ws.z_bar.assign(static_cast<std::size_t>(max_width), 0.0);
  ws.j_bar.assign(static_cast<std::size_t>(max_width * d), 0.0);
  ws.a_bar.assign(static_cast<std::size_t>(max_width), 0.0);
  ws.m_bar.assign(static_cast<std::size_t>(max_width * d), 0.0);
  ws.z_bar_next.assign(static_cast<std::size_t>(max_width), 0.0);
  ws.j_bar_next.assign(static_cast<std::size_t>(max_width * d), 0.0);
}

}  // namespace

void forward_pass(const NetworkParameters& params, const Vec& x, NetWorkspace& ws, double& u_tilde,
                  Vec& grad_u_tilde) {
  const MlpShape& shape = params.shape;
  const int d = shape.dim();
  const int layers = shape.layer_count();
  ensure_workspace(shape, ws);

  for (int i = 0; i < d; ++i) {
    ws.z[0][static_cast<std::size_t>(i)] = x[i];
    for (int c = 0; c < d; ++c) ws.jac[0][static_cast<std::size_t>(i * d + c)] = i == c ? 1.0 : 0.0;
  }

  std::size_t offset = 0;
  for (int l = 0; l < layers; ++l) {
    const int in = shape.sizes[static_cast<std::size_t>(l)];
    const int out = shape.sizes[static_cast<std::size_t>(l) + 1];
    const double* w = params.theta.data() + offset;
    const double* b = w + static_cast<std::size_t>(out) * in;
    const auto& z_prev = ws.z[static_cast<std::size_t>(l)];
    const auto& j_prev = ws.jac[static_cast<std::size_t>(l)];
    auto& z_next = ws.z[static_cast<std::size_t>(l) + 1];
    auto& j_next = ws.jac[static_cast<std::size_t>(l) + 1];
    auto& m_next = ws.pre_j[static_cast<std::size_t>(l) + 1];
    const bool last = l == layers - 1;
    for (int i = 0; i < out; ++i) {
      const double* wi = w + static_cast<std::size_t>(i) * in;
      double a = b[i];
      for (int k = 0; k < in; ++k) a += wi[k] * z_prev[static_cast<std::size_t>(k)];
      for (int c = 0; c < d; ++c) {
        double m = 0.0;
        for (int k = 0; k < in; ++k) m += wi[k] * j_prev[static_cast<std::size_t>(k * d + c)];
        m_next[static_cast<std::size_t>(i * d + c)] = m;
      }
      if (last) {
        z_next[static_cast<std::size_t>(i)] = a;
        for (int c = 0; c < d; ++c)
          j_next[static_cast<std::size_t>(i * d + c)] = m_next[static_cast<std::size_t>(i * d + c)];
      } else {
        const double t = std::tanh(a);
        z_next[static_cast<std::size_t>(i)] = t;
        const double dt = 1.0 - t * t;
        for (int c = 0; c < d; ++c)
          j_next[static_cast<std::size_t>(i * d + c)] = dt * m_next[static_cast<std::size_t>(i * d + c)];
      }
    }
    offset += static_cast<std::size_t>(out) * in + static_cast<std::size_t>(out);
  }

  u_tilde = ws.z.back()[0];
  grad_u_tilde = Vec(d);
  for (int c = 0; c < d; ++c) grad_u_tilde[c] = ws.jac.back()[static_cast<std::size_t>(c)];
}

void accumulate_node_gradient(const NetworkParameters& params, const Vec& /*x*/, NetWorkspace& ws,
                              double u_tilde_adj, const Vec& grad_u_tilde_adj, std::span<double> grad_out) {
  const MlpShape& shape = params.shape;
  const int d = shape.dim();
  const int layers = shape.layer_count();

  // Seed the adjoints of the output layer's value and tangent channels.
  ws.z_bar[0] = u_tilde_adj;
  for (int c = 0; c < d; ++c) ws.j_bar[static_cast<std::size_t>(c)] = grad_u_tilde_adj[c];

  // Walk layers in reverse; parameter block offsets are recomputed per layer.
  std::vector<std::size_t> offsets(static_cast<std::size_t>(layers));
  std::size_t offset = 0;
  for (int l = 0; l < layers; ++l) {
    offsets[static_cast<std::size_t>(l)] = offset;
    offset += static_cast<std::size_t>(shape.sizes[static_cast<std::size_t>(l) + 1]) *
                  shape.sizes[static_cast<std::size_t>(l)] +
              static_cast<std::size_t>(shape.sizes[static_cast<std::size_t>(l) + 1]);
  }

  for (int l = layers - 1; l >= 0; --l) {
    const int in = shape.sizes[static_cast<std::size_t>(l)];
    const int out = shape.sizes[static_cast<std::size_t>(l) + 1];
    const double* w = params.theta.data() + offsets[static_cast<std::size_t>(l)];
    double* gw = grad_out.data() + offsets[static_cast<std::size_t>(l)];
    double* gb = gw + static_cast<std::size_t>(out) * in;
    const auto& z_prev = ws.z[static_cast<std::size_t>(l)];
    const auto& j_prev = ws.jac[static_cast<std::size_t>(l)];
    const auto& z_here = ws.z[static_cast<std::size_t>(l) + 1];
    const auto& m_here = ws.pre_j[static_cast<std::size_t>(l) + 1];
    const bool last = l == layers - 1;

    // Adjoints of pre-activation value (a) and tangent (m) channels.
    for (int i = 0; i < out; ++i) {
      double a_bar;
      if (last) {
        a_bar = ws.z_bar[static_cast<std::size_t>(i)];
        for (int c = 0; c < d; ++c)
          ws.m_bar[static_cast<std::size_t>(i * d + c)] = ws.j_bar[static_cast<std::size_t>(i * d + c)];
      } else {
        const double t = z_here[static_cast<std::size_t>(i)];
        const double dt = 1.0 - t * t;   // tanh'
        const double ddt = -2.0 * t * dt;  // tanh''
        a_bar = ws.z_bar[static_cast<std::size_t>(i)] * dt;
        for (int c = 0; c < d; ++c) {
          const double jb = ws.j_bar[static_cast<std::size_t>(i * d + c)];
          a_bar += jb * ddt * m_here[static_cast<std::size_t>(i * d + c)];
          ws.m_bar[static_cast<std::size_t>(i * d + c)] = jb * dt;
        }
      }
      ws.a_bar[static_cast<std::size_t>(i)] = a_bar;
    }

    // Parameter gradients and the propagated adjoints of the previous layer.
    for (int k = 0; k < in; ++k) {
      ws.z_bar_next[static_cast<std::size_t>(k)] = 0.0;
      for (int c = 0; c < d; ++c) ws.j_bar_next[static_cast<std::size_t>(k * d + c)] = 0.0;
    }
    for (int i = 0; i < out; ++i) {
      const double a_bar = ws.a_bar[static_cast<std::size_t>(i)];
      const double* wi = w + static_cast<std::size_t>(i) * in;
      double* gwi = gw + static_cast<std::size_t>(i) * in;
      gb[i] += a_bar;
      for (int k = 0; k < in; ++k) {
        double g = a_bar * z_prev[static_cast<std::size_t>(k)];
        double zb = wi[k] * a_bar;
        for (int c = 0; c < d; ++c) {
          const double mb = ws.m_bar[static_cast<std::size_t>(i * d + c)];
          g += mb * j_prev[static_cast<std::size_t>(k * d + c)];
          ws.j_bar_next[static_cast<std::size_t>(k * d + c)] += wi[k] * mb;
        }
        gwi[k] += g;
        ws.z_bar_next[static_cast<std::size_t>(k)] += zb;
      }
    }
    if (l > 0) {
      for (int k = 0; k < in; ++k) {
        ws.z_bar[static_cast<std::size_t>(k)] = ws.z_bar_next[static_cast<std::size_t>(k)];
        for (int c = 0; c < d; ++c)
          ws.j_bar[static_cast<std::size_t>(k * d + c)] = ws.j_bar_next[static_cast<std::size_t>(k * d + c)];
      }
    }
  }
}

}  // namespace detail

PointEvaluation evaluate(const NetworkParameters& params, const Vec& x) {
  detail::NetWorkspace ws;
  double u_tilde = 0.0;
  Vec grad_u_tilde(params.dim());
  detail::forward_pass(params, x, ws, u_tilde, grad_u_tilde);
  double phi = 0.0;
  Vec grad_phi(params.dim());
  detail::cutoff_eval(params.dim(), x, phi, grad_phi);
  PointEvaluation out;
  out.u = u_tilde * phi;
  out.grad = phi * grad_u_tilde + u_tilde * grad_phi;
  return out;
}

std::string parameters_to_json(const NetworkParameters& params) {
  nlohmann::json j;
  j["d"] = params.dim();
  j["layers"] = params.shape.sizes;
  j["theta"] = params.theta;
  return j.dump();
}

NetworkParameters parameters_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  NetworkParameters p;
  p.shape.sizes = j.at("layers").get<std::vector<int>>();
  p.theta = j.at("theta").get<std::vector<double>>();
  if (j.at("d").get<int>() != p.shape.dim())
    throw std::invalid_argument("parameter file: d does not match layer header");
  if (static_cast<long>(p.theta.size()) != p.shape.parameter_count())
    throw std::invalid_argument("parameter file: theta length does not match shape");
  return p;
}

void save_parameters(const NetworkParameters& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << parameters_to_json(params) << "\n";
}

NetworkParameters load_parameters(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parameters_from_json(text);
}

}  // namespace stochquad
