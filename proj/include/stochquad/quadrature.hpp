#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "stochquad/errors.hpp"
#include "stochquad/geometry.hpp"
#include "stochquad/rng.hpp"
#include "stochquad/summation.hpp"

namespace stochquad {

enum class RuleId { MC, P0, P1, P3, P1B, P1Tri, P2Tri, P1Tet, P2Tet };

/// Identifies a quadrature rule family on its master element.
/// `order` is the polynomial exactness order (-1 sentinel for MC).
struct RuleDescriptor {
  RuleId id;
  int dim;
  int order;
  int points_per_element;
  MasterElement master;
  bool unbiased;
};

/// Validated descriptor for (id, dim); throws std::invalid_argument for
/// unsupported combinations (e.g. p1b outside 1D, triangle rules outside 2D).
RuleDescriptor make_rule(RuleId id, int dim);

const char* rule_id_name(RuleId id);
RuleId rule_id_from_string(const std::string& name);

/// Mesh family a mesh-based rule partitions [0,1]^d with.
MeshFamily rule_mesh_family(const RuleDescriptor& rule);
/// Uniform mesh with matching master for this rule (n cells per axis).
Mesh rule_mesh(const RuleDescriptor& rule, int n);
/// Mesh whose total point count (elements * J) equals n_points, if the family
/// admits one; throws std::invalid_argument otherwise.
Mesh rule_mesh_for_points(const RuleDescriptor& rule, long n_points);

/// One random draw of nodes and weights on the master element.
struct QuadratureSample {
  std::vector<Vec> nodes;
  std::vector<double> weights;

  double weight_sum() const { return pairwise_sum(weights); }
};

enum class P2SamplingMode { Rejection, Database };

/// Pre-sampled point pool for the order-2 simplex rules; built once before
/// training, then drawn from uniformly.
struct P2Database {
  std::vector<Vec> points;
};

struct AcceptanceCounter {
  long long attempts = 0;
  long long accepted = 0;
  double rate() const { return attempts == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempts); }
};

struct SamplerOptions {
  P2SamplingMode p2_mode = P2SamplingMode::Rejection;
  const P2Database* database = nullptr;  // required in Database mode
  int max_rejection_attempts = 10000;
  AcceptanceCounter* acceptance = nullptr;  // optional per-draw attempt accounting
};

/// Draws one sample of the rule on its master element.
QuadratureSample sample_master(const RuleDescriptor& rule, RandomStream& rng, const SamplerOptions& opts = {});

/// Builds a rejection-sampled point pool for P2Tri / P2Tet.
P2Database build_p2_database(const RuleDescriptor& rule, int count, RandomStream& rng,
                             const SamplerOptions& opts = {});

/// The 12 proper rotations of the reference tetrahedron, in the generator-word
/// order {I, R1, R1^2, R2, R1 R2, R2 R1, R1^2 R2, R2 R1^2, R1 R2 R1^2,
/// R1^2 R2 R1, R2 R1 R2, R2 R1^2 R2}.
std::array<Mat, 12> tet_rotation_group();

/// Effective weight density of the biased two-point rule on [-1,1]:
/// W0(x) = 2 + 2|x| ln(|x| / (1+|x|)), extended continuously with W0(0) = 2.
double bias_weight_w0(double x);

namespace detail {
[[noreturn]] void throw_nonfinite(const Vec& where);
}

/// Element quadrature sum_j f(A x_j + y) w_j det(A). Non-finite integrand
/// values raise NumericError with the offending node location.
template <typename F>
double integrate_element(const QuadratureSample& sample, const AffineMap& map, F&& f) {
  std::array<double, 16> buf;
  std::vector<double> heap;
  const std::size_t j_count = sample.nodes.size();
  double* vals = buf.data();
  if (j_count > buf.size()) {
    heap.resize(j_count);
    vals = heap.data();
  }
  for (std::size_t j = 0; j < j_count; ++j) {
    const Vec x = map.apply(sample.nodes[j]);
    const double fx = f(x);
    if (!std::isfinite(fx)) detail::throw_nonfinite(x);
    vals[j] = fx * sample.weights[j] * map.det_a;
  }
  return pairwise_sum(std::span<const double>(vals, j_count));
}

/// Global rule: one independent master sample per element, element sums
/// combined pairwise in element order. Deterministic given the stream state.
template <typename F>
double integrate_global(const RuleDescriptor& rule, const Mesh& mesh, F&& f, RandomStream& rng,
                        const SamplerOptions& opts = {}) {
  if (rule.master.kind != mesh.master.kind)
    throw std::invalid_argument("integrate_global: rule and mesh master elements differ");
  std::vector<double> element_values(mesh.elements.size());
  for (std::size_t n = 0; n < mesh.elements.size(); ++n) {
    const QuadratureSample sample = sample_master(rule, rng, opts);
    element_values[n] = integrate_element(sample, mesh.elements[n], f);
  }
  return pairwise_sum(element_values);
}

/// Vanilla Monte Carlo on [0,1]^d with equal weights 1/N.
template <typename F>
double mc_integrate(F&& f, int dim, long n_points, RandomStream& rng) {
  if (n_points < 1) throw std::invalid_argument("mc_integrate: N must be >= 1");
  std::vector<double> vals(static_cast<std::size_t>(n_points));
  for (long i = 0; i < n_points; ++i) {
    Vec x(dim);
    for (int c = 0; c < dim; ++c) x[c] = rng.uniform();
    const double fx = f(x);
    if (!std::isfinite(fx)) detail::throw_nonfinite(x);
    vals[static_cast<std::size_t>(i)] = fx;
  }
  return pairwise_sum(vals) / static_cast<double>(n_points);
}

/// Flattened global draw (nodes already mapped, weights already scaled by
/// det A); the form consumed by the network loss/gradient evaluation.
struct GlobalSample {
  std::vector<Vec> nodes;
  std::vector<double> weights;
};

GlobalSample draw_global_sample(const RuleDescriptor& rule, const Mesh& mesh, RandomStream& rng,
                                const SamplerOptions& opts = {});

}  // namespace stochquad
