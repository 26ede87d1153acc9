#include "stochquad/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace stochquad {

namespace detail {

[[noreturn]] void throw_nonfinite(const Vec& where) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "non-finite integrand value at node (%.17g, %.17g, %.17g)", where[0],
                where[1], where[2]);
  throw NumericError(buf);
}

}  // namespace detail

const char* rule_id_name(RuleId id) {
  switch (id) {
    case RuleId::MC:
      return "mc";
    case RuleId::P0:
      return "p0";
    case RuleId::P1:
      return "p1";
    case RuleId::P3:
      return "p3";
    case RuleId::P1B:
      return "p1b";
    case RuleId::P1Tri:
      return "p1tri";
    case RuleId::P2Tri:
      return "p2tri";
    case RuleId::P1Tet:
      return "p1tet";
    case RuleId::P2Tet:
      return "p2tet";
  }
  return "?";
}

RuleId rule_id_from_string(const std::string& name) {
  for (RuleId id : {RuleId::MC, RuleId::P0, RuleId::P1, RuleId::P3, RuleId::P1B, RuleId::P1Tri,
                    RuleId::P2Tri, RuleId::P1Tet, RuleId::P2Tet})
    if (name == rule_id_name(id)) return id;
  throw std::invalid_argument("unknown rule id: " + name);
}

namespace {

MasterKind box_master(int dim, bool unit) {
  switch (dim) {
    case 1:
      return unit ? MasterKind::Interval01 : MasterKind::Interval11;
    case 2:
      return unit ? MasterKind::UnitSquare : MasterKind::Square;
    case 3:
      return unit ? MasterKind::UnitCube : MasterKind::Cube;
    default:
      throw std::invalid_argument("dimension must be 1..3");
  }
}

}  // namespace

RuleDescriptor make_rule(RuleId id, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("make_rule: dimension must be 1..3");
  RuleDescriptor r;
  r.id = id;
  r.dim = dim;
  r.unbiased = true;
  switch (id) {
    case RuleId::MC:
      r.order = -1;
      r.points_per_element = 1;
      r.master = MasterElement::make(box_master(dim, true));
      break;
    case RuleId::P0:
      r.order = 0;
      r.points_per_element = 1;
      r.master = MasterElement::make(box_master(dim, true));
      break;
    case RuleId::P1:
      r.order = 1;
      r.points_per_element = 2;
      r.master = MasterElement::make(box_master(dim, false));
      break;
    case RuleId::P3:
      r.order = 3;
      r.points_per_element = dim == 1 ? 3 : (dim == 2 ? 5 : 15);
      r.master = MasterElement::make(box_master(dim, false));
      break;
    case RuleId::P1B:
      if (dim != 1) throw std::invalid_argument("p1b is defined on [-1,1] only");
      r.order = 1;
      r.points_per_element = 2;
      r.master = MasterElement::make(MasterKind::Interval11);
      r.unbiased = false;
      break;
    case RuleId::P1Tri:
    case RuleId::P2Tri:
      if (dim != 2) throw std::invalid_argument("triangle rules are 2D");
      r.order = id == RuleId::P1Tri ? 1 : 2;
      r.points_per_element = id == RuleId::P1Tri ? 3 : 4;
      r.master = MasterElement::make(MasterKind::RefTriangle);
      break;
    case RuleId::P1Tet:
    case RuleId::P2Tet:
      if (dim != 3) throw std::invalid_argument("tetrahedron rules are 3D");
      r.order = id == RuleId::P1Tet ? 1 : 2;
      r.points_per_element = id == RuleId::P1Tet ? 4 : 13;
      r.master = MasterElement::make(MasterKind::RefTetrahedron);
      break;
  }
  return r;
}

MeshFamily rule_mesh_family(const RuleDescriptor& rule) {
  switch (rule.master.kind) {
    case MasterKind::RefTriangle:
      return MeshFamily::Triangle;
    case MasterKind::RefTetrahedron:
      return MeshFamily::Tetrahedron;
    default:
      return rule.dim == 1 ? MeshFamily::Interval : (rule.dim == 2 ? MeshFamily::Square : MeshFamily::Cube);
  }
}

Mesh rule_mesh(const RuleDescriptor& rule, int n) {
  return build_uniform_mesh(rule_mesh_family(rule), n, rule.master);
}

Mesh rule_mesh_for_points(const RuleDescriptor& rule, long n_points) {
  const MeshFamily family = rule_mesh_family(rule);
  const long j = rule.points_per_element;
  if (n_points < j || n_points % j != 0)
    throw std::invalid_argument("point count not divisible by points-per-element");
  const long elements = n_points / j;
  for (int n = 1;; ++n) {
    const long count = mesh_family_elements(family, n);
    if (count == elements) return rule_mesh(rule, n);
    if (count > elements) throw std::invalid_argument("point count does not match a uniform mesh");
  }
}

double bias_weight_w0(double x) {
  const double ax = std::abs(x);
  if (ax == 0.0) return 2.0;  // x ln x -> 0
  return 2.0 + 2.0 * ax * std::log(ax / (1.0 + ax));
}

std::array<Mat, 12> tet_rotation_group() {
  Mat r1(3);  // cyclic coordinate permutation (x,y,z) -> (y,z,x)
  r1.at(0, 1) = 1.0;
  r1.at(1, 2) = 1.0;
  r1.at(2, 0) = 1.0;
  Mat r2 = Mat::diagonal(3, 1.0);  // rotation by pi about the y axis
  r2.at(0, 0) = -1.0;
  r2.at(2, 2) = -1.0;
  const Mat r1r1 = mat_mul(r1, r1);
  return {
      Mat::identity(3),
      r1,
      r1r1,
      r2,
      mat_mul(r1, r2),
      mat_mul(r2, r1),
      mat_mul(r1r1, r2),
      mat_mul(r2, r1r1),
      mat_mul(r1, mat_mul(r2, r1r1)),
      mat_mul(r1r1, mat_mul(r2, r1)),
      mat_mul(r2, mat_mul(r1, r2)),
      mat_mul(r2, mat_mul(r1r1, r2)),
  };
}

namespace {

// Rotation by 2*pi/3 about the origin; leaves the reference triangle invariant.
Mat triangle_rotation() {
  Mat r(2);
  const double s3 = std::sqrt(3.0);
  r.at(0, 0) = -0.5;
  r.at(0, 1) = -s3 / 2.0;
  r.at(1, 0) = s3 / 2.0;
  r.at(1, 1) = -0.5;
  return r;
}

// Order-4 rotation used by the four-point tetrahedron rule.
Mat tet_r0() {
  Mat r(3);
  r.at(0, 2) = -1.0;
  r.at(1, 1) = -1.0;
  r.at(2, 0) = 1.0;
  return r;
}

// P3 sampling densities: 1D node from 3 x^2 on (0,1); 2D pair from
// (3/2)(x^2 + y^2) on (0,1)^2, sampled as an equal mixture of
// (x ~ 3x^2, y uniform) and the swapped pair.
double sample_p3_node_1d(RandomStream& rng) { return std::cbrt(rng.uniform_pos()); }

void sample_p3_pair_2d(RandomStream& rng, double& x, double& y) {
  const bool swap = rng.uniform() < 0.5;
  const double cubic = std::cbrt(rng.uniform_pos());
  const double flat = rng.uniform();
  x = swap ? flat : cubic;
  y = swap ? cubic : flat;
}

// 3-point order-3 rule on [-1,1]: nodes {x1, 0, -x1}.
void p3_sample_1d(RandomStream& rng, QuadratureSample& out) {
  const double x1 = sample_p3_node_1d(rng);
  const double w = 1.0 / (3.0 * x1 * x1);
  out.nodes = {vec1(x1), vec1(0.0), vec1(-x1)};
  out.weights = {w, 2.0 - 2.0 * w, w};
}

// 5-point order-3 rule on [-1,1]^2: the four 90-degree rotations of (x1,y1)
// plus the centre.
void p3_sample_2d(RandomStream& rng, QuadratureSample& out) {
  double x1 = 0.0, y1 = 0.0;
  sample_p3_pair_2d(rng, x1, y1);
  const double w = 2.0 / (3.0 * (x1 * x1 + y1 * y1));
  out.nodes = {vec2(x1, y1), vec2(-y1, x1), vec2(y1, -x1), vec2(-x1, -y1), vec2(0.0, 0.0)};
  out.weights = {w, w, w, w, 4.0 - 4.0 * w};
}

Vec sample_p2tri_point(RandomStream& rng, const MasterElement& tri, const SamplerOptions& opts) {
  if (opts.p2_mode == P2SamplingMode::Database) {
    if (!opts.database || opts.database->points.empty())
      throw std::invalid_argument("database sampling mode requires a point database");
    return opts.database->points[rng.uniform_index(opts.database->points.size())];
  }
  // Restriction of the radial density (2/pi)|x|^2 on the unit disc to the
  // triangle: r = u^(1/4), angle uniform, reject outside.
  for (int attempt = 0; attempt < opts.max_rejection_attempts; ++attempt) {
    if (opts.acceptance) ++opts.acceptance->attempts;
    const double r = std::pow(rng.uniform_pos(), 0.25);
    const double theta = rng.uniform(0.0, 6.283185307179586476925286766559);
    const Vec x = vec2(r * std::cos(theta), r * std::sin(theta));
    if (tri.contains(x, 0.0)) {
      if (opts.acceptance) ++opts.acceptance->accepted;
      return x;
    }
  }
  throw ResourceExhaustedError("p2tri sampler: rejection cap of " +
                               std::to_string(opts.max_rejection_attempts) + " attempts exceeded");
}

Vec sample_p2tet_point(RandomStream& rng, const MasterElement& tet, const SamplerOptions& opts) {
  if (opts.p2_mode == P2SamplingMode::Database) {
    if (!opts.database || opts.database->points.empty())
      throw std::invalid_argument("database sampling mode requires a point database");
    return opts.database->points[rng.uniform_index(opts.database->points.size())];
  }
  // Restriction of the radial density ~ |x|^2 on the ball of radius sqrt(3)
  // (the circumsphere): r = sqrt(3) u^(1/5), direction uniform on the sphere.
  const double rad = std::sqrt(3.0);
  for (int attempt = 0; attempt < opts.max_rejection_attempts; ++attempt) {
    if (opts.acceptance) ++opts.acceptance->attempts;
    const double r = rad * std::pow(rng.uniform_pos(), 0.2);
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 6.283185307179586476925286766559);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec x = vec3(r * rho * std::cos(phi), r * rho * std::sin(phi), r * z);
    if (tet.contains(x, 0.0)) {
      if (opts.acceptance) ++opts.acceptance->accepted;
      return x;
    }
  }
  throw ResourceExhaustedError("p2tet sampler: rejection cap of " +
                               std::to_string(opts.max_rejection_attempts) + " attempts exceeded");
}

}  // namespace

QuadratureSample sample_master(const RuleDescriptor& rule, RandomStream& rng, const SamplerOptions& opts) {
  QuadratureSample s;
  const int d = rule.dim;
  switch (rule.id) {
    case RuleId::MC:
    case RuleId::P0: {
      // One uniform node on [0,1]^d, weight |master| = 1.
      Vec x(d);
      for (int i = 0; i < d; ++i) x[i] = rng.uniform();
      s.nodes = {x};
      s.weights = {1.0};
      break;
    }
    case RuleId::P1: {
      // Antipodal pair on [-1,1]^d with equal weights summing to 2^d.
      Vec x(d);
      for (int i = 0; i < d; ++i) x[i] = rng.uniform(-1.0, 1.0);
      const double w = std::pow(2.0, d - 1);
      s.nodes = {x, -1.0 * x};
      s.weights = {w, w};
      break;
    }
    case RuleId::P3: {
      if (d == 1) {
        p3_sample_1d(rng, s);
      } else if (d == 2) {
        p3_sample_2d(rng, s);
      } else {
        // Tensor product of the 2D five-point rule (x,y) and the 1D
        // three-point rule (z).
        QuadratureSample plane, line;
        p3_sample_2d(rng, plane);
        p3_sample_1d(rng, line);
        for (std::size_t i = 0; i < plane.nodes.size(); ++i)
          for (std::size_t j = 0; j < line.nodes.size(); ++j) {
            s.nodes.push_back(vec3(plane.nodes[i][0], plane.nodes[i][1], line.nodes[j][0]));
            s.weights.push_back(plane.weights[i] * line.weights[j]);
          }
      }
      break;
    }
    case RuleId::P1B: {
      // Independent nodes left/right of zero; order-one weights.
      const double x1 = rng.uniform_pos();
      const double x2 = -rng.uniform_pos();
      s.nodes = {vec1(x1), vec1(x2)};
      s.weights = {2.0 * x2 / (x2 - x1), -2.0 * x1 / (x2 - x1)};
      break;
    }
    case RuleId::P1Tri: {
      const Vec x = sample_uniform_simplex(rule.master, rng);
      const Mat r = triangle_rotation();
      const Vec rx = mat_vec(r, x);
      const double w = std::sqrt(3.0) / 4.0;
      s.nodes = {x, rx, mat_vec(r, rx)};
      s.weights = {w, w, w};
      break;
    }
    case RuleId::P2Tri: {
      const Vec x = sample_p2tri_point(rng, rule.master, opts);
      const Mat r = triangle_rotation();
      const Vec rx = mat_vec(r, x);
      const double w1 = std::sqrt(3.0) / (16.0 * norm2(x));
      s.nodes = {x, rx, mat_vec(r, rx), vec2(0.0, 0.0)};
      s.weights = {w1, w1, w1, 3.0 * std::sqrt(3.0) / 4.0 - 3.0 * w1};
      break;
    }
    case RuleId::P1Tet: {
      const Vec x = sample_uniform_simplex(rule.master, rng);
      const Mat r0 = tet_r0();
      const Vec x1 = mat_vec(r0, x);
      const Vec x2 = mat_vec(r0, x1);
      const Vec x3 = mat_vec(r0, x2);
      const double w = 2.0 / 3.0;
      s.nodes = {x, x1, x2, x3};
      s.weights = {w, w, w, w};
      break;
    }
    case RuleId::P2Tet: {
      const Vec x = sample_p2tet_point(rng, rule.master, opts);
      const double w1 = 2.0 / (15.0 * norm2(x));
      const auto group = tet_rotation_group();
      s.nodes.reserve(13);
      s.weights.reserve(13);
      for (const Mat& r : group) {
        s.nodes.push_back(mat_vec(r, x));
        s.weights.push_back(w1);
      }
      s.nodes.push_back(vec3(0.0, 0.0, 0.0));
      s.weights.push_back(8.0 / 3.0 - 12.0 * w1);
      break;
    }
  }
  return s;
}

P2Database build_p2_database(const RuleDescriptor& rule, int count, RandomStream& rng,
                             const SamplerOptions& opts) {
  if (rule.id != RuleId::P2Tri && rule.id != RuleId::P2Tet)
    throw std::invalid_argument("point database applies to p2tri/p2tet only");
  SamplerOptions rejection = opts;
  rejection.p2_mode = P2SamplingMode::Rejection;
  rejection.database = nullptr;
  P2Database db;
  db.points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    db.points.push_back(rule.id == RuleId::P2Tri ? sample_p2tri_point(rng, rule.master, rejection)
                                                 : sample_p2tet_point(rng, rule.master, rejection));
  return db;
}

GlobalSample draw_global_sample(const RuleDescriptor& rule, const Mesh& mesh, RandomStream& rng,
                                const SamplerOptions& opts) {
  if (rule.master.kind != mesh.master.kind)
    throw std::invalid_argument("draw_global_sample: rule and mesh master elements differ");
  GlobalSample g;
  const std::size_t total = mesh.elements.size() * static_cast<std::size_t>(rule.points_per_element);
  g.nodes.reserve(total);
  g.weights.reserve(total);
  for (const AffineMap& element : mesh.elements) {
    const QuadratureSample sample = sample_master(rule, rng, opts);
    for (std::size_t j = 0; j < sample.nodes.size(); ++j) {
      g.nodes.push_back(element.apply(sample.nodes[j]));
      g.weights.push_back(sample.weights[j] * element.det_a);
    }
  }
  return g;
}

}  // namespace stochquad
