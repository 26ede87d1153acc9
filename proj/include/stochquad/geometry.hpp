#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stochquad/rng.hpp"

namespace stochquad {

/// Small dense vector for spatial dimensions 1..3. Unused entries stay zero.
struct Vec {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  int n = 0;

  Vec() = default;
  explicit Vec(int dim) : n(dim) {}

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  int dim() const { return n; }
};

inline Vec vec1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}
inline Vec vec2(double x, double y) {
  Vec v(2);
  v[0] = x;
  v[1] = y;
  return v;
}
inline Vec vec3(double x, double y, double z) {
  Vec v(3);
  v[0] = x;
  v[1] = y;
  v[2] = z;
  return v;
}

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] + b[i];
  return r;
}
inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] - b[i];
  return r;
}
inline Vec operator*(double s, const Vec& a) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = s * a[i];
  return r;
}
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }

/// Square matrix for spatial dimensions 1..3, row-major.
struct Mat {
  std::array<double, 9> a{};
  int n = 0;

  Mat() = default;
  explicit Mat(int dim) : n(dim) {}

  double& at(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }
  int dim() const { return n; }

  static Mat identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
  }
  static Mat diagonal(int dim, double d) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = d;
    return m;
  }
};

Vec mat_vec(const Mat& m, const Vec& v);
Mat mat_mul(const Mat& a, const Mat& b);
Mat transpose(const Mat& m);
double determinant(const Mat& m);
Mat inverse(const Mat& m);
/// Spectral (operator 2-) norm, via Jacobi eigenvalues of A^T A.
double operator_norm(const Mat& m);
/// Condition number ||A|| * ||A^-1||.
double condition_number(const Mat& m);

enum class MasterKind {
  Interval01,      // [0, 1]
  Interval11,      // [-1, 1]
  Square,          // [-1, 1]^2
  Cube,            // [-1, 1]^3
  UnitSquare,      // [0, 1]^2
  UnitCube,        // [0, 1]^3
  RefTriangle,     // equilateral triangle, vertices (0,1), (-s3/2,-1/2), (s3/2,-1/2)
  RefTetrahedron,  // vertices (1,1,1), (-1,-1,1), (-1,1,-1), (1,-1,-1)
};

const char* master_kind_name(MasterKind kind);

struct MasterElement {
  MasterKind kind;
  int dim;
  double volume;
  std::vector<Vec> vertices;  // populated for simplices only

  static MasterElement make(MasterKind kind);

  bool is_simplex() const { return kind == MasterKind::RefTriangle || kind == MasterKind::RefTetrahedron; }
  bool is_box() const { return !is_simplex(); }
  /// Coordinate bounds: boxes are [lo, hi]^d.
  double box_lo() const;
  double box_hi() const;
  /// Membership in the closed element, with tolerance on the defining inequalities.
  bool contains(const Vec& x, double tol = 1e-12) const;
};

/// Affine map x -> A x + y with positive determinant.
struct AffineMap {
  Mat A;
  Vec y;
  double det_a = 0.0;

  static AffineMap make(const Mat& A, const Vec& y);
  Vec apply(const Vec& x) const { return mat_vec(A, x) + y; }
};

/// Free-function form of AffineMap::apply.
inline Vec map_point(const AffineMap& map, const Vec& x) { return map.apply(x); }

enum class MeshFamily { Interval, Square, Cube, Triangle, Tetrahedron };

const char* mesh_family_name(MeshFamily family);
int mesh_family_dim(MeshFamily family);
/// Number of elements of a uniform n-refinement of [0,1]^d for this family.
long mesh_family_elements(MeshFamily family, int n);

/// A partition of [0,1]^d into affine images of a shared master element.
/// Immutable after construction; safe to share across threads.
struct Mesh {
  MasterElement master;
  std::vector<AffineMap> elements;
  int dim = 0;
  MeshFamily family = MeshFamily::Interval;
  int n = 0;
  // Triangle meshes split every grid cell along the same diagonal; recorded
  // so downstream artefacts can state the orientation.
  std::string triangle_diagonal;

  double total_volume() const;
  /// Index of the element whose closed master preimage contains x, or -1.
  /// `hits` (optional) counts how many elements matched.
  int locate(const Vec& x, double tol = 1e-12, int* hits = nullptr) const;
};

/// Uniform partition of [0,1]^d. Interval: n elements; square/cube: n^d;
/// triangle: 2 n^2 (fixed diagonal); tetrahedron: 5 n^3 (five-tet cube split).
/// Throws std::invalid_argument for n = 0 or a family/master mismatch.
Mesh build_uniform_mesh(MeshFamily family, int n, const MasterElement& master);

/// Barycentric combination of sorted uniforms (a ascending, size dim) against
/// the simplex vertices; exposed for the order-statistics tests.
Vec simplex_point_from_sorted_uniforms(const MasterElement& master, std::span<const double> sorted);

/// Uniform sample inside a simplex master element (sorted-uniforms method).
Vec sample_uniform_simplex(const MasterElement& master, RandomStream& rng);

/// One-line JSON summary (family, n, element count, det min/max) for manifests.
std::string mesh_summary_json(const Mesh& mesh);

}  // namespace stochquad
