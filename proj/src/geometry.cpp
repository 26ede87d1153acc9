#include "stochquad/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace stochquad {

Vec mat_vec(const Mat& m, const Vec& v) {
  Vec r(m.n);
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m.at(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

Mat mat_mul(const Mat& a, const Mat& b) {
  Mat r(a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.n; ++k) s += a.at(i, k) * b.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Mat transpose(const Mat& m) {
  Mat r(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) r.at(i, j) = m.at(j, i);
  return r;
}

double determinant(const Mat& m) {
  switch (m.n) {
    case 1:
      return m.at(0, 0);
    case 2:
      return m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
    case 3:
      return m.at(0, 0) * (m.at(1, 1) * m.at(2, 2) - m.at(1, 2) * m.at(2, 1)) -
             m.at(0, 1) * (m.at(1, 0) * m.at(2, 2) - m.at(1, 2) * m.at(2, 0)) +
             m.at(0, 2) * (m.at(1, 0) * m.at(2, 1) - m.at(1, 1) * m.at(2, 0));
    default:
      throw std::invalid_argument("determinant: dimension must be 1..3");
  }
}

Mat inverse(const Mat& m) {
  const double det = determinant(m);
  if (det == 0.0) throw std::invalid_argument("inverse: singular matrix");
  Mat r(m.n);
  switch (m.n) {
    case 1:
      r.at(0, 0) = 1.0 / det;
      break;
    case 2:
      r.at(0, 0) = m.at(1, 1) / det;
      r.at(0, 1) = -m.at(0, 1) / det;
      r.at(1, 0) = -m.at(1, 0) / det;
      r.at(1, 1) = m.at(0, 0) / det;
      break;
    case 3: {
      auto cof = [&](int i, int j) {
        const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
        const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
        return m.at(i1, j1) * m.at(i2, j2) - m.at(i1, j2) * m.at(i2, j1);
      };
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.at(i, j) = cof(j, i) / det;
      break;
    }
    default:
      throw std::invalid_argument("inverse: dimension must be 1..3");
  }
  return r;
}

double operator_norm(const Mat& m) {
  // Largest eigenvalue of the symmetric matrix S = A^T A via cyclic Jacobi.
  Mat s = mat_mul(transpose(m), m);
  const int n = s.n;
  if (n == 1) return std::sqrt(s.at(0, 0));
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += s.at(p, q) * s.at(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (s.at(p, q) == 0.0) continue;
        const double theta = (s.at(q, q) - s.at(p, p)) / (2.0 * s.at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double skp = s.at(k, p), skq = s.at(k, q);
          s.at(k, p) = c * skp - sn * skq;
          s.at(k, q) = sn * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = s.at(p, k), sqk = s.at(q, k);
          s.at(p, k) = c * spk - sn * sqk;
          s.at(q, k) = sn * spk + c * sqk;
        }
      }
  }
  double lam = s.at(0, 0);
  for (int i = 1; i < n; ++i) lam = std::max(lam, s.at(i, i));
  return std::sqrt(std::max(lam, 0.0));
}

double condition_number(const Mat& m) { return operator_norm(m) * operator_norm(inverse(m)); }

const char* master_kind_name(MasterKind kind) {
  switch (kind) {
    case MasterKind::Interval01:
      return "interval01";
    case MasterKind::Interval11:
      return "interval11";
    case MasterKind::Square:
      return "square";
    case MasterKind::Cube:
      return "cube";
    case MasterKind::UnitSquare:
      return "unit_square";
    case MasterKind::UnitCube:
      return "unit_cube";
    case MasterKind::RefTriangle:
      return "ref_triangle";
    case MasterKind::RefTetrahedron:
      return "ref_tetrahedron";
  }
  return "?";
}

MasterElement MasterElement::make(MasterKind kind) {
  MasterElement m;
  m.kind = kind;
  const double s3 = std::sqrt(3.0);
  switch (kind) {
    case MasterKind::Interval01:
      m.dim = 1;
      m.volume = 1.0;
      break;
    case MasterKind::Interval11:
      m.dim = 1;
      m.volume = 2.0;
      break;
    case MasterKind::Square:
      m.dim = 2;
      m.volume = 4.0;
      break;
    case MasterKind::Cube:
      m.dim = 3;
      m.volume = 8.0;
      break;
    case MasterKind::UnitSquare:
      m.dim = 2;
      m.volume = 1.0;
      break;
    case MasterKind::UnitCube:
      m.dim = 3;
      m.volume = 1.0;
      break;
    case MasterKind::RefTriangle:
      m.dim = 2;
      m.volume = 3.0 * s3 / 4.0;
      m.vertices = {vec2(0.0, 1.0), vec2(-s3 / 2.0, -0.5), vec2(s3 / 2.0, -0.5)};
      break;
    case MasterKind::RefTetrahedron:
      m.dim = 3;
      m.volume = 8.0 / 3.0;
      m.vertices = {vec3(1, 1, 1), vec3(-1, -1, 1), vec3(-1, 1, -1), vec3(1, -1, -1)};
      break;
  }
  return m;
}

double MasterElement::box_lo() const {
  switch (kind) {
    case MasterKind::Interval01:
    case MasterKind::UnitSquare:
    case MasterKind::UnitCube:
      return 0.0;
    default:
      return -1.0;
  }
}

double MasterElement::box_hi() const { return 1.0; }

bool MasterElement::contains(const Vec& x, double tol) const {
  if (is_box()) {
    const double lo = box_lo(), hi = box_hi();
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo - tol || x[i] > hi + tol) return false;
    return true;
  }
  if (kind == MasterKind::RefTriangle) {
    // Barycentric coordinates against the three vertices.
    const Vec& v1 = vertices[0];
    const Vec& v2 = vertices[1];
    const Vec& v3 = vertices[2];
    Mat m(2);
    m.at(0, 0) = v1[0] - v3[0];
    m.at(0, 1) = v2[0] - v3[0];
    m.at(1, 0) = v1[1] - v3[1];
    m.at(1, 1) = v2[1] - v3[1];
    const Vec l = mat_vec(inverse(m), x - v3);
    return l[0] >= -tol && l[1] >= -tol && l[0] + l[1] <= 1.0 + tol;
  }
  // Reference tetrahedron as four half-spaces.
  const double a = x[0] + x[1] + x[2];
  const double b = x[0] + x[1] - x[2];
  const double c = x[0] - x[1] + x[2];
  const double d = -x[0] + x[1] + x[2];
  return a >= -1.0 - tol && b <= 1.0 + tol && c <= 1.0 + tol && d <= 1.0 + tol;
}

AffineMap AffineMap::make(const Mat& A, const Vec& y) {
  AffineMap m;
  m.A = A;
  m.y = y;
  m.det_a = determinant(A);
  if (!(m.det_a > 0.0)) throw std::invalid_argument("AffineMap: determinant must be positive");
  return m;
}

const char* mesh_family_name(MeshFamily family) {
  switch (family) {
    case MeshFamily::Interval:
      return "interval";
    case MeshFamily::Square:
      return "square";
    case MeshFamily::Cube:
      return "cube";
    case MeshFamily::Triangle:
      return "triangle";
    case MeshFamily::Tetrahedron:
      return "tetrahedron";
  }
  return "?";
}

int mesh_family_dim(MeshFamily family) {
  switch (family) {
    case MeshFamily::Interval:
      return 1;
    case MeshFamily::Square:
    case MeshFamily::Triangle:
      return 2;
    default:
      return 3;
  }
}

long mesh_family_elements(MeshFamily family, int n) {
  const long ln = n;
  switch (family) {
    case MeshFamily::Interval:
      return ln;
    case MeshFamily::Square:
      return ln * ln;
    case MeshFamily::Cube:
      return ln * ln * ln;
    case MeshFamily::Triangle:
      return 2 * ln * ln;
    case MeshFamily::Tetrahedron:
      return 5 * ln * ln * ln;
  }
  return 0;
}

double Mesh::total_volume() const {
  double v = 0.0;
  for (const auto& e : elements) v += e.det_a * master.volume;
  return v;
}

int Mesh::locate(const Vec& x, double tol, int* hits) const {
  int count = 0;
  int found = -1;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const Vec pre = mat_vec(inverse(elements[i].A), x - elements[i].y);
    if (master.contains(pre, tol)) {
      ++count;
      if (found < 0) found = static_cast<int>(i);
    }
  }
  if (hits) *hits = count;
  return count == 1 ? found : (count == 0 ? -1 : found);
}

namespace {

// Affine map sending the master simplex onto the target simplex, with the
// last two target vertices swapped if needed to keep det(A) > 0.
AffineMap simplex_map(const MasterElement& master, std::vector<Vec> target) {
  const int d = master.dim;
  auto edge_matrix = [d](const std::vector<Vec>& v) {
    Mat m(d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) m.at(i, j) = v[static_cast<std::size_t>(j + 1)][i] - v[0][i];
    return m;
  };
  const Mat master_edges = edge_matrix(master.vertices);
  Mat target_edges = edge_matrix(target);
  Mat a = mat_mul(target_edges, inverse(master_edges));
  if (determinant(a) < 0.0) {
    std::swap(target[static_cast<std::size_t>(d - 1)], target[static_cast<std::size_t>(d)]);
    target_edges = edge_matrix(target);
    a = mat_mul(target_edges, inverse(master_edges));
  }
  const Vec y = target[0] - mat_vec(a, master.vertices[0]);
  return AffineMap::make(a, y);
}

// Box master -> axis-aligned cell [lo_i, lo_i + h]^d.
AffineMap box_cell_map(const MasterElement& master, const Vec& cell_lo, double h) {
  const int d = master.dim;
  const double lo = master.box_lo();
  // x -> cell_lo + h * (x - lo) / (hi - lo)
  const double scale = h / (master.box_hi() - lo);
  Mat a = Mat::diagonal(d, scale);
  Vec y(d);
  for (int i = 0; i < d; ++i) y[i] = cell_lo[i] - scale * lo;
  return AffineMap::make(a, y);
}

// Five-tetrahedra split of the unit cube: central element spanned by
// p1=(1,1,1), p2=(0,0,1), p3=(0,1,0), p4=(1,0,0); the four corner elements
// swap one p_i for its complement.
std::vector<std::vector<Vec>> unit_cube_five_tets() {
  const Vec p1 = vec3(1, 1, 1), p2 = vec3(0, 0, 1), p3 = vec3(0, 1, 0), p4 = vec3(1, 0, 0);
  auto comp = [](const Vec& v) { return vec3(1.0 - v[0], 1.0 - v[1], 1.0 - v[2]); };
  return {
      {p1, p2, p3, p4},
      {comp(p1), p2, p3, p4},
      {p1, comp(p2), p3, p4},
      {p1, p2, comp(p3), p4},
      {p1, p2, p3, comp(p4)},
  };
}

}  // namespace

Mesh build_uniform_mesh(MeshFamily family, int n, const MasterElement& master) {
  if (n < 1) throw std::invalid_argument("build_uniform_mesh: n must be >= 1");
  const int d = mesh_family_dim(family);
  if (d != master.dim) throw std::invalid_argument("build_uniform_mesh: family/master dimension mismatch");
  const bool simplex_family = family == MeshFamily::Triangle || family == MeshFamily::Tetrahedron;
  if (simplex_family != master.is_simplex())
    throw std::invalid_argument("build_uniform_mesh: family/master element mismatch");

  Mesh mesh;
  mesh.master = master;
  mesh.dim = d;
  mesh.family = family;
  mesh.n = n;
  const double h = 1.0 / n;

  switch (family) {
    case MeshFamily::Interval: {
      for (int i = 0; i < n; ++i) {
        Vec lo(1);
        lo[0] = i * h;
        mesh.elements.push_back(box_cell_map(master, lo, h));
      }
      break;
    }
    case MeshFamily::Square: {
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) mesh.elements.push_back(box_cell_map(master, vec2(i * h, j * h), h));
      break;
    }
    case MeshFamily::Cube: {
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i)
            mesh.elements.push_back(box_cell_map(master, vec3(i * h, j * h, k * h), h));
      break;
    }
    case MeshFamily::Triangle: {
      // Every cell split along its top-left -> bottom-right diagonal.
      mesh.triangle_diagonal = "tl-br";
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const Vec c00 = vec2(i * h, j * h);
          const Vec c10 = vec2((i + 1) * h, j * h);
          const Vec c01 = vec2(i * h, (j + 1) * h);
          const Vec c11 = vec2((i + 1) * h, (j + 1) * h);
          mesh.elements.push_back(simplex_map(master, {c00, c10, c01}));
          mesh.elements.push_back(simplex_map(master, {c11, c01, c10}));
        }
      break;
    }
    case MeshFamily::Tetrahedron: {
      const auto ref_tets = unit_cube_five_tets();
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            const Vec origin = vec3(i * h, j * h, k * h);
            for (const auto& tet : ref_tets) {
              std::vector<Vec> scaled;
              scaled.reserve(4);
              for (const auto& v : tet) scaled.push_back(origin + h * v);
              mesh.elements.push_back(simplex_map(master, std::move(scaled)));
            }
          }
      break;
    }
  }
  return mesh;
}

Vec simplex_point_from_sorted_uniforms(const MasterElement& master, std::span<const double> sorted) {
  const auto& v = master.vertices;
  if (master.kind == MasterKind::RefTriangle) {
    const double a1 = sorted[0], a2 = sorted[1];
    return a1 * v[0] + (a2 - a1) * v[1] + (1.0 - a2) * v[2];
  }
  const double a1 = sorted[0], a2 = sorted[1], a3 = sorted[2];
  return a1 * v[0] + (a2 - a1) * v[1] + (a3 - a2) * v[2] + (1.0 - a3) * v[3];
}

Vec sample_uniform_simplex(const MasterElement& master, RandomStream& rng) {
  if (!master.is_simplex()) throw std::invalid_argument("sample_uniform_simplex: master is not a simplex");
  std::array<double, 3> a{};
  const int k = master.dim;
  for (int i = 0; i < k; ++i) a[static_cast<std::size_t>(i)] = rng.uniform();
  std::sort(a.begin(), a.begin() + k);
  return simplex_point_from_sorted_uniforms(master, std::span<const double>(a.data(), static_cast<std::size_t>(k)));
}

std::string mesh_summary_json(const Mesh& mesh) {
  double det_min = 0.0, det_max = 0.0;
  if (!mesh.elements.empty()) {
    det_min = det_max = mesh.elements.front().det_a;
    for (const auto& e : mesh.elements) {
      det_min = std::min(det_min, e.det_a);
      det_max = std::max(det_max, e.det_a);
    }
  }
  nlohmann::json j;
  j["family"] = mesh_family_name(mesh.family);
  j["master"] = master_kind_name(mesh.master.kind);
  j["n"] = mesh.n;
  j["elements"] = mesh.elements.size();
  j["det_min"] = det_min;
  j["det_max"] = det_max;
  if (!mesh.triangle_diagonal.empty()) j["triangle_diagonal"] = mesh.triangle_diagonal;
  return j.dump();
}

}  // namespace stochquad
