#include "stochquad/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stochquad {

Polynomial::Polynomial(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("Polynomial: dim must be 1..3");
  std::size_t size = 1;
  for (int i = 0; i < dim; ++i) size *= static_cast<std::size_t>(max_degree + 1);
  c_.assign(size, 0.0);
}

std::size_t Polynomial::index(int i, int j, int k) const {
  const std::size_t stride = static_cast<std::size_t>(max_degree_ + 1);
  std::size_t idx = static_cast<std::size_t>(i);
  if (dim_ >= 2) idx = idx * stride + static_cast<std::size_t>(j);
  if (dim_ >= 3) idx = idx * stride + static_cast<std::size_t>(k);
  return idx;
}

double Polynomial::eval(const Vec& x) const {
  // Horner in the first variable, direct powers in the others.
  double result = 0.0;
  for (int i = max_degree_; i >= 0; --i) {
    double slice = 0.0;
    if (dim_ == 1) {
      slice = coeff(i);
    } else {
      for (int j = max_degree_; j >= 0; --j) {
        double inner = 0.0;
        if (dim_ == 2) {
          inner = coeff(i, j);
        } else {
          for (int k = max_degree_; k >= 0; --k) inner = inner * x[2] + coeff(i, j, k);
        }
        slice = slice * x[1] + inner;
      }
    }
    result = result * x[0] + slice;
  }
  return result;
}

Polynomial Polynomial::multiply(const Polynomial& other) const {
  Polynomial r(dim_, max_degree_ + other.max_degree_);
  const int jmax = dim_ >= 2 ? max_degree_ : 0;
  const int kmax = dim_ >= 3 ? max_degree_ : 0;
  const int ojmax = dim_ >= 2 ? other.max_degree_ : 0;
  const int okmax = dim_ >= 3 ? other.max_degree_ : 0;
  for (int i = 0; i <= max_degree_; ++i)
    for (int j = 0; j <= jmax; ++j)
      for (int k = 0; k <= kmax; ++k) {
        const double a = coeff(i, j, k);
        if (a == 0.0) continue;
        for (int oi = 0; oi <= other.max_degree_; ++oi)
          for (int oj = 0; oj <= ojmax; ++oj)
            for (int ok = 0; ok <= okmax; ++ok) {
              const double b = other.coeff(oi, oj, ok);
              if (b == 0.0) continue;
              r.coeff(i + oi, j + oj, k + ok) += a * b;
            }
      }
  return r;
}

Polynomial Polynomial::compose_affine(const Mat& a, const Vec& y) const {
  // Each variable x_i becomes the linear form sum_j a_ij s_j + y_i.
  std::vector<Polynomial> linear;
  for (int i = 0; i < dim_; ++i) {
    Polynomial l(dim_, 1);
    l.coeff(0, 0, 0) = y[i];
    for (int j = 0; j < dim_; ++j) {
      if (j == 0) l.coeff(1, 0, 0) = a.at(i, j);
      if (j == 1) l.coeff(0, 1, 0) = a.at(i, j);
      if (j == 2) l.coeff(0, 0, 1) = a.at(i, j);
    }
    linear.push_back(l);
  }
  // Composition preserves total degree, so size the result by the total
  // degree of the nonzero coefficients.
  int total_deg = 0;
  const int jmax = dim_ >= 2 ? max_degree_ : 0;
  const int kmax = dim_ >= 3 ? max_degree_ : 0;
  for (int i = 0; i <= max_degree_; ++i)
    for (int j = 0; j <= jmax; ++j)
      for (int k = 0; k <= kmax; ++k)
        if (coeff(i, j, k) != 0.0) total_deg = std::max(total_deg, i + j + k);

  std::vector<std::vector<Polynomial>> powers(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    Polynomial one(dim_, 0);
    one.coeff(0, 0, 0) = 1.0;
    powers[static_cast<std::size_t>(i)].push_back(one);
    for (int p = 1; p <= total_deg; ++p)
      powers[static_cast<std::size_t>(i)].push_back(
          powers[static_cast<std::size_t>(i)].back().multiply(linear[static_cast<std::size_t>(i)]));
  }
  Polynomial result(dim_, total_deg);
  for (int i = 0; i <= max_degree_; ++i)
    for (int j = 0; j <= jmax; ++j)
      for (int k = 0; k <= kmax; ++k) {
        const double cv = coeff(i, j, k);
        if (cv == 0.0) continue;
        Polynomial term = powers[0][static_cast<std::size_t>(i)];
        if (dim_ >= 2) term = term.multiply(powers[1][static_cast<std::size_t>(j)]);
        if (dim_ >= 3) term = term.multiply(powers[2][static_cast<std::size_t>(k)]);
        const int tjmax = dim_ >= 2 ? term.max_degree() : 0;
        const int tkmax = dim_ >= 3 ? term.max_degree() : 0;
        for (int ti = 0; ti <= term.max_degree(); ++ti)
          for (int tj = 0; tj <= tjmax; ++tj)
            for (int tk = 0; tk <= tkmax; ++tk) result.coeff(ti, tj, tk) += cv * term.coeff(ti, tj, tk);
      }
  return result;
}

double Polynomial::integral_box(double lo, double hi) const {
  // Monomials factorise: int x^p dx = (hi^{p+1} - lo^{p+1}) / (p+1).
  std::vector<double> moment(static_cast<std::size_t>(max_degree_) + 1);
  double hp = hi, lp = lo;
  for (int p = 0; p <= max_degree_; ++p) {
    moment[static_cast<std::size_t>(p)] = (hp - lp) / (p + 1);
    hp *= hi;
    lp *= lo;
  }
  double total = 0.0;
  const int jmax = dim_ >= 2 ? max_degree_ : 0;
  const int kmax = dim_ >= 3 ? max_degree_ : 0;
  for (int i = 0; i <= max_degree_; ++i)
    for (int j = 0; j <= jmax; ++j)
      for (int k = 0; k <= kmax; ++k) {
        const double cv = coeff(i, j, k);
        if (cv == 0.0) continue;
        double m = moment[static_cast<std::size_t>(i)];
        if (dim_ >= 2) m *= moment[static_cast<std::size_t>(j)];
        if (dim_ >= 3) m *= moment[static_cast<std::size_t>(k)];
        total += cv * m;
      }
  return total;
}

double Polynomial::integral_unit_simplex() const {
  // int_{simplex} s1^a s2^b s3^c ds = a! b! c! / (a+b+c+dim)!.
  auto factorial = [](int v) {
    double f = 1.0;
    for (int i = 2; i <= v; ++i) f *= i;
    return f;
  };
  double total = 0.0;
  const int jmax = dim_ >= 2 ? max_degree_ : 0;
  const int kmax = dim_ >= 3 ? max_degree_ : 0;
  for (int i = 0; i <= max_degree_; ++i)
    for (int j = 0; j <= jmax; ++j)
      for (int k = 0; k <= kmax; ++k) {
        const double cv = coeff(i, j, k);
        if (cv == 0.0) continue;
        total += cv * factorial(i) * factorial(j) * factorial(k) / factorial(i + j + k + dim_);
      }
  return total;
}

double Polynomial::integral_master(const MasterElement& master) const {
  if (master.is_box()) return integral_box(master.box_lo(), master.box_hi());
  // Pull back to the unit simplex through s -> v1 + M s.
  const int d = master.dim;
  Mat m(d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      m.at(i, j) = master.vertices[static_cast<std::size_t>(j + 1)][i] - master.vertices[0][i];
  const Polynomial pulled = compose_affine(m, master.vertices[0]);
  return std::abs(determinant(m)) * pulled.integral_unit_simplex();
}

Polynomial Polynomial::random(int dim, int total_degree, RandomStream& rng) {
  Polynomial p(dim, total_degree);
  const int jmax = dim >= 2 ? total_degree : 0;
  const int kmax = dim >= 3 ? total_degree : 0;
  for (int i = 0; i <= total_degree; ++i)
    for (int j = 0; j <= jmax; ++j)
      for (int k = 0; k <= kmax; ++k) {
        if (i + j + k > total_degree) continue;
        p.coeff(i, j, k) = rng.uniform(-1.0, 1.0);
      }
  return p;
}

}  // namespace stochquad
