#pragma once

#include <vector>

#include "stochquad/geometry.hpp"
#include "stochquad/rng.hpp"

namespace stochquad {

/// Dense multivariate polynomial in 1..3 variables, coefficients indexed by
/// per-variable degree. Degrees are small (quadrature orders go up to 3), so
/// dense storage and naive convolution are fine.
class Polynomial {
 public:
  Polynomial(int dim, int max_degree);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }

  double& coeff(int i, int j = 0, int k = 0) { return c_[index(i, j, k)]; }
  double coeff(int i, int j = 0, int k = 0) const { return c_[index(i, j, k)]; }

  double eval(const Vec& x) const;

  Polynomial multiply(const Polynomial& other) const;

  /// q(s) = p(A s + y); same total degree in the new variables.
  Polynomial compose_affine(const Mat& a, const Vec& y) const;

  /// Integral over the axis-aligned box [lo, hi]^dim.
  double integral_box(double lo, double hi) const;

  /// Integral over the unit simplex {s_i >= 0, sum s_i <= 1}.
  double integral_unit_simplex() const;

  /// Integral over a master element (box formula, or unit-simplex pullback).
  double integral_master(const MasterElement& master) const;

  /// Coefficients uniform in [-1, 1] on all multi-indices of total degree
  /// <= total_degree, zero elsewhere.
  static Polynomial random(int dim, int total_degree, RandomStream& rng);

 private:
  std::size_t index(int i, int j, int k) const;

  int dim_;
  int max_degree_;
  std::vector<double> c_;
};

}  // namespace stochquad
