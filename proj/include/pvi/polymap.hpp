#pragma once

/*
 * Dense coefficient representation of polynomial maps P : R^n -> R^n.
 *
 * A map is stored as an n x m matrix A over a fixed graded monomial basis
 * X(x) = (1, x_1, ..., x_n, x_1^2, x_1 x_2, ..., x_n^d), so that
 * P(x) = A * X(x).  Columns are ordered by ascending total degree and, within
 * one degree, by decreasing lexicographic order of the exponent vectors.
 * This ordering is part of the on-disk format and is never inferred from
 * data; m = C(n+d, d).
 *
 * PolynomialMap values are immutable: every operation returns a new map.
 */

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "pvi/errors.hpp"

namespace pvi {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

class MonomialBasis {
 public:
  MonomialBasis(int n, int d);

  int n() const { return n_; }
  int d() const { return d_; }
  int size() const { return static_cast<int>(exps_.size()); }

  const std::vector<VectorXi>& exponents() const { return exps_; }
  const VectorXi& exponent(int col) const { return exps_[col]; }
  int degree_of(int col) const { return deg_[col]; }

  // Column index of an exponent vector, or -1 when it is not in the basis.
  int index_of(const VectorXi& a) const;

  // First column of the degree-k block and one past its last column.
  int block_begin(int k) const { return block_begin_[k]; }
  int block_end(int k) const { return block_begin_[k + 1]; }

  // Monomial vector X(x).  Columns are computed with the recurrence
  // X[c] = X[parent(c)] * x[var(c)], which the batch kernels reuse.
  VectorXd monomials(const VectorXd& x) const;
  const std::vector<int>& parent() const { return parent_; }
  const std::vector<int>& var() const { return var_; }

  bool operator==(const MonomialBasis& o) const {
    return n_ == o.n_ && d_ == o.d_;
  }

 private:
  int n_ = 0;
  int d_ = 0;
  std::vector<VectorXi> exps_;
  std::vector<int> deg_;
  std::vector<int> parent_;
  std::vector<int> var_;
  std::vector<int> block_begin_;
  std::map<std::vector<int>, int> index_;
};

class PolynomialMap {
 public:
  // coeffs must be n x size(basis); row l holds the coefficients of P_l.
  PolynomialMap(MonomialBasis basis, MatrixXd coeffs);

  static PolynomialMap zero(int n, int d);
  // Affine map x -> M x + q as a degree-1 coefficient matrix.
  static PolynomialMap affine(const MatrixXd& M, const VectorXd& q);

  const MonomialBasis& basis() const { return basis_; }
  const MatrixXd& coeffs() const { return coeffs_; }
  int n() const { return basis_.n(); }
  // Capacity degree of the container (the basis), not the effective degree.
  int container_degree() const { return basis_.d(); }

  VectorXd eval(const VectorXd& x) const;

  // Effective degree, recomputed from exactly-nonzero columns.  The zero map
  // reports degree 0.
  int degree() const;
  bool is_zero() const;

  // Degree-d homogeneous part, d = degree(); equals lim P(t x) / t^d.
  // Throws InputError on the zero map.
  PolynomialMap leading_term() const;

  // Components by total degree, index k in [0, degree()]; same basis, and the
  // coefficient matrices sum exactly to coeffs().
  std::vector<PolynomialMap> homogeneous_components() const;

  // True when every nonzero column has total degree exactly k.
  bool is_homogeneous(int k) const;

  double frobenius_norm() const { return coeffs_.norm(); }

  // Exact Jacobian via exponent shifts (no differencing).
  MatrixXd jacobian(const VectorXd& x) const;

  // P + p: adds p to the constant column.
  PolynomialMap shifted(const VectorXd& p) const;

  PolynomialMap scaled(double t) const;

  // Coefficient-wise sum; the result lives in the larger of the two bases.
  // Requires matching n.
  friend PolynomialMap add(const PolynomialMap& a, const PolynomialMap& b);

 private:
  struct DerivEntry {
    int src;        // column being differentiated
    int dst;        // column of the shifted exponent
    double factor;  // the exponent of the differentiated variable
  };

  MonomialBasis basis_;
  MatrixXd coeffs_;
  // deriv_[v] lists the nonzero contributions of d/dx_v.
  std::vector<std::vector<DerivEntry>> deriv_;

  void build_deriv_tables();
};

PolynomialMap add(const PolynomialMap& a, const PolynomialMap& b);

}  // namespace pvi
