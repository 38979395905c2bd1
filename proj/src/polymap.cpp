#include "pvi/polymap.hpp"

#include <cmath>
#include <string>

namespace pvi {

namespace {

// Exponent vectors of total degree k, in decreasing lexicographic order: the
// first position takes the largest share first, recursively.
void emit_degree_block(int n, int k, int pos, VectorXi& cur,
                       std::vector<VectorXi>& out) {
  if (pos == n - 1) {
    cur[pos] = k;
    out.push_back(cur);
    return;
  }
  for (int e = k; e >= 0; --e) {
    cur[pos] = e;
    emit_degree_block(n, k - e, pos + 1, cur, out);
  }
}

std::vector<int> key_of(const VectorXi& a) {
  return std::vector<int>(a.data(), a.data() + a.size());
}

}  // namespace

MonomialBasis::MonomialBasis(int n, int d) : n_(n), d_(d) {
  if (n < 1) throw InputError("monomial basis: n must be >= 1");
  if (d < 0) throw InputError("monomial basis: d must be >= 0");
  VectorXi cur = VectorXi::Zero(n);
  block_begin_.push_back(0);
  for (int k = 0; k <= d; ++k) {
    emit_degree_block(n, k, 0, cur, exps_);
    block_begin_.push_back(static_cast<int>(exps_.size()));
  }
  deg_.resize(exps_.size());
  parent_.resize(exps_.size());
  var_.resize(exps_.size());
  for (int c = 0; c < static_cast<int>(exps_.size()); ++c) {
    index_[key_of(exps_[c])] = c;
    deg_[c] = exps_[c].sum();
  }
  parent_[0] = -1;
  var_[0] = -1;
  for (int c = 1; c < static_cast<int>(exps_.size()); ++c) {
    int v = n - 1;
    while (exps_[c][v] == 0) --v;
    VectorXi shifted = exps_[c];
    shifted[v] -= 1;
    parent_[c] = index_.at(key_of(shifted));
    var_[c] = v;
  }
}

int MonomialBasis::index_of(const VectorXi& a) const {
  auto it = index_.find(key_of(a));
  return it == index_.end() ? -1 : it->second;
}

VectorXd MonomialBasis::monomials(const VectorXd& x) const {
  if (x.size() != n_) throw DimensionError("monomials: bad point dimension");
  VectorXd X(size());
  X[0] = 1.0;
  for (int c = 1; c < size(); ++c) X[c] = X[parent_[c]] * x[var_[c]];
  return X;
}

PolynomialMap::PolynomialMap(MonomialBasis basis, MatrixXd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() != basis_.n() || coeffs_.cols() != basis_.size()) {
    throw DimensionError(
        "polynomial map: coefficient matrix must be n x C(n+d,d), got " +
        std::to_string(coeffs_.rows()) + " x " + std::to_string(coeffs_.cols()));
  }
  build_deriv_tables();
}

void PolynomialMap::build_deriv_tables() {
  deriv_.assign(basis_.n(), {});
  for (int c = 0; c < basis_.size(); ++c) {
    const VectorXi& a = basis_.exponent(c);
    for (int v = 0; v < basis_.n(); ++v) {
      if (a[v] == 0) continue;
      VectorXi shifted = a;
      shifted[v] -= 1;
      deriv_[v].push_back({c, basis_.index_of(shifted), double(a[v])});
    }
  }
}

PolynomialMap PolynomialMap::zero(int n, int d) {
  MonomialBasis basis(n, d);
  const int m = basis.size();
  return PolynomialMap(std::move(basis), MatrixXd::Zero(n, m));
}

PolynomialMap PolynomialMap::affine(const MatrixXd& M, const VectorXd& q) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || q.size() != n)
    throw DimensionError("affine map: M must be n x n and q length n");
  MonomialBasis basis(n, 1);
  MatrixXd A = MatrixXd::Zero(n, basis.size());
  A.col(0) = q;
  // Degree-1 columns are x_1, ..., x_n in order.
  for (int j = 0; j < n; ++j) A.col(1 + j) = M.col(j);
  return PolynomialMap(std::move(basis), std::move(A));
}

VectorXd PolynomialMap::eval(const VectorXd& x) const {
  return coeffs_ * basis_.monomials(x);
}

int PolynomialMap::degree() const {
  int deg = 0;
  for (int c = 0; c < basis_.size(); ++c) {
    if (coeffs_.col(c).isZero(0.0)) continue;  // exact test, not a tolerance
    deg = std::max(deg, basis_.degree_of(c));
  }
  return deg;
}

bool PolynomialMap::is_zero() const { return coeffs_.isZero(0.0); }

PolynomialMap PolynomialMap::leading_term() const {
  if (is_zero()) throw InputError("leading_term: zero map has no leading term");
  const int deg = degree();
  MatrixXd A = MatrixXd::Zero(coeffs_.rows(), coeffs_.cols());
  for (int c = basis_.block_begin(deg); c < basis_.block_end(deg); ++c)
    A.col(c) = coeffs_.col(c);
  return PolynomialMap(basis_, std::move(A));
}

std::vector<PolynomialMap> PolynomialMap::homogeneous_components() const {
  const int deg = degree();
  std::vector<PolynomialMap> parts;
  parts.reserve(deg + 1);
  for (int k = 0; k <= deg; ++k) {
    MatrixXd A = MatrixXd::Zero(coeffs_.rows(), coeffs_.cols());
    for (int c = basis_.block_begin(k); c < basis_.block_end(k); ++c)
      A.col(c) = coeffs_.col(c);
    parts.emplace_back(basis_, std::move(A));
  }
  return parts;
}

bool PolynomialMap::is_homogeneous(int k) const {
  for (int c = 0; c < basis_.size(); ++c) {
    if (basis_.degree_of(c) == k) continue;
    if (!coeffs_.col(c).isZero(0.0)) return false;
  }
  return true;
}

MatrixXd PolynomialMap::jacobian(const VectorXd& x) const {
  const VectorXd X = basis_.monomials(x);
  MatrixXd J = MatrixXd::Zero(basis_.n(), basis_.n());
  for (int v = 0; v < basis_.n(); ++v) {
    for (const DerivEntry& e : deriv_[v]) {
      const double t = e.factor * X[e.dst];
      for (int l = 0; l < basis_.n(); ++l) J(l, v) += coeffs_(l, e.src) * t;
    }
  }
  return J;
}

PolynomialMap PolynomialMap::shifted(const VectorXd& p) const {
  if (p.size() != basis_.n())
    throw DimensionError("shifted: p has wrong dimension");
  MatrixXd A = coeffs_;
  A.col(0) += p;
  return PolynomialMap(basis_, std::move(A));
}

PolynomialMap PolynomialMap::scaled(double t) const {
  return PolynomialMap(basis_, coeffs_ * t);
}

PolynomialMap add(const PolynomialMap& a, const PolynomialMap& b) {
  if (a.n() != b.n()) throw DimensionError("add: component counts differ");
  const int d = std::max(a.container_degree(), b.container_degree());
  MonomialBasis basis(a.n(), d);
  MatrixXd A = MatrixXd::Zero(a.n(), basis.size());
  // Column layouts agree on the common prefix: blocks are by degree and the
  // within-block order depends only on n.
  A.leftCols(a.basis().size()) += a.coeffs();
  A.leftCols(b.basis().size()) += b.coeffs();
  return PolynomialMap(std::move(basis), std::move(A));
}

}  // namespace pvi
