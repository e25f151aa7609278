#include "latclt/lattice.hpp"

#include <algorithm>
#include <utility>

namespace latclt {

namespace {

struct GramSchmidt {
  MatrixD mu;
  VectorD bstar_sq;
};

GramSchmidt gram_schmidt(const MatrixD& b) {
  const int n = static_cast<int>(b.cols());
  GramSchmidt gs{MatrixD::Zero(n, n), VectorD::Zero(n)};
  MatrixD bstar = b;
  for (int i = 0; i < n; ++i) {
    gs.mu(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      gs.mu(i, j) = b.col(i).dot(bstar.col(j)) / gs.bstar_sq(j);
      bstar.col(i) -= gs.mu(i, j) * bstar.col(j);
    }
    gs.bstar_sq(i) = bstar.col(i).squaredNorm();
  }
  return gs;
}

void check_square(const MatrixD& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > kMaxDim) {
    throw std::invalid_argument(std::string(what) + ": expected a square matrix of size 1.." +
                                std::to_string(kMaxDim));
  }
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

}  // namespace

UnimodularLattice::UnimodularLattice(MatrixD basis) : basis_(std::move(basis)) {
  check_square(basis_, "lattice basis");
  const double det = basis_.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw std::invalid_argument("lattice basis is singular");
  }
  const double scale = std::pow(std::abs(det), -1.0 / static_cast<double>(basis_.cols()));
  if (scale != 1.0) basis_ *= scale;
}

VectorD UnimodularLattice::point(const IntVector& coeffs) const { return combine(basis_, coeffs); }

UnimodularLattice lattice_from_point(std::span<const double> x) {
  const int d = static_cast<int>(x.size());
  if (d < 1 || d + 1 > kMaxDim) throw std::invalid_argument("lattice_from_point: bad dimension");
  MatrixD b = MatrixD::Identity(d + 1, d + 1);
  for (int i = 0; i < d; ++i) b(i, d) = -x[i];
  return UnimodularLattice(std::move(b));
}

double condition_number(const MatrixD& m) {
  Eigen::JacobiSVD<MatrixD> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

VectorD combine(const MatrixD& basis, const IntVector& coeffs) {
  const int rows = static_cast<int>(basis.rows());
  VectorD v(rows);
  for (int r = 0; r < rows; ++r) {
    long double acc = 0.0L;
    for (int c = 0; c < coeffs.size(); ++c) {
      acc += static_cast<long double>(basis(r, c)) * static_cast<long double>(coeffs(c));
    }
    v(r) = static_cast<double>(acc);
  }
  return v;
}

Reduction lll_reduce_basis(const MatrixD& basis, double delta) {
  check_square(basis, "lll_reduce");
  if (!(delta > 0.25 && delta < 1.0)) throw std::invalid_argument("LLL delta must lie in (0.25, 1)");
  const double cond = condition_number(basis);
  if (!(cond <= kMaxConditionNumber)) {
    throw IllConditionedError("basis condition number " + std::to_string(cond) +
                              " exceeds 1e12");
  }
  const int n = static_cast<int>(basis.cols());
  MatrixD b = basis;
  IntMatrix u = IntMatrix::Identity(n, n);
  GramSchmidt gs = gram_schmidt(b);

  int k = 1;
  int iterations = 0;
  while (k < n) {
    if (++iterations > 1'000'000) throw IllConditionedError("LLL did not terminate");
    // Size-reduce column k; repeated because large multipliers lose digits.
    for (int pass = 0; pass < 8; ++pass) {
      bool changed = false;
      for (int j = k - 1; j >= 0; --j) {
        const double r = std::round(gs.mu(k, j));
        if (r == 0.0) continue;
        changed = true;
        b.col(k) -= r * b.col(j);
        u.col(k) -= static_cast<std::int64_t>(r) * u.col(j);
        for (int i = 0; i <= j; ++i) gs.mu(k, i) -= r * gs.mu(j, i);
      }
      if (!changed) break;
      gs = gram_schmidt(b);
    }
    const double mu = gs.mu(k, k - 1);
    if (gs.bstar_sq(k) >= (delta - mu * mu) * gs.bstar_sq(k - 1)) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      u.col(k).swap(u.col(k - 1));
      gs = gram_schmidt(b);
      k = std::max(k - 1, 1);
    }
  }

  // Drop accumulated rounding: rebuild the basis from the integer transform.
  Reduction out{MatrixD(n, n), std::move(u)};
  for (int c = 0; c < n; ++c) {
    IntVector col = out.transform.col(c);
    out.basis.col(c) = combine(basis, col);
  }
  return out;
}

UnimodularLattice lll_reduce(const UnimodularLattice& lattice, double delta) {
  return UnimodularLattice(lll_reduce_basis(lattice.basis(), delta).basis);
}

bool is_lll_reduced(const MatrixD& basis, double delta, double tol) {
  const GramSchmidt gs = gram_schmidt(basis);
  const int n = static_cast<int>(basis.cols());
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (std::abs(gs.mu(i, j)) > 0.5 + tol) return false;
    }
    const double mu = gs.mu(i, i - 1);
    if (gs.bstar_sq(i) < (delta - mu * mu) * gs.bstar_sq(i - 1) * (1.0 - tol)) return false;
  }
  return true;
}

BallEnumerator::BallEnumerator(const MatrixD& basis, EnumerationOptions options)
    : dim_(static_cast<int>(basis.cols())),
      cap_(options.cap),
      basis_(basis),
      reduction_(lll_reduce_basis(basis, options.delta)) {
  GramSchmidt gs = gram_schmidt(reduction_.basis);
  mu_ = std::move(gs.mu);
  bstar_sq_ = std::move(gs.bstar_sq);
}

std::vector<LatticeVector> BallEnumerator::collect(double radius) const {
  std::vector<LatticeVector> out;
  visit(radius, [&](const VectorD& v, const IntVector& coeffs) { out.push_back({v, coeffs}); });
  return out;
}

std::vector<LatticeVector> enumerate_in_ball(const UnimodularLattice& lattice, double radius,
                                             EnumerationOptions options) {
  return BallEnumerator(lattice.basis(), options).collect(radius);
}

UnimodularLattice apply(const MatrixD& g, const UnimodularLattice& lattice) {
  check_square(g, "apply");
  if (g.rows() != lattice.dim()) throw std::invalid_argument("apply: dimension mismatch");
  if (std::abs(std::abs(g.determinant()) - 1.0) > 1e-9) {
    throw std::invalid_argument("apply: matrix is not unimodular");
  }
  return UnimodularLattice(g * lattice.basis());
}

MatrixD diagonal(std::span<const double> entries) {
  const int n = static_cast<int>(entries.size());
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("diagonal: bad dimension");
  long double product = 1.0L;
  for (double e : entries) product *= e;
  if (std::abs(static_cast<double>(product) - 1.0) > 1e-9) {
    throw std::invalid_argument("diagonal: entries must multiply to 1");
  }
  MatrixD m = MatrixD::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = entries[i];
  return m;
}

MatrixD weighted_flow(std::span<const double> weights, double t) {
  std::vector<double> entries;
  entries.reserve(weights.size() + 1);
  double sum = 0.0;
  for (double w : weights) {
    entries.push_back(std::exp(w * t));
    sum += w;
  }
  // The last entry absorbs rounding in the weights so the product is exact-ish.
  entries.push_back(std::exp(-sum * t));
  return diagonal(entries);
}

}  // namespace latclt
