#pragma once

// Unimodular lattices, LLL reduction and Fincke-Pohst enumeration.
//
// Bases are stored column-wise: the columns of the basis matrix generate the
// lattice and a matrix g acts by left multiplication, g * basis.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace latclt {

inline constexpr int kMaxDim = 8;

using MatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using VectorD = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

inline constexpr double kDefaultDelta = 0.99;
inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;
inline constexpr double kMaxConditionNumber = 1e12;

struct EnumerationOptions {
  double delta = kDefaultDelta;  // LLL parameter of the preprocessing step
  std::size_t cap = kDefaultEnumerationCap;
};

class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EnumerationOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A full-rank lattice of covolume one. The basis is rescaled on
/// construction so that |det| = 1.
class UnimodularLattice {
 public:
  explicit UnimodularLattice(MatrixD basis);

  const MatrixD& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.cols()); }

  /// The point with the given integer coordinates.
  VectorD point(const IntVector& coeffs) const;

 private:
  MatrixD basis_;
};

/// {(p - q x, q) : p in Z^d, q in Z}; the basis is the identity with last
/// column (-x_1, ..., -x_d, 1).
UnimodularLattice lattice_from_point(std::span<const double> x);

struct Reduction {
  MatrixD basis;        // input basis * transform
  IntMatrix transform;  // integer, det +-1
};

/// LLL reduction of an arbitrary full-rank basis. Throws IllConditionedError
/// when the condition number of the input exceeds kMaxConditionNumber.
Reduction lll_reduce_basis(const MatrixD& basis, double delta = kDefaultDelta);

UnimodularLattice lll_reduce(const UnimodularLattice& lattice, double delta = kDefaultDelta);

/// Size-reduction and Lovasz conditions, up to `tol` slack.
bool is_lll_reduced(const MatrixD& basis, double delta, double tol = 1e-9);

struct LatticeVector {
  VectorD v;
  IntVector coeffs;  // with respect to the basis handed to the enumerator
};

/// Enumerates nonzero lattice vectors in closed Euclidean balls around the
/// origin. Construction performs the LLL preprocessing and Gram-Schmidt
/// bookkeeping once; `visit` may then be called for several radii.
class BallEnumerator {
 public:
  explicit BallEnumerator(const MatrixD& basis, EnumerationOptions options = {});

  int dim() const { return dim_; }
  const MatrixD& basis() const { return basis_; }
  const Reduction& reduction() const { return reduction_; }

  /// Calls visit(const VectorD& v, const IntVector& coeffs) once for every
  /// nonzero v with |v| <= radius. Coordinates of v are recomputed from the
  /// integer coefficients and the original basis.
  template <class Visitor>
  void visit(double radius, Visitor&& visitor) const;

  std::vector<LatticeVector> collect(double radius) const;

 private:
  template <class Visitor>
  void descend(int level, double partial, double bound_sq, double radius_sq,
               Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>& c, std::size_t& emitted,
               Visitor& visitor) const;

  int dim_;
  std::size_t cap_;
  MatrixD basis_;
  Reduction reduction_;
  MatrixD mu_;
  VectorD bstar_sq_;
};

std::vector<LatticeVector> enumerate_in_ball(const UnimodularLattice& lattice, double radius,
                                             EnumerationOptions options = {});

/// g * lattice; g must have |det| = 1 within 1e-9.
UnimodularLattice apply(const MatrixD& g, const UnimodularLattice& lattice);

/// Diagonal matrix; the entries must multiply to 1 within 1e-9.
MatrixD diagonal(std::span<const double> entries);

/// a_w(t) = diag(e^{w_1 t}, ..., e^{w_d t}, e^{-t}).
MatrixD weighted_flow(std::span<const double> weights, double t);

/// Long-double product basis * coeffs.
VectorD combine(const MatrixD& basis, const IntVector& coeffs);

double condition_number(const MatrixD& m);

// ---------------------------------------------------------------------------

template <class Visitor>
void BallEnumerator::visit(double radius, Visitor&& visitor) const {
  if (!(radius >= 0.0)) throw std::invalid_argument("enumeration radius must be >= 0");
  const double radius_sq = radius * radius;
  // Slightly enlarged search; the final test is done on recomputed vectors.
  const double bound_sq = radius_sq * (1.0 + 1e-9) + 1e-12;
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1> c(dim_);
  c.setZero();
  std::size_t emitted = 0;
  descend(dim_ - 1, 0.0, bound_sq, radius_sq, c, emitted, visitor);
}

template <class Visitor>
void BallEnumerator::descend(int level, double partial, double bound_sq, double radius_sq,
                             Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>& c,
                             std::size_t& emitted, Visitor& visitor) const {
  double center = 0.0;
  for (int j = level + 1; j < dim_; ++j) center -= mu_(j, level) * c(j);
  const double slack = (bound_sq - partial) / bstar_sq_(level);
  if (slack < 0.0) return;
  const double half = std::sqrt(slack);
  const double lo = std::ceil(center - half);
  const double hi = std::floor(center + half);
  for (double ci = lo; ci <= hi; ci += 1.0) {
    const double diff = ci - center;
    const double p = partial + diff * diff * bstar_sq_(level);
    if (p > bound_sq) continue;
    c(level) = ci;
    if (level > 0) {
      descend(level - 1, p, bound_sq, radius_sq, c, emitted, visitor);
      continue;
    }
    if (c.isZero()) continue;
    IntVector reduced_coeffs(dim_);
    for (int i = 0; i < dim_; ++i) reduced_coeffs(i) = static_cast<std::int64_t>(c(i));
    IntVector coeffs = reduction_.transform * reduced_coeffs;
    VectorD v = combine(basis_, coeffs);
    if (v.squaredNorm() > radius_sq) continue;
    if (++emitted > cap_) {
      throw EnumerationOverflow("ball enumeration exceeded cap of " + std::to_string(cap_) +
                                " points");
    }
    visitor(static_cast<const VectorD&>(v), static_cast<const IntVector&>(coeffs));
  }
  c(level) = 0.0;
}

}  // namespace latclt
