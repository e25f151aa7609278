#pragma once

// Product-of-linear-forms regions and angular targets.
//
//   signed:  { x : L_1(x)...L_d(x) in (a,b), |L_i(x)| < T }
//   norm:    { x : prod |L_i(x)|^{d_i} in (a,b), |L_i(x)| < T }
//
// where each L_i is a d_i x d block and the stacked d x d matrix is invertible.

#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "latclt/lattice.hpp"

namespace latclt {

enum class ProductVariant { kSigned, kNorm };

class BlockSystem {
 public:
  BlockSystem(std::vector<MatrixD> blocks, ProductVariant variant);

  /// d identity forms, one per coordinate.
  static BlockSystem identity(int d, ProductVariant variant = ProductVariant::kSigned);
  /// Identity map split into consecutive blocks of the given sizes (norm variant).
  static BlockSystem identity_blocks(std::span<const int> sizes);
  /// Stacked matrix given directly, split into consecutive blocks.
  static BlockSystem from_stacked(const MatrixD& stacked, std::span<const int> sizes,
                                  ProductVariant variant);

  int dim() const { return dim_; }
  int num_blocks() const { return static_cast<int>(sizes_.size()); }
  int block_size(int i) const { return sizes_[i]; }
  int block_offset(int i) const { return offsets_[i]; }
  const std::vector<int>& block_sizes() const { return sizes_; }
  ProductVariant variant() const { return variant_; }
  const MatrixD& stacked() const { return stacked_; }
  double abs_det() const { return abs_det_; }

  VectorD block_coordinates(const VectorD& x) const { return stacked_ * x; }
  /// |L_i(x)| given the block coordinates y = stacked * x.
  double block_norm(const VectorD& y, int i) const;

  /// The system x -> L(g x).
  BlockSystem composed_with(const MatrixD& g) const;

 private:
  int dim_;
  ProductVariant variant_;
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  MatrixD stacked_;
  double abs_det_;
};

class ProductDomain {
 public:
  ProductDomain(BlockSystem system, double a, double b, double T);

  const BlockSystem& system() const { return system_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double T() const { return T_; }

  ProductDomain with_T(double T) const { return ProductDomain(system_, a_, b_, T); }
  ProductDomain with_system(BlockSystem system) const {
    return ProductDomain(std::move(system), a_, b_, T_);
  }

 private:
  BlockSystem system_;
  double a_;
  double b_;
  double T_;
};

double product_value(const BlockSystem& system, const VectorD& x);
bool contains(const ProductDomain& domain, const VectorD& x);

class UndefinedDirection : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Radial projections L_i(x)/|L_i(x)|; throws UndefinedDirection on a zero block.
std::vector<VectorD> angular_coords(const BlockSystem& system, const VectorD& x);

namespace angular {

struct Full {};
struct Signs {
  bool plus = true;
  bool minus = true;
};
/// Half-open arc [start, start + length) on the unit circle, angles in radians.
struct Arc {
  double start = 0.0;
  double length = 0.0;
};
/// Spherical cap of the given opening angle around a unit axis.
struct Cap {
  VectorD axis;
  double angle = 0.0;
};

using Factor = std::variant<Full, Signs, Arc, Cap>;

}  // namespace angular

/// Product target D = D_1 x ... x D_k on the product of spheres.
class AngularTarget {
 public:
  AngularTarget() = default;
  explicit AngularTarget(std::vector<angular::Factor> factors);

  static AngularTarget full(int k);

  const std::vector<angular::Factor>& factors() const { return factors_; }
  int size() const { return static_cast<int>(factors_.size()); }

  /// Checks the factor kinds against the block sizes of a system.
  void check_compatible(const BlockSystem& system) const;

  bool contains(const std::vector<VectorD>& directions) const;

 private:
  std::vector<angular::Factor> factors_;
};

double angular_volume(const AngularTarget& target);
/// Limit of |S_T(D)| / vol(Omega_T). Equals angular_volume for norm forms;
/// signed forms only reach sign patterns with positive product.
double spiral_fraction(const AngularTarget& target, const BlockSystem& system);
/// Normalized surface measure of a cap in S^{m-1}.
double cap_fraction(int m, double angle);

/// Lebesgue volume of the domain.
double domain_volume(const ProductDomain& domain);
/// Volume of the unit ball in R^m.
double unit_ball_volume(int m);

}  // namespace latclt
