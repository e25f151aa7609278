#pragma once

// Exact lattice-point counts in product domains.
//
// The domain is cut into dyadic tiles: for the first k-1 blocks the block
// norm lies in [2^{e_i}, 2^{e_i+1}). A diagonal map (per block) sends every
// tile into one fixed bounded reference region, so each tile costs one ball
// enumeration of bounded radius. Candidates are re-tested with the canonical
// predicate on coordinates rebuilt from integer coefficients, and a point is
// credited only to the tile its own block norms select, so the sum is exact.

#include <cstdint>
#include <functional>
#include <vector>

#include "latclt/domains.hpp"
#include "latclt/lattice.hpp"

namespace latclt {

struct DyadicTile {
  std::vector<int> exponents;  // e_1..e_{k-1}
  VectorD scaling;             // diagonal of delta in block coordinates, det 1
  double radius;               // enclosing radius of the rescaled tile
};

struct TileCover {
  std::vector<DyadicTile> tiles;
  /// Reference region in rescaled block norms: [1,2) for blocks i < k, and
  /// last block norm^{d_k} in (reference_low, reference_high).
  double reference_low = 0.0;
  double reference_high = 0.0;
  std::vector<int> exponent_min;
  std::vector<int> exponent_max;
};

TileCover tile_cover(const ProductDomain& domain);

/// floor(log2 |L_i(x)|) for the first k-1 blocks. False if one of them is zero.
bool tile_exponents(const BlockSystem& system, const VectorD& x, std::vector<int>& out);

struct DomainPoint {
  VectorD x;
  IntVector coeffs;
  std::size_t tile;
};

/// Visits every nonzero lattice point in the domain exactly once.
void for_each_domain_point(const UnimodularLattice& lattice, const ProductDomain& domain,
                           const std::function<void(const DomainPoint&)>& visitor,
                           EnumerationOptions options = {});

std::int64_t count_in_domain(const UnimodularLattice& lattice, const ProductDomain& domain,
                             EnumerationOptions options = {});

std::int64_t count_spiraling(const UnimodularLattice& lattice, const ProductDomain& domain,
                             const AngularTarget& target,
                             EnumerationOptions options = {});

/// Both counts from one enumeration pass.
struct SpiralCounts {
  std::int64_t in_domain = 0;
  std::int64_t in_target = 0;
};
SpiralCounts count_domain_and_spiraling(const UnimodularLattice& lattice,
                                        const ProductDomain& domain, const AngularTarget& target,
                                        EnumerationOptions options = {});

class IntractableBox : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kBruteForceLimit = 1e3;

/// Exhaustive count over an integer coefficient box. Requires
/// T * |(stacked * basis)^{-1}|_op <= 1e3.
std::int64_t brute_force_count(const UnimodularLattice& lattice, const ProductDomain& domain,
                               const AngularTarget* target = nullptr);

}  // namespace latclt
