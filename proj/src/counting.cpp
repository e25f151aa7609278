#include "latclt/counting.hpp"

#include <algorithm>
#include <cmath>

namespace latclt {

namespace {

// Largest integer e with 2^e < t, for t > 0.
int largest_exponent_below(double t) {
  int ex = 0;
  const double m = std::frexp(t, &ex);
  return m == 0.5 ? ex - 2 : ex - 1;
}

int floor_log2(double r) {
  int ex = 0;
  std::frexp(r, &ex);
  return ex - 1;
}

}  // namespace

TileCover tile_cover(const ProductDomain& domain) {
  const BlockSystem& sys = domain.system();
  const int k = sys.num_blocks();
  const int d = sys.dim();
  const int last = sys.block_size(k - 1);

  TileCover cover;
  cover.reference_low = domain.a() / std::exp2(d - last);
  cover.reference_high = domain.b();

  // N < T^d on the whole box, so nothing survives once a >= T^d.
  if (std::log(domain.a()) >= d * std::log(domain.T())) return cover;

  const double log2_a = std::log2(domain.a());
  const double log2_t = std::log2(domain.T());
  const int emax = largest_exponent_below(domain.T());
  for (int i = 0; i + 1 < k; ++i) {
    const int di = sys.block_size(i);
    // |L_i|^{d_i} > a / T^{d - d_i} because every other block is below T.
    const double lo = (log2_a - (d - di) * log2_t) / di;
    // One extra tile of slack below the bound.
    cover.exponent_min.push_back(static_cast<int>(std::floor(lo)) - 1);
    cover.exponent_max.push_back(emax);
    if (cover.exponent_min.back() > emax) return cover;
  }

  std::vector<int> e = cover.exponent_min;
  while (true) {
    DyadicTile tile;
    tile.exponents = e;
    tile.scaling = VectorD::Ones(d);
    int weighted_sum = 0;
    for (int i = 0; i + 1 < k; ++i) {
      const int di = sys.block_size(i);
      tile.scaling.segment(sys.block_offset(i), di).setConstant(std::exp2(-e[i]));
      weighted_sum += di * e[i];
    }
    const double last_scale = std::exp2(static_cast<double>(weighted_sum) / last);
    tile.scaling.segment(sys.block_offset(k - 1), last).setConstant(last_scale);
    const double last_bound =
        std::min(std::pow(domain.b(), 1.0 / last), domain.T() * last_scale);
    const double r = std::sqrt(4.0 * (k - 1) + last_bound * last_bound);
    tile.radius = r * (1.0 + 1e-7) + 1e-9;
    cover.tiles.push_back(std::move(tile));

    int i = 0;
    for (; i + 1 < k; ++i) {
      if (e[i] < cover.exponent_max[i]) {
        ++e[i];
        break;
      }
      e[i] = cover.exponent_min[i];
    }
    if (i + 1 >= k) break;
  }
  return cover;
}

bool tile_exponents(const BlockSystem& system, const VectorD& x, std::vector<int>& out) {
  const VectorD y = system.block_coordinates(x);
  out.clear();
  for (int i = 0; i + 1 < system.num_blocks(); ++i) {
    const double r = system.block_norm(y, i);
    if (r == 0.0) return false;
    out.push_back(floor_log2(r));
  }
  return true;
}

void for_each_domain_point(const UnimodularLattice& lattice, const ProductDomain& domain,
                           const std::function<void(const DomainPoint&)>& visitor,
                           EnumerationOptions options) {
  const BlockSystem& sys = domain.system();
  if (lattice.dim() != sys.dim()) throw std::invalid_argument("lattice/domain dimension mismatch");
  const TileCover cover = tile_cover(domain);
  const MatrixD mapped = sys.stacked() * lattice.basis();
  std::vector<int> exps;
  for (std::size_t t = 0; t < cover.tiles.size(); ++t) {
    const DyadicTile& tile = cover.tiles[t];
    const MatrixD tile_basis = tile.scaling.asDiagonal() * mapped;
    BallEnumerator enumerator(tile_basis, options);
    enumerator.visit(tile.radius, [&](const VectorD&, const IntVector& coeffs) {
      VectorD x = lattice.point(coeffs);
      if (!contains(domain, x)) return;
      if (!tile_exponents(sys, x, exps) || exps != tile.exponents) return;
      visitor(DomainPoint{std::move(x), coeffs, t});
    });
  }
}

std::int64_t count_in_domain(const UnimodularLattice& lattice, const ProductDomain& domain,
                             EnumerationOptions options) {
  std::int64_t n = 0;
  for_each_domain_point(lattice, domain, [&n](const DomainPoint&) { ++n; }, options);
  return n;
}

SpiralCounts count_domain_and_spiraling(const UnimodularLattice& lattice,
                                        const ProductDomain& domain, const AngularTarget& target,
                                        EnumerationOptions options) {
  target.check_compatible(domain.system());
  SpiralCounts counts;
  for_each_domain_point(
      lattice, domain,
      [&](const DomainPoint& p) {
        ++counts.in_domain;
        // Points of the domain have nonzero block values (N > a > 0).
        if (target.contains(angular_coords(domain.system(), p.x))) ++counts.in_target;
      },
      options);
  return counts;
}

std::int64_t count_spiraling(const UnimodularLattice& lattice, const ProductDomain& domain,
                             const AngularTarget& target, EnumerationOptions options) {
  return count_domain_and_spiraling(lattice, domain, target, options).in_target;
}

std::int64_t brute_force_count(const UnimodularLattice& lattice, const ProductDomain& domain,
                               const AngularTarget* target) {
  const BlockSystem& sys = domain.system();
  const int d = sys.dim();
  if (lattice.dim() != d) throw std::invalid_argument("lattice/domain dimension mismatch");
  if (target) target->check_compatible(sys);
  const MatrixD mapped = sys.stacked() * lattice.basis();
  const double inv_op = 1.0 / Eigen::JacobiSVD<MatrixD>(mapped).singularValues()(d - 1);
  if (!(domain.T() * inv_op <= kBruteForceLimit)) {
    throw IntractableBox("brute force box too large: T * |inverse| = " +
                         std::to_string(domain.T() * inv_op));
  }
  // Every block norm is below T, so |y| < sqrt(k) T and |m_i| <= |row_i of
  // the inverse| |y|.
  const MatrixD inverse = mapped.inverse();
  const double y_max = std::sqrt(static_cast<double>(sys.num_blocks())) * domain.T();
  IntVector bound(d);
  for (int i = 0; i < d; ++i) {
    bound(i) = static_cast<std::int64_t>(std::floor(y_max * inverse.row(i).norm())) + 1;
  }

  IntVector m = -bound;
  std::int64_t count = 0;
  while (true) {
    if (!m.isZero()) {
      const VectorD x = lattice.point(m);
      if (contains(domain, x) && (!target || target->contains(angular_coords(sys, x)))) ++count;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (m(i) < bound(i)) {
        ++m(i);
        break;
      }
      m(i) = -bound(i);
    }
    if (i == d) break;
  }
  return count;
}

}  // namespace latclt
