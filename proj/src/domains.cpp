#include "latclt/domains.hpp"

#include <array>
#include <bit>

#include <algorithm>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

namespace latclt {

BlockSystem::BlockSystem(std::vector<MatrixD> blocks, ProductVariant variant)
    : dim_(0), variant_(variant), abs_det_(0.0) {
  if (blocks.empty()) throw std::invalid_argument("block system needs at least one block");
  dim_ = static_cast<int>(blocks.front().cols());
  int rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != dim_ || b.rows() < 1) {
      throw std::invalid_argument("block system: every block must be d_i x d");
    }
    if (!b.allFinite()) throw std::invalid_argument("block system: non-finite entry");
    offsets_.push_back(rows);
    sizes_.push_back(static_cast<int>(b.rows()));
    rows += static_cast<int>(b.rows());
  }
  if (rows != dim_) throw std::invalid_argument("block system: block sizes must sum to d");
  if (variant_ == ProductVariant::kSigned &&
      std::any_of(sizes_.begin(), sizes_.end(), [](int s) { return s != 1; })) {
    throw std::invalid_argument("signed product needs d one-dimensional forms");
  }
  stacked_ = MatrixD(dim_, dim_);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    stacked_.middleRows(offsets_[i], sizes_[i]) = blocks[i];
  }
  abs_det_ = std::abs(stacked_.determinant());
  if (!(abs_det_ > 1e-9)) throw std::invalid_argument("block system: stacked matrix is singular");
}

BlockSystem BlockSystem::identity(int d, ProductVariant variant) {
  std::vector<int> sizes(static_cast<std::size_t>(d), 1);
  return from_stacked(MatrixD::Identity(d, d), sizes, variant);
}

BlockSystem BlockSystem::identity_blocks(std::span<const int> sizes) {
  const int d = std::accumulate(sizes.begin(), sizes.end(), 0);
  return from_stacked(MatrixD::Identity(d, d), sizes, ProductVariant::kNorm);
}

BlockSystem BlockSystem::from_stacked(const MatrixD& stacked, std::span<const int> sizes,
                                      ProductVariant variant) {
  std::vector<MatrixD> blocks;
  int offset = 0;
  for (int s : sizes) {
    if (s < 1 || offset + s > stacked.rows()) {
      throw std::invalid_argument("block system: block sizes do not match the matrix");
    }
    blocks.emplace_back(stacked.middleRows(offset, s));
    offset += s;
  }
  return BlockSystem(std::move(blocks), variant);
}

double BlockSystem::block_norm(const VectorD& y, int i) const {
  if (sizes_[i] == 1) return std::abs(y(offsets_[i]));
  return y.segment(offsets_[i], sizes_[i]).norm();
}

BlockSystem BlockSystem::composed_with(const MatrixD& g) const {
  return from_stacked(stacked_ * g, sizes_, variant_);
}

ProductDomain::ProductDomain(BlockSystem system, double a, double b, double T)
    : system_(std::move(system)), a_(a), b_(b), T_(T) {
  if (!(a_ > 0.0 && a_ < b_ && std::isfinite(b_))) {
    throw std::invalid_argument("product domain: need 0 < a < b");
  }
  if (!(T_ >= 1.0 && std::isfinite(T_))) throw std::invalid_argument("product domain: need T >= 1");
}

namespace {

double product_from_coordinates(const BlockSystem& system, const VectorD& y) {
  long double p = 1.0L;
  if (system.variant() == ProductVariant::kSigned) {
    for (int i = 0; i < y.size(); ++i) p *= y(i);
  } else {
    for (int i = 0; i < system.num_blocks(); ++i) {
      const long double r = system.block_norm(y, i);
      for (int e = 0; e < system.block_size(i); ++e) p *= r;
    }
  }
  return static_cast<double>(p);
}

}  // namespace

double product_value(const BlockSystem& system, const VectorD& x) {
  if (x.size() != system.dim()) throw std::invalid_argument("product_value: dimension mismatch");
  return product_from_coordinates(system, system.block_coordinates(x));
}

bool contains(const ProductDomain& domain, const VectorD& x) {
  const BlockSystem& sys = domain.system();
  if (x.size() != sys.dim()) throw std::invalid_argument("contains: dimension mismatch");
  const VectorD y = sys.block_coordinates(x);
  for (int i = 0; i < sys.num_blocks(); ++i) {
    if (!(sys.block_norm(y, i) < domain.T())) return false;
  }
  const double n = product_from_coordinates(sys, y);
  return n > domain.a() && n < domain.b();
}

std::vector<VectorD> angular_coords(const BlockSystem& system, const VectorD& x) {
  const VectorD y = system.block_coordinates(x);
  std::vector<VectorD> out;
  out.reserve(static_cast<std::size_t>(system.num_blocks()));
  for (int i = 0; i < system.num_blocks(); ++i) {
    const double r = system.block_norm(y, i);
    if (r == 0.0) throw UndefinedDirection("radial projection of a zero block value");
    out.emplace_back(y.segment(system.block_offset(i), system.block_size(i)) / r);
  }
  return out;
}

AngularTarget::AngularTarget(std::vector<angular::Factor> factors) : factors_(std::move(factors)) {
  for (auto& f : factors_) {
    if (auto* arc = std::get_if<angular::Arc>(&f)) {
      if (!(arc->length >= 0.0 && arc->length <= 2.0 * std::numbers::pi)) {
        throw std::invalid_argument("arc length must lie in [0, 2pi]");
      }
      arc->start = std::fmod(arc->start, 2.0 * std::numbers::pi);
      if (arc->start < 0.0) arc->start += 2.0 * std::numbers::pi;
    } else if (auto* cap = std::get_if<angular::Cap>(&f)) {
      const double norm = cap->axis.norm();
      if (!(norm > 0.0)) throw std::invalid_argument("cap axis must be nonzero");
      cap->axis /= norm;
      if (!(cap->angle >= 0.0 && cap->angle <= std::numbers::pi)) {
        throw std::invalid_argument("cap angle must lie in [0, pi]");
      }
    }
  }
}

AngularTarget AngularTarget::full(int k) {
  return AngularTarget(std::vector<angular::Factor>(static_cast<std::size_t>(k), angular::Full{}));
}

void AngularTarget::check_compatible(const BlockSystem& system) const {
  if (size() != system.num_blocks()) {
    throw std::invalid_argument("angular target has " + std::to_string(size()) +
                                " factors but the system has " +
                                std::to_string(system.num_blocks()) + " blocks");
  }
  for (int i = 0; i < size(); ++i) {
    const int m = system.block_size(i);
    const auto& f = factors_[static_cast<std::size_t>(i)];
    const bool ok = std::visit(
        [m](const auto& factor) {
          using F = std::decay_t<decltype(factor)>;
          if constexpr (std::is_same_v<F, angular::Full>) return true;
          if constexpr (std::is_same_v<F, angular::Signs>) return m == 1;
          if constexpr (std::is_same_v<F, angular::Arc>) return m == 2;
          if constexpr (std::is_same_v<F, angular::Cap>) return m >= 3 && factor.axis.size() == m;
        },
        f);
    if (!ok) {
      throw std::invalid_argument("angular factor " + std::to_string(i) +
                                  " does not fit a block of size " + std::to_string(m));
    }
  }
}

bool AngularTarget::contains(const std::vector<VectorD>& directions) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const VectorD& w = directions[i];
    const bool in = std::visit(
        [&w](const auto& factor) {
          using F = std::decay_t<decltype(factor)>;
          if constexpr (std::is_same_v<F, angular::Full>) {
            return true;
          } else if constexpr (std::is_same_v<F, angular::Signs>) {
            return w(0) > 0.0 ? factor.plus : factor.minus;
          } else if constexpr (std::is_same_v<F, angular::Arc>) {
            double theta = std::atan2(w(1), w(0));
            if (theta < 0.0) theta += 2.0 * std::numbers::pi;
            double offset = theta - factor.start;
            if (offset < 0.0) offset += 2.0 * std::numbers::pi;
            return offset < factor.length;
          } else {
            const double c = std::clamp(w.dot(factor.axis), -1.0, 1.0);
            return std::acos(c) <= factor.angle;
          }
        },
        factors_[i]);
    if (!in) return false;
  }
  return true;
}

double cap_fraction(int m, double angle) {
  if (m < 2) throw std::invalid_argument("cap_fraction: need m >= 2");
  if (angle <= 0.0) return 0.0;
  if (angle >= std::numbers::pi) return 1.0;
  const double half_alpha = 0.5 * (m - 1);
  const double s = std::sin(angle);
  const double tail = 0.5 * boost::math::ibeta(half_alpha, 0.5, s * s);
  return angle <= 0.5 * std::numbers::pi ? tail : 1.0 - tail;
}

double angular_volume(const AngularTarget& target) {
  double v = 1.0;
  for (const auto& f : target.factors()) {
    v *= std::visit(
        [](const auto& factor) -> double {
          using F = std::decay_t<decltype(factor)>;
          if constexpr (std::is_same_v<F, angular::Full>) {
            return 1.0;
          } else if constexpr (std::is_same_v<F, angular::Signs>) {
            return 0.5 * (static_cast<int>(factor.plus) + static_cast<int>(factor.minus));
          } else if constexpr (std::is_same_v<F, angular::Arc>) {
            return factor.length / (2.0 * std::numbers::pi);
          } else {
            return cap_fraction(static_cast<int>(factor.axis.size()), factor.angle);
          }
        },
        f);
  }
  return v;
}

double spiral_fraction(const AngularTarget& target, const BlockSystem& system) {
  target.check_compatible(system);
  if (system.variant() == ProductVariant::kNorm) return angular_volume(target);
  // Signed forms: the domain holds only sign patterns with an even number of
  // minus signs, each carrying the same volume.
  const int k = target.size();
  std::vector<std::array<bool, 2>> allowed;
  for (const auto& f : target.factors()) {
    if (const auto* s = std::get_if<angular::Signs>(&f)) {
      allowed.push_back({s->plus, s->minus});
    } else {
      allowed.push_back({true, true});
    }
  }
  std::int64_t hits = 0;
  for (std::uint32_t pattern = 0; pattern < (1u << k); ++pattern) {
    if (std::popcount(pattern) % 2 != 0) continue;
    bool ok = true;
    for (int i = 0; i < k && ok; ++i) ok = allowed[static_cast<std::size_t>(i)][(pattern >> i) & 1u];
    hits += ok;
  }
  return static_cast<double>(hits) / static_cast<double>(1u << (k - 1));
}

double unit_ball_volume(int m) {
  return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

namespace {

// Volume of { u in (0,T_1) x ... x (0,T_k) : u_1...u_k < v } where
// prod T_i = e^{log_box}. Substituting u_i = T_i e^{-s_i} turns this into a
// Gamma(k,1) tail: v * sum_{j<k} l^j / j!, l = log_box - log v.
double sublevel_volume(int k, double log_box, double v) {
  const double l = log_box - std::log(v);
  if (l <= 0.0) return std::exp(log_box);
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < k; ++j) {
    term *= l / j;
    sum += term;
  }
  return v * sum;
}

}  // namespace

double domain_volume(const ProductDomain& domain) {
  const BlockSystem& sys = domain.system();
  const int k = sys.num_blocks();
  // In block coordinates each block contributes V_{d_i} d(rho^{d_i}); the
  // radial variables u_i = rho_i^{d_i} range over (0, T^{d_i}).
  const double log_box = sys.dim() * std::log(domain.T());
  const double radial = sublevel_volume(k, log_box, domain.b()) -
                        sublevel_volume(k, log_box, domain.a());
  double angular = 1.0;
  for (int i = 0; i < k; ++i) angular *= unit_ball_volume(sys.block_size(i));
  // Signed: only orthants with a positive product count.
  if (sys.variant() == ProductVariant::kSigned) angular *= 0.5;
  return angular * radial / sys.abs_det();
}

}  // namespace latclt
