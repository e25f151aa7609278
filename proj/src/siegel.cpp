#include "latclt/siegel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace latclt {

TestFunction TestFunction::ball(double radius) {
  if (!(radius > 0.0 && std::isfinite(radius))) throw std::invalid_argument("ball radius must be > 0");
  TestFunction f;
  f.kind_ = Kind::kBall;
  f.radius_ = radius;
  f.support_ = radius;
  return f;
}

TestFunction TestFunction::box(std::vector<double> half_widths) {
  if (half_widths.empty()) throw std::invalid_argument("box needs at least one half-width");
  double sq = 0.0;
  for (double h : half_widths) {
    if (!(h > 0.0 && std::isfinite(h))) throw std::invalid_argument("box half-widths must be > 0");
    sq += h * h;
  }
  TestFunction f;
  f.kind_ = Kind::kBox;
  f.half_widths_ = std::move(half_widths);
  f.support_ = std::sqrt(sq);
  return f;
}

TestFunction TestFunction::radial_bump(double radius, double margin) {
  if (!(radius > 0.0 && margin > 0.0 && margin <= radius)) {
    throw std::invalid_argument("radial bump needs 0 < margin <= radius");
  }
  TestFunction f;
  f.kind_ = Kind::kRadialBump;
  f.radius_ = radius;
  f.margin_ = margin;
  f.support_ = radius;
  return f;
}

double TestFunction::operator()(const VectorD& v) const {
  switch (kind_) {
    case Kind::kBall:
      return v.squaredNorm() <= radius_ * radius_ ? 1.0 : 0.0;
    case Kind::kBox: {
      if (static_cast<std::size_t>(v.size()) != half_widths_.size()) {
        throw std::invalid_argument("box test function: dimension mismatch");
      }
      for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > half_widths_[static_cast<std::size_t>(i)]) return 0.0;
      }
      return 1.0;
    }
    case Kind::kRadialBump: {
      const double s = v.norm();
      const double inner = radius_ - margin_;
      if (s <= inner) return 1.0;
      if (s >= radius_) return 0.0;
      return 0.5 * (1.0 + std::cos(std::numbers::pi * (s - inner) / margin_));
    }
  }
  return 0.0;
}

TestFunction TestFunction::box_pullback(std::span<const double> diag) const {
  if (kind_ != Kind::kBox || diag.size() != half_widths_.size()) {
    throw std::invalid_argument("box_pullback: needs a box of matching dimension");
  }
  std::vector<double> h(half_widths_.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = half_widths_[i] / std::abs(diag[i]);
  return box(std::move(h));
}

double siegel_transform(const TestFunction& f, const BallEnumerator& enumerator) {
  double sum = 0.0;
  enumerator.visit(f.support_radius(), [&](const VectorD& v, const IntVector&) { sum += f(v); });
  return sum;
}

double siegel_transform(const TestFunction& f, const UnimodularLattice& lattice, EnumerationOptions options) {
  return siegel_transform(f, BallEnumerator(lattice.basis(), options));
}

// ---------------------------------------------------------------------------

DiophantineProblem::DiophantineProblem(std::vector<double> weights, std::vector<double> constants)
    : weights_(std::move(weights)), constants_(std::move(constants)) {
  const std::size_t d = weights_.size();
  if (d < 1 || d + 1 > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("diophantine problem: dimension must be 1.." +
                                std::to_string(kMaxDim - 1));
  }
  if (constants_.size() != d) throw std::invalid_argument("diophantine problem: need d constants");
  for (double c : constants_) {
    if (!(c > 0.0 && std::isfinite(c))) throw std::invalid_argument("constants c_i must be > 0");
  }
  if (d == 1) {
    // The classical problem |x - p/q| < c/q^2.
    if (weights_[0] != 1.0) throw std::invalid_argument("d = 1 requires weight w_1 = 1");
    return;
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("weights must lie in (0,1)");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("weights must sum to 1 (sum w_i = 1)");
}

double DiophantineProblem::mean_coefficient() const {
  double m = std::exp2(dim());
  for (double c : constants_) m *= c;
  return m;
}

namespace {

inline double coordinate_radius(double c, double w, std::int64_t q) {
  return c * std::pow(static_cast<double>(q), -w);
}

inline bool coordinate_ok(double x, double radius, std::int64_t p, std::int64_t q) {
  return std::abs(std::fma(static_cast<double>(q), x, -static_cast<double>(p))) < radius;
}

}  // namespace

bool approximates(const DiophantineProblem& problem, std::span<const double> x,
                  std::span<const std::int64_t> p, std::int64_t q) {
  if (q < 1) return false;
  for (int i = 0; i < problem.dim(); ++i) {
    const double r = coordinate_radius(problem.constants()[i], problem.weights()[i], q);
    if (!coordinate_ok(x[i], r, p[i], q)) return false;
  }
  return true;
}

std::int64_t dioph_count_direct(const DiophantineProblem& problem, std::span<const double> x,
                                double T) {
  if (static_cast<int>(x.size()) != problem.dim()) {
    throw std::invalid_argument("dioph_count_direct: dimension mismatch");
  }
  if (!(T >= 1.0)) return 0;
  const auto q_end = static_cast<std::int64_t>(std::ceil(T));  // q < T
  std::int64_t total = 0;
  for (std::int64_t q = 1; q < q_end; ++q) {
    std::int64_t product = 1;
    for (int i = 0; i < problem.dim() && product > 0; ++i) {
      const double r = coordinate_radius(problem.constants()[i], problem.weights()[i], q);
      const double center = static_cast<double>(q) * x[i];
      const auto lo = static_cast<std::int64_t>(std::floor(center - r)) - 1;
      const auto hi = static_cast<std::int64_t>(std::ceil(center + r)) + 1;
      std::int64_t n = 0;
      for (std::int64_t p = lo; p <= hi; ++p) n += coordinate_ok(x[i], r, p, q) ? 1 : 0;
      product *= n;
    }
    total += product;
  }
  return total;
}

std::vector<std::int64_t> dioph_counts_dyadic(const DiophantineProblem& problem,
                                              std::span<const double> x, int max_N,
                                              EnumerationOptions options) {
  const int d = problem.dim();
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("dioph count: dimension mismatch");
  if (max_N < 0 || max_N > 60) throw std::invalid_argument("dioph count: N must lie in 0..60");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(max_N) + 1, 0);
  if (max_N == 0) return counts;

  // The window {1 <= y < 2, |v_i| < c_i y^{-w_i}} sits inside this ball.
  double r2 = 4.0;
  for (double c : problem.constants()) r2 += c * c;
  const double radius = std::sqrt(r2) * (1.0 + 1e-9);

  std::vector<Quad> xq(x.begin(), x.end());
  TorusTranslate translate(std::move(xq), problem.weights());
  std::vector<std::int64_t> p(static_cast<std::size_t>(d));
  std::int64_t running = 0;
  for (int n = 0; n < max_N; ++n) {
    translate.advance_to(n * std::numbers::ln2);
    const std::int64_t q_lo = std::int64_t{1} << n;
    const std::int64_t q_hi = q_lo << 1;
    BallEnumerator enumerator(translate.basis(), options);
    enumerator.visit(radius, [&](const VectorD&, const IntVector& coeffs) {
      const IntVector pq = translate.coordinates() * coeffs;
      const std::int64_t q = pq(d);
      if (q < q_lo || q >= q_hi) return;
      for (int i = 0; i < d; ++i) p[static_cast<std::size_t>(i)] = pq(i);
      if (approximates(problem, x, p, q)) ++running;
    });
    counts[static_cast<std::size_t>(n) + 1] = running;
  }
  return counts;
}

std::int64_t dioph_count_dynamical(const DiophantineProblem& problem, std::span<const double> x,
                                   int N, EnumerationOptions options) {
  return dioph_counts_dyadic(problem, x, N, options).back();
}

// ---------------------------------------------------------------------------

FlowElement FlowElement::dioph_step(const DiophantineProblem& problem) {
  const int d = problem.dim();
  FlowElement g{VectorD(d + 1)};
  for (int i = 0; i < d; ++i) g.entries(i) = std::exp2(problem.weights()[i]);
  g.entries(d) = 0.5;
  return g;
}

FlowElement FlowElement::weighted(std::span<const double> weights, double t) {
  const int d = static_cast<int>(weights.size());
  FlowElement g{VectorD(d + 1)};
  for (int i = 0; i < d; ++i) g.entries(i) = std::exp(weights[i] * t);
  g.entries(d) = std::exp(-t);
  return g;
}

FlowElement FlowElement::equal_weights(int d, double t) {
  std::vector<double> w(static_cast<std::size_t>(d), 1.0 / d);
  return weighted(w, t);
}

MatrixD FlowElement::matrix() const {
  return diagonal(std::span<const double>(entries.data(), static_cast<std::size_t>(entries.size())));
}

double separation(const FlowElement& g1, const FlowElement& g2) {
  if (g1.entries.size() != g2.entries.size()) throw std::invalid_argument("separation: dimension mismatch");
  double m = 0.0;
  for (int i = 0; i < g1.entries.size(); ++i) {
    m = std::max(m, std::abs(std::log(g1.entries(i)) - std::log(g2.entries(i))));
  }
  return m;
}

UnimodularLattice flow_translate(const UnimodularLattice& lattice,
                                 std::span<const double> log_diagonal) {
  const int n = lattice.dim();
  if (static_cast<int>(log_diagonal.size()) != n) {
    throw std::invalid_argument("flow_translate: dimension mismatch");
  }
  double sum = 0.0;
  double spread = 0.0;
  for (double l : log_diagonal) {
    sum += l;
    spread = std::max(spread, std::abs(l));
  }
  if (std::abs(sum) > 1e-9) throw std::invalid_argument("flow_translate: entries must multiply to 1");
  const int steps = std::max(1, static_cast<int>(std::ceil(spread / 4.0)));
  VectorD step(n);
  for (int i = 0; i < n; ++i) step(i) = std::exp(log_diagonal[static_cast<std::size_t>(i)] / steps);
  MatrixD b = lll_reduce_basis(lattice.basis()).basis;
  for (int s = 0; s < steps; ++s) b = lll_reduce_basis(step.asDiagonal() * b).basis;
  return UnimodularLattice(std::move(b));
}

// ---------------------------------------------------------------------------

TorusTranslate::TorusTranslate(std::vector<Quad> x, std::vector<double> weights)
    : x_(std::move(x)), weights_(std::move(weights)) {
  const int n = dim();
  if (x_.empty() || n > kMaxDim || weights_.size() != x_.size()) {
    throw std::invalid_argument("torus translate: bad dimension");
  }
  coords_ = IntMatrix::Identity(n, n);
  basis_ = MatrixD(n, n);
  rebuild();
}

void TorusTranslate::rebuild() {
  const int d = dim() - 1;
  VectorD scale(d + 1);
  for (int i = 0; i < d; ++i) scale(i) = std::exp(weights_[static_cast<std::size_t>(i)] * time_);
  scale(d) = std::exp(-time_);
  for (int j = 0; j <= d; ++j) {
    const Quad q = static_cast<Quad>(coords_(d, j));
    for (int i = 0; i < d; ++i) {
      const Quad v = static_cast<Quad>(coords_(i, j)) - q * x_[static_cast<std::size_t>(i)];
      basis_(i, j) = scale(i) * static_cast<double>(v);
    }
    basis_(d, j) = scale(d) * static_cast<double>(coords_(d, j));
  }
}

VectorD TorusTranslate::vector_of(const IntVector& pq) const {
  const int d = dim() - 1;
  VectorD v(d + 1);
  for (int i = 0; i < d; ++i) {
    const Quad diff = static_cast<Quad>(pq(i)) - static_cast<Quad>(pq(d)) * x_[static_cast<std::size_t>(i)];
    v(i) = std::exp(weights_[static_cast<std::size_t>(i)] * time_) * static_cast<double>(diff);
  }
  v(d) = std::exp(-time_) * static_cast<double>(pq(d));
  return v;
}

void TorusTranslate::advance_to(double t) {
  if (t < time_) throw std::invalid_argument("torus translate: time must not decrease");
  const double wmax = *std::max_element(weights_.begin(), weights_.end());
  // Each step stretches the basis by at most 2^16.
  const double max_step = 16.0 * std::numbers::ln2 / (1.0 + wmax);
  while (time_ < t) {
    time_ = std::min(t, time_ + max_step);
    rebuild();
    const Reduction r = lll_reduce_basis(basis_);
    coords_ = coords_ * r.transform;
    rebuild();
  }
}

std::vector<Quad> uniform_torus_point(int d, Rng& rng) {
  std::vector<Quad> x(static_cast<std::size_t>(d));
  for (auto& xi : x) {
    const Quad hi = static_cast<Quad>(rng() >> 8);  // 56 bits
    const Quad lo = static_cast<Quad>(rng() >> 8);
    xi = (hi + lo / static_cast<Quad>(0x1.0p56)) / static_cast<Quad>(0x1.0p56);
  }
  return x;
}

UnimodularLattice haar_sample_exact_2d(Rng& rng, bool rotate) {
  // Density (3/pi) y^{-2} dx dy on {|x| <= 1/2, x^2 + y^2 >= 1}. The
  // x-marginal is proportional to (1 - x^2)^{-1/2}, i.e. x = sin(phi) with phi
  // uniform on [-pi/6, pi/6]; given x, y = sqrt(1 - x^2) / U.
  const double phi = (uniform01(rng) - 0.5) * (std::numbers::pi / 3.0);
  const double x = std::sin(phi);
  const double y = std::sqrt(1.0 - x * x) / uniform01_open_low(rng);
  MatrixD b(2, 2);
  b << 1.0, x, 0.0, y;
  b /= std::sqrt(y);
  if (rotate) {
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    MatrixD r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    b = r * b;
  }
  return UnimodularLattice(std::move(b));
}

UnimodularLattice haar_sample_approx(int n, double t0, Rng& rng) {
  if (n < 2 || n > kMaxDim) throw std::invalid_argument("haar_sample_approx: bad dimension");
  if (!(t0 >= 0.0)) throw std::invalid_argument("haar_sample_approx: t0 must be >= 0");
  std::vector<Quad> x = uniform_torus_point(n - 1, rng);
  if (t0 == 0.0) {
    std::vector<double> xd(x.begin(), x.end());
    return lattice_from_point(xd);
  }
  std::vector<double> w(static_cast<std::size_t>(n - 1), 1.0 / (n - 1));
  TorusTranslate translate(std::move(x), std::move(w));
  translate.advance_to(t0);
  return UnimodularLattice(translate.basis());
}

}  // namespace latclt
