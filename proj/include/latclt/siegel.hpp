#pragma once

// Siegel transforms, weighted Diophantine counting and flows on the space of
// lattices.

#include <cstdint>
#include <span>
#include <vector>

#include "latclt/lattice.hpp"
#include "latclt/random.hpp"

namespace latclt {

using Quad = __float128;

class TestFunction {
 public:
  enum class Kind { kBall, kBox, kRadialBump };

  static TestFunction ball(double radius);
  static TestFunction box(std::vector<double> half_widths);
  /// 1 on |v| <= radius - margin, cosine taper to 0 at |v| = radius.
  static TestFunction radial_bump(double radius, double margin);

  Kind kind() const { return kind_; }
  double support_radius() const { return support_; }
  const std::vector<double>& half_widths() const { return half_widths_; }
  double radius() const { return radius_; }
  double margin() const { return margin_; }

  double operator()(const VectorD& v) const;

  /// f o g for diagonal g, defined for box indicators: the half-widths
  /// become h_i / g_ii.
  TestFunction box_pullback(std::span<const double> diag) const;

 private:
  TestFunction() = default;

  Kind kind_ = Kind::kBall;
  double radius_ = 0.0;
  double margin_ = 0.0;
  std::vector<double> half_widths_;
  double support_ = 0.0;
};

/// Sum of f over the nonzero vectors of the lattice.
double siegel_transform(const TestFunction& f, const UnimodularLattice& lattice,
                        EnumerationOptions options = {});
double siegel_transform(const TestFunction& f, const BallEnumerator& enumerator);

/// |x_i - p_i/q| < c_i / q^{1+w_i} for i = 1..d.
class DiophantineProblem {
 public:
  DiophantineProblem(std::vector<double> weights, std::vector<double> constants);

  int dim() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& constants() const { return constants_; }
  /// 2^d c_1...c_d, the coefficient of log T in the mean count.
  double mean_coefficient() const;

 private:
  std::vector<double> weights_;
  std::vector<double> constants_;
};

/// The canonical predicate shared by both counters: |q x_i - p_i| < c_i q^{-w_i}.
bool approximates(const DiophantineProblem& problem, std::span<const double> x,
                  std::span<const std::int64_t> p, std::int64_t q);

/// Number of (p, q) with 1 <= q < T satisfying the inequalities.
std::int64_t dioph_count_direct(const DiophantineProblem& problem, std::span<const double> x,
                                double T);

/// The same count at T = 2^N, as a sum over n < N of Siegel transforms of the
/// window {1 <= y < 2, |v_i| < c_i y^{-w_i}} over a^n Lambda_x.
std::int64_t dioph_count_dynamical(const DiophantineProblem& problem, std::span<const double> x,
                                   int N, EnumerationOptions options = {});

/// Partial sums of the dynamical count: element N is the count at T = 2^N,
/// for N = 0..max_N.
std::vector<std::int64_t> dioph_counts_dyadic(const DiophantineProblem& problem,
                                              std::span<const double> x, int max_N,
                                              EnumerationOptions options = {});

/// A diagonal element of SL_n(R), stored by its diagonal.
struct FlowElement {
  VectorD entries;

  /// diag(2^{w_1}, ..., 2^{w_d}, 2^{-1}).
  static FlowElement dioph_step(const DiophantineProblem& problem);
  /// a_w(t) = diag(e^{w_1 t}, ..., e^{w_d t}, e^{-t}).
  static FlowElement weighted(std::span<const double> weights, double t);
  /// g(t) = diag(e^{t/d}, ..., e^{t/d}, e^{-t}) in dimension d + 1.
  static FlowElement equal_weights(int d, double t);

  MatrixD matrix() const;
};

/// max_i |log g1_ii - log g2_ii|.
double separation(const FlowElement& g1, const FlowElement& g2);

/// g * lattice for diagonal g = diag(e^{l_1}, ..., e^{l_n}), applied in
/// bounded steps with LLL in between. Returns a reduced basis.
UnimodularLattice flow_translate(const UnimodularLattice& lattice,
                                 std::span<const double> log_diagonal);

/// Tracks an LLL-reduced basis of a_w(t) Lambda_x as t grows. Basis vectors
/// are rebuilt from their integer coordinates (p, q) in quad precision, so
/// the translate stays accurate for denominators far beyond 2^53.
class TorusTranslate {
 public:
  TorusTranslate(std::vector<Quad> x, std::vector<double> weights);

  int dim() const { return static_cast<int>(x_.size()) + 1; }
  double time() const { return time_; }

  /// Moves to time t >= time(), in steps small enough for double LLL.
  void advance_to(double t);

  const MatrixD& basis() const { return basis_; }
  /// Column j holds the integer coordinates (p_1..p_d, q) of basis column j.
  const IntMatrix& coordinates() const { return coords_; }

  VectorD vector_of(const IntVector& pq) const;

 private:
  void rebuild();

  std::vector<Quad> x_;
  std::vector<double> weights_;
  double time_ = 0.0;
  IntMatrix coords_;
  MatrixD basis_;
};

/// A point of [0,1)^d with 112 random bits per coordinate.
std::vector<Quad> uniform_torus_point(int d, Rng& rng);

/// Exact Haar sample in dimension 2 from the modular fundamental domain,
/// followed by a uniform rotation when `rotate` is set.
UnimodularLattice haar_sample_exact_2d(Rng& rng, bool rotate = true);

/// a_w(t0) Lambda_x with x uniform on [0,1]^{n-1} and equal weights.
UnimodularLattice haar_sample_approx(int n, double t0, Rng& rng);

}  // namespace latclt
