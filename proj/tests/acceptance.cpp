// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers as arguments to run
// a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "latclt/config.hpp"
#include "latclt/counting.hpp"
#include "latclt/experiments.hpp"
#include "latclt/siegel.hpp"
#include "latclt/stats.hpp"
#include "oracles.hpp"

using namespace latclt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Dynamical and direct Diophantine counts agree exactly.
Outcome tessellation() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0, 1);
  std::int64_t mismatches = 0, checks = 0;
  for (int d = 1; d <= 3; ++d) {
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> w(static_cast<std::size_t>(d), 1.0);
      if (d > 1) {
        double s = 0;
        for (double& wi : w) s += (wi = 0.05 + u(rng));
        for (double& wi : w) wi /= s;
      }
      std::vector<double> c(static_cast<std::size_t>(d)), x(static_cast<std::size_t>(d));
      for (double& ci : c) ci = 0.05 + 0.9 * u(rng);
      for (double& xi : x) xi = u(rng);
      const DiophantineProblem p(w, c);
      const auto sums = dioph_counts_dyadic(p, x, 12);
      for (int N = 0; N <= 12; ++N) {
        ++checks;
        if (sums[static_cast<std::size_t>(N)] != dioph_count_direct(p, x, std::exp2(N))) ++mismatches;
      }
      ++checks;
      if (dioph_count_dynamical(p, x, 12) != sums[12]) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%lld comparisons, %lld mismatches", (long long)checks, (long long)mismatches)};
}

// 2. Tile-based counts equal exhaustive counts.
Outcome counting_oracle() {
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> u(0, 1);
  const double Ts[] = {2, 4, 8, 16};
  int mismatches = 0, spiral_checks = 0;
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 2;
    const int shape = (t / 2) % 4;  // signed, norm scalar, norm with a 2-block, signed with sign target
    std::vector<int> sizes(static_cast<std::size_t>(d), 1);
    ProductVariant variant = shape == 0 || shape == 3 ? ProductVariant::kSigned : ProductVariant::kNorm;
    if (shape == 2) sizes = d == 2 ? std::vector<int>{2} : std::vector<int>{2, 1};
    MatrixD m = MatrixD::Identity(d, d);
    if (t % 3 == 0) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) += 0.3 * (u(rng) - 0.5);
    }
    const BlockSystem sys = BlockSystem::from_stacked(m, sizes, variant);
    double a = 0.3 + 3.0 * u(rng);
    double b = 0.3 + 3.7 * u(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 0.05) b = std::min(4.0, a + 0.3);
    const ProductDomain dom(sys, a, b, Ts[(t / 8) % 4]);
    const UnimodularLattice l(oracle::random_gaussian(d, rng));

    std::vector<angular::Factor> factors;
    for (int i = 0; i < sys.num_blocks(); ++i) {
      if (sys.block_size(i) == 2) {
        factors.emplace_back(angular::Arc{2 * std::numbers::pi * u(rng), 0.5 + 4.0 * u(rng)});
      } else if (variant == ProductVariant::kSigned || i % 2 == 0) {
        factors.emplace_back(angular::Signs{u(rng) < 0.7, u(rng) < 0.7});
      } else {
        factors.emplace_back(angular::Signs{true, true});
      }
    }
    const AngularTarget target(factors);
    const SpiralCounts fast = count_domain_and_spiraling(l, dom, target);
    if (fast.in_domain != brute_force_count(l, dom)) ++mismatches;
    if (fast.in_target != brute_force_count(l, dom, &target)) ++mismatches;
    if (count_in_domain(l, dom) != fast.in_domain) ++mismatches;
    ++spiral_checks;
  }
  return {mismatches == 0, fmt("200 instances (%d with sign/arc targets), %d mismatches", spiral_checks, mismatches)};
}

// Integral of a radial function over R^2 by the trapezoid rule.
double radial_integral_2d(const TestFunction& f, double rmax) {
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = rmax * i / n;
    VectorD v(2);
    v << r, 0.0;
    s += (i == 0 || i == n ? 0.5 : 1.0) * f(v) * r;
  }
  return 2 * std::numbers::pi * s * rmax / n;
}

// 3. Siegel mean value with the exact sampler.
Outcome siegel_mean() {
  struct Case {
    std::string name;
    TestFunction f;
    double volume;
  };
  const TestFunction bump = TestFunction::radial_bump(1.5, 0.5);
  const std::vector<Case> cases = {
      {"ball r=1", TestFunction::ball(1.0), std::numbers::pi},
      {"box 1x0.5", TestFunction::box({1.0, 0.5}), 2.0},
      {"bump r=1.5", bump, radial_integral_2d(bump, 1.5)},
  };
  const int M = 100000;
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    long double s = 0, ss = 0;
    for (int i = 0; i < M; ++i) {
      Rng rng = trial_rng(3003 + k, static_cast<std::uint64_t>(i));
      const double v = siegel_transform(cases[k].f, haar_sample_exact_2d(rng));
      s += v;
      ss += static_cast<long double>(v) * v;
    }
    const double mean = static_cast<double>(s / M);
    const double var = static_cast<double>(ss / M) - mean * mean;
    const double se = std::sqrt(var / M);
    const double z = (mean - cases[k].volume) / se;
    pass = pass && std::abs(z) < 3.0;
    detail += fmt("%s%s: mean %.5f vs %.5f (z=%.2f)", k ? "; " : "", cases[k].name.c_str(), mean, cases[k].volume, z);
  }
  return {pass, detail};
}

ExperimentConfig dioph_config(int M, std::vector<double> Ts) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kDiophClt;
  c.d = 2;
  c.constants = {0.5, 0.5};
  c.weights = {0.7, 0.3};
  c.T_schedule = std::move(Ts);
  c.trials = M;
  c.seed = 0;
  return c;
}

// 4. Mean law for the Diophantine count.
Outcome mean_law() {
  const ExperimentResult r = run_dioph_clt(dioph_config(1000, {std::exp2(20)}));
  const ScheduleEntry& e = r.report.schedule[0];
  const double L = std::log(e.T);
  const double ratio = e.raw_mean / L;
  return {ratio >= 0.95 && ratio <= 1.05, fmt("mean N_T / log T = %.4f +- %.4f (target 1, band [0.95, 1.05])", ratio, e.raw_se / L)};
}

// 5. Shape of the normalized Diophantine discrepancy along the schedule.
Outcome clt_trend() {
  const ExperimentResult r = run_dioph_clt(dioph_config(10000, {std::exp2(10), std::exp2(15), std::exp2(20)}));
  const auto& s = r.report.schedule;
  const MomentSummary& last = s.back().normalized;
  bool ks_trend = true;
  std::string ks_list;
  for (std::size_t j = 0; j < s.size(); ++j) {
    ks_list += fmt("%s%.4f", j ? "," : "", s[j].normalized.ks);
    if (j > 0) {
      const double se = std::hypot(s[j].normalized.se_ks, s[j - 1].normalized.se_ks);
      if (s[j].normalized.ks > s[j - 1].normalized.ks + 2 * se) ks_trend = false;
    }
  }
  const bool shape = std::abs(last.skewness) < 0.3 && std::abs(last.excess_kurtosis) < 0.3;
  const bool ks = last.ks < 0.05;
  return {shape && ks && ks_trend,
          fmt("at 2^20: skew %.3f, excess kurtosis %.3f (need |.|<0.3); KS %.4f (need <0.05); KS over schedule [%s] %s",
              last.skewness, last.excess_kurtosis, last.ks, ks_list.c_str(),
              ks_trend ? "nonincreasing" : "increasing")};
}

// 6. Partition enumeration and cumulants.
Outcome cumulants() {
  bool pass = true;
  std::string detail = "Bell";
  for (int r = 3; r <= 6; ++r) {
    const auto n = static_cast<std::int64_t>(set_partitions(r).size());
    pass = pass && n == oracle::bell(r);
    detail += fmt(" %lld", (long long)n);
  }
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> u(-2, 2);
  double worst = 0.0;
  for (int r = 2; r <= 6; ++r) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::uint32_t full = (1u << r) - 1u;
      std::uniform_int_distribution<std::uint32_t> pick(1u, full - 1u);
      const std::uint32_t I = pick(rng);
      std::vector<double> mi(1u << r), mj(1u << r);
      for (auto& v : mi) v = u(rng);
      for (auto& v : mj) v = u(rng);
      const MomentTable m(r, [&](std::uint32_t s) {
        const std::uint32_t a = s & I, b = s & ~I & full;
        return (a ? mi[a] : 1.0) * (b ? mj[b] : 1.0);
      });
      worst = std::max(worst, std::abs(joint_cumulant(m)));
    }
  }
  pass = pass && worst < 1e-10;
  Rng g = trial_rng(6006, 0);
  std::vector<double> xs(100000);
  for (double& x : xs) x = standard_normal(g);
  const EmpiricalDistribution e(xs);
  const double c3 = empirical_cumulant(e, 3), c4 = empirical_cumulant(e, 4);
  pass = pass && std::abs(c3) < 0.05 && std::abs(c4) < 0.1;
  detail += fmt("; factorized max |cum| %.2e; normal sample cum3 %.4f cum4 %.4f", worst, c3, c4);
  return {pass, detail};
}

// 7. Closed-form domain volume against rejection sampling.
Outcome volume() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t n = 10'000'000;
  double worst_z = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 3;
    std::vector<int> sizes(static_cast<std::size_t>(d), 1);
    ProductVariant variant = t % 2 ? ProductVariant::kNorm : ProductVariant::kSigned;
    if (t % 4 == 3 && d >= 3) sizes = d == 3 ? std::vector<int>{2, 1} : std::vector<int>{2, 2};
    MatrixD m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = (i == j) + 0.5 * (u(rng) - 0.5);
    const BlockSystem sys = BlockSystem::from_stacked(m, sizes, variant);
    const double a = 0.1 + u(rng);
    const ProductDomain dom(sys, a, a + 0.2 + 2 * u(rng), 1.5 + 3 * u(rng));
    const MatrixD inv = sys.stacked().inverse();
    VectorD half(d);
    for (int r = 0; r < d; ++r) half(r) = dom.T() * inv.row(r).cwiseAbs().sum();
    std::mt19937_64 g(70070 + t);
    std::uniform_real_distribution<double> s(-1, 1);
    std::size_t hits = 0;
    VectorD x(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (int r = 0; r < d; ++r) x(r) = half(r) * s(g);
      hits += contains(dom, x);
    }
    double box = 1.0;
    for (int r = 0; r < d; ++r) box *= 2 * half(r);
    const double p = static_cast<double>(hits) / n;
    const double est = box * p, se = box * std::sqrt(p * (1 - p) / n);
    worst_z = std::max(worst_z, std::abs(domain_volume(dom) - est) / se);
  }
  const double v = domain_volume(ProductDomain(BlockSystem::identity(2), 1, 2, 10));
  return {worst_z < 3.0 && std::abs(v - 8.4377) < 0.01,
          fmt("20 domains, worst |z| = %.2f (need < 3); (1,2,10) -> %.5f", worst_z, v)};
}

// 8. Approximate sampler against the exact one.
Outcome sampler_consistency() {
  const int M = 100000;
  const TestFunction f = TestFunction::ball(1.0);
  std::vector<double> exact(M);
  for (int i = 0; i < M; ++i) {
    Rng rng = trial_rng(8008, static_cast<std::uint64_t>(i));
    exact[static_cast<std::size_t>(i)] = siegel_transform(f, haar_sample_exact_2d(rng));
  }
  const EmpiricalDistribution ex(exact);
  const double se = 0.2603 * std::sqrt(2.0 / M);
  std::vector<double> ks;
  for (double t0 : {4.0, 8.0, 16.0, 32.0}) {
    std::vector<double> approx(M);
    for (int i = 0; i < M; ++i) {
      Rng rng = trial_rng(8009, static_cast<std::uint64_t>(i));
      approx[static_cast<std::size_t>(i)] = siegel_transform(f, haar_sample_approx(2, t0, rng));
    }
    ks.push_back(ks_two_sample(ex, EmpiricalDistribution(approx)));
  }
  bool trend = true;
  for (std::size_t j = 1; j < ks.size(); ++j) trend = trend && ks[j] <= ks[j - 1] + 2 * std::sqrt(2.0) * se;
  return {ks.back() < 0.02 && trend,
          fmt("KS at t0=4,8,16,32: %.4f %.4f %.4f %.4f (need last < 0.02, nonincreasing within 2 SE, SE %.4f)",
              ks[0], ks[1], ks[2], ks[3], se)};
}

// 9. Tail exponent of the Siegel transform on torus translates.
Outcome tail_exponent() {
  ExperimentConfig c;
  c.kind = ExperimentKind::kTailProbe;
  c.d = 2;
  c.trials = 1000000;
  c.L_grid = {4, 8, 16, 32, 64};
  c.flow_steps = 12;
  const ExperimentResult r = run_tail_probe(c);
  const double slope = r.report.probe["slope"].get<double>();
  std::string rows;
  for (const ProbeRow& p : r.table) rows += fmt(" P(>%g)=%.3g", p.key, p.estimate);
  return {slope <= -2.5, fmt("fitted slope %.3f (need <= -2.5);%s", slope, rows.c_str())};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Serial and 8-way parallel runs write identical files.
Outcome determinism() {
  const char* configs[] = {
      R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"w":[0.7,0.3],"T":["2^10","2^16"],"M":400,"seed":5})",
      R"({"kind":"fuchs1d","d":1,"c":[0.25],"T":["2^12"],"M":400,"seed":5})",
      R"({"kind":"lattice-clt","d":3,"a":0.5,"b":2,"T":[4,8],"M":200,"seed":5,"t0":8})",
      R"({"kind":"spiral-clt","d":2,"T":[64],"M":300,"seed":5,"target":[{"type":"sign","minus":false},{"type":"full"}]})",
      R"({"kind":"mixing-probe","d":2,"s":[0,1,4],"M":300,"seed":5})",
      R"({"kind":"tail-probe","d":2,"L":[2,4,8],"n":6,"M":300,"seed":5})",
  };
  const auto base = std::filesystem::temp_directory_path() / "latclt_acceptance_determinism";
  std::filesystem::remove_all(base);
  int differing = 0;
  std::string names;
  for (const char* text : configs) {
    const ExperimentConfig c = parse_config(text);
    const auto a = base / (std::string(to_string(c.kind)) + "_serial");
    const auto b = base / (std::string(to_string(c.kind)) + "_parallel");
    emit_outputs(run_experiment(c, 1), c, a);
    emit_outputs(run_experiment(c, 8), c, b);
    bool same = true;
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
      same = same && slurp(entry.path()) == slurp(b / entry.path().filename());
    }
    if (!same) {
      ++differing;
      names += std::string(" ") + to_string(c.kind);
    }
  }
  std::filesystem::remove_all(base);
  return {differing == 0, fmt("6 drivers, %d with differing files%s", differing, names.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {"tessellation identity (dynamical == direct)", tessellation, 60},
      {"counting oracle equivalence", counting_oracle, 120},
      {"Siegel mean value, exact 2d sampler", siegel_mean, 120},
      {"Diophantine mean law", mean_law, 300},
      {"CLT trend for the Diophantine count", clt_trend, 1800},
      {"cumulant engine", cumulants, 60},
      {"volume engine", volume, 300},
      {"sampler consistency", sampler_consistency, 300},
      {"tail exponent", tail_exponent, 600},
      {"determinism, serial vs 8 threads", determinism, 600},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[k].budget_seconds) {
      o.pass = false;
      o.detail += fmt(" [over the %.0fs budget]", criteria[k].budget_seconds);
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s | %s | %.1fs\n", o.pass ? "PASS" : "FAIL", id, criteria[k].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
