#include "latclt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace latclt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Standard deviation of the Kolmogorov distribution; sqrt(M) * KS is
// approximately Kolmogorov distributed.
constexpr double kKolmogorovSd = 0.2603;

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::int64_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

bool is_dyadic(double T, int& exponent) {
  int ex = 0;
  const double m = std::frexp(T, &ex);
  exponent = ex - 1;
  return m == 0.5 && exponent >= 1;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::vector<double> equal_weights(int d) {
  return std::vector<double>(static_cast<std::size_t>(d), 1.0 / d);
}

ScheduleEntry make_entry(double T, double center, double scale, const std::vector<std::int64_t>& raw) {
  ScheduleEntry e;
  e.T = T;
  e.center = center;
  e.scale = scale;
  std::vector<double> z;
  z.reserve(raw.size());
  long double sum = 0.0L;
  for (std::int64_t r : raw) {
    z.push_back((static_cast<double>(r) - center) / scale);
    sum += r;
  }
  const double n = static_cast<double>(raw.size());
  e.raw_mean = static_cast<double>(sum / n);
  long double ss = 0.0L;
  for (std::int64_t r : raw) ss += (r - e.raw_mean) * (r - e.raw_mean);
  e.raw_se = raw.size() > 1 ? std::sqrt(static_cast<double>(ss / (n - 1)) / n) : kNaN;
  e.normalized = summarize(z);
  return e;
}

nlohmann::json common_metadata(const ExperimentConfig& config, int threads) {
  (void)threads;  // Results never depend on the worker count.
  nlohmann::json m;
  m["code_version"] = kCodeVersion;
  m["seed"] = config.seed;
  m["trials"] = config.trials;
  m["T_schedule"] = config.T_schedule;
  m["moment_estimators"] = "plug-in (biased) moments; bias O(1/M)";
  m["ks_reference"] =
      "normal with the empirical mean and variance of the same sample; descriptive distance "
      "(parameters estimated, so the classical KS null law does not apply)";
  return m;
}

std::vector<TrialRecord> collect_records(const std::vector<double>& Ts,
                                         const std::vector<std::vector<std::int64_t>>& raw,
                                         const std::vector<ScheduleEntry>& entries) {
  std::vector<TrialRecord> records;
  const std::size_t trials = raw.empty() ? 0 : raw.front().size();
  records.reserve(trials * Ts.size());
  for (std::size_t i = 0; i < trials; ++i) {
    for (std::size_t j = 0; j < Ts.size(); ++j) {
      const std::int64_t r = raw[j][i];
      records.push_back({static_cast<std::int64_t>(i), Ts[j], r,
                         (static_cast<double>(r) - entries[j].center) / entries[j].scale});
    }
  }
  return records;
}

ExperimentResult run_dioph(const ExperimentConfig& config, int threads, bool fuchs) {
  config.validate();
  const DiophantineProblem problem = config.dioph_problem();
  const int d = problem.dim();
  std::vector<int> exponents;
  for (double T : config.T_schedule) {
    int e = 0;
    is_dyadic(T, e);
    exponents.push_back(e);
  }
  const int max_N = *std::max_element(exponents.begin(), exponents.end());
  const int audit_N = std::min(max_N, 12);
  const EnumerationOptions options{config.delta, kDefaultEnumerationCap};

  const auto M = static_cast<std::size_t>(config.trials);
  std::vector<std::vector<std::int64_t>> raw(config.T_schedule.size(), std::vector<std::int64_t>(M));
  std::vector<char> audited(M, 0);
  parallel_for(config.trials, threads, [&](std::int64_t i) {
    Rng rng = trial_rng(config.seed, static_cast<std::uint64_t>(i));
    std::vector<double> x(static_cast<std::size_t>(d));
    for (double& xi : x) xi = uniform01(rng);
    const std::vector<std::int64_t> counts = dioph_counts_dyadic(problem, x, max_N, options);
    for (std::size_t j = 0; j < exponents.size(); ++j) {
      raw[j][static_cast<std::size_t>(i)] = counts[static_cast<std::size_t>(exponents[j])];
    }
    if (in_audit_sample(config.seed, i)) {
      const std::int64_t direct = dioph_count_direct(problem, x, std::exp2(audit_N));
      if (direct != counts[static_cast<std::size_t>(audit_N)]) {
        throw std::logic_error("audit mismatch in trial " + std::to_string(i) + ": dynamical " +
                               std::to_string(counts[static_cast<std::size_t>(audit_N)]) +
                               " vs direct " + std::to_string(direct));
      }
      audited[static_cast<std::size_t>(i)] = 1;
    }
  });

  ExperimentResult result;
  Report& report = result.report;
  report.kind = fuchs ? "fuchs1d" : "dioph-clt";
  for (std::size_t j = 0; j < config.T_schedule.size(); ++j) {
    const double T = config.T_schedule[j];
    const double logT = std::log(T);
    const double center = problem.mean_coefficient() * logT;
    const double scale = fuchs ? std::sqrt(logT * std::log(logT)) : std::sqrt(logT);
    ScheduleEntry e = make_entry(T, center, scale, raw[j]);
    e.extra["mean_count_over_logT"] = e.raw_mean / logT;
    e.extra["mean_count_over_logT_se"] = e.raw_se / logT;
    e.extra["theory_mean_coefficient"] = problem.mean_coefficient();
    report.schedule.push_back(std::move(e));
  }
  result.records = collect_records(config.T_schedule, raw, report.schedule);

  nlohmann::json& m = report.metadata;
  m = common_metadata(config, threads);
  m["weights"] = problem.weights();
  m["constants"] = problem.constants();
  m["counter"] = "dynamical (sum over n < N of window counts on a^n Lambda_x)";
  m["audit"] = {{"N", audit_N},
                {"trials_checked", std::count(audited.begin(), audited.end(), 1)},
                {"mismatches", 0}};
  if (fuchs) {
    m["normalization"] = "(N_T - 2c log T) / (log T log log T)^(1/2)";
    m["note"] =
        "d = 1: the relevant counting function on the space of 2-dimensional lattices is not "
        "square-integrable, which is why the extra log log T factor appears";
  } else {
    m["normalization"] = "(N_T - 2^d c_1...c_d log T) / (log T)^(1/2)";
    m["theory_regime"] = d >= 2 ? "covered (d >= 2)" : "not covered (d = 1 runs but is flagged)";
  }
  return result;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kDiophClt: return "dioph-clt";
    case ExperimentKind::kLatticeClt: return "lattice-clt";
    case ExperimentKind::kSpiralClt: return "spiral-clt";
    case ExperimentKind::kFuchs1d: return "fuchs1d";
    case ExperimentKind::kMixingProbe: return "mixing-probe";
    case ExperimentKind::kTailProbe: return "tail-probe";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::kDiophClt, ExperimentKind::kLatticeClt, ExperimentKind::kSpiralClt,
                 ExperimentKind::kFuchs1d, ExperimentKind::kMixingProbe, ExperimentKind::kTailProbe}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

TestFunction TestFunctionSpec::build(int dim) const {
  if (kind == "ball") return TestFunction::ball(radius);
  if (kind == "bump") return TestFunction::radial_bump(radius, margin);
  if (kind == "box") {
    std::vector<double> h = half_widths;
    if (h.empty()) h.assign(static_cast<std::size_t>(dim), 1.0);
    if (static_cast<int>(h.size()) != dim) {
      throw std::invalid_argument("test_function.half_widths must have " + std::to_string(dim) +
                                  " entries");
    }
    return TestFunction::box(std::move(h));
  }
  throw std::invalid_argument("test_function.kind must be ball, box or bump");
}

void ExperimentConfig::validate() const {
  require(trials >= 1, "M >= 1 violated: trials must be at least 1");
  require(delta > 0.25 && delta < 1.0, "delta must lie in (0.25, 1)");
  require(t0 >= 0.0, "t0 must be >= 0");
  for (std::size_t i = 0; i < T_schedule.size(); ++i) {
    require(T_schedule[i] >= 1.0 && std::isfinite(T_schedule[i]), "T entries must be >= 1");
    if (i > 0) require(T_schedule[i] > T_schedule[i - 1], "T schedule must be strictly increasing");
  }
  switch (kind) {
    case ExperimentKind::kDiophClt:
    case ExperimentKind::kFuchs1d: {
      if (kind == ExperimentKind::kFuchs1d) require(d == 1, "fuchs1d requires d = 1");
      require(d >= 1 && d + 1 <= kMaxDim, "d must lie in 1..7 for Diophantine problems");
      require(!T_schedule.empty(), "T schedule must not be empty");
      for (double T : T_schedule) {
        int e = 0;
        require(is_dyadic(T, e) && e <= 40, "T entries must be powers of two 2^N with 1 <= N <= 40");
      }
      require(static_cast<int>(constants.size()) == d, "c must have d entries");
      if (!weights.empty()) require(static_cast<int>(weights.size()) == d, "w must have d entries");
      dioph_problem();
      break;
    }
    case ExperimentKind::kLatticeClt:
    case ExperimentKind::kSpiralClt: {
      require(d >= 2 && d <= kMaxDim, "d must lie in 2..8 for lattice counting");
      require(!T_schedule.empty(), "T schedule must not be empty");
      require(a > 0.0 && a < b, "0 < a < b violated");
      if (system) require(system->dim() == d, "block system dimension must equal d");
      if (sampler == SamplerKind::kExact2d) require(d == 2, "the exact sampler needs d = 2");
      if (kind == ExperimentKind::kSpiralClt) {
        require(target.has_value(), "spiral-clt needs a target");
        target->check_compatible(block_system());
      }
      break;
    }
    case ExperimentKind::kMixingProbe: {
      require(d >= 2 && d <= kMaxDim, "d must lie in 2..8 for the mixing probe");
      if (sampler == SamplerKind::kExact2d) require(d == 2, "the exact sampler needs d = 2");
      require(!separations.empty(), "mixing probe needs a list of separations s");
      for (double s : separations) require(s >= 0.0 && std::isfinite(s), "separations must be >= 0");
      require(cap > 0.0, "cap must be > 0");
      if (test_function) test_function->build(d);
      break;
    }
    case ExperimentKind::kTailProbe: {
      require(d >= 1 && d + 1 <= kMaxDim, "d must lie in 1..7 for the tail probe");
      require(!L_grid.empty(), "tail probe needs an L grid");
      for (std::size_t i = 0; i < L_grid.size(); ++i) {
        require(L_grid[i] > 0.0, "L values must be > 0");
        if (i > 0) require(L_grid[i] > L_grid[i - 1], "L grid must be strictly increasing");
      }
      require(flow_steps >= 0 && flow_steps <= 40, "n must lie in 0..40");
      if (!weights.empty()) {
        require(static_cast<int>(weights.size()) == d, "w must have d entries");
        if (d >= 2) DiophantineProblem(weights, std::vector<double>(weights.size(), 1.0));
      }
      if (test_function) test_function->build(d + 1);
      break;
    }
  }
}

BlockSystem ExperimentConfig::block_system() const {
  return system ? *system : BlockSystem::identity(d);
}

DiophantineProblem ExperimentConfig::dioph_problem() const {
  if (d == 1) return DiophantineProblem(weights.empty() ? std::vector<double>{1.0} : weights, constants);
  return DiophantineProblem(weights.empty() ? equal_weights(d) : weights, constants);
}

MomentSummary summarize(const std::vector<double>& values) {
  MomentSummary s;
  s.samples = static_cast<std::int64_t>(values.size());
  if (values.empty()) {
    s.mean = s.variance = kNaN;
    s.skewness = s.excess_kurtosis = s.cum3 = s.cum4 = s.ks = kNaN;
    s.se_mean = s.se_variance = s.se_skewness = s.se_kurtosis = s.se_ks = kNaN;
    return s;
  }
  const EmpiricalDistribution e(values);
  const double n = static_cast<double>(values.size());
  s.mean = e.mean();
  s.variance = e.central_moment(2);
  const double m4 = e.central_moment(4);
  s.se_mean = std::sqrt(s.variance / n);
  s.se_variance = std::sqrt(std::max(0.0, m4 - s.variance * s.variance) / n);
  s.se_skewness = std::sqrt(6.0 / n);
  s.se_kurtosis = std::sqrt(24.0 / n);
  s.se_ks = kKolmogorovSd / std::sqrt(n);
  if (s.variance > 0.0 && values.size() >= 4) {
    const SummaryStats st = summary_stats(e);
    s.skewness = st.skewness;
    s.excess_kurtosis = st.excess_kurtosis;
    s.cum3 = empirical_cumulant(e, 3);
    s.cum4 = empirical_cumulant(e, 4);
    s.ks = ks_distance(e, s.mean, s.variance);
  } else {
    s.skewness = s.excess_kurtosis = s.cum3 = s.cum4 = s.ks = kNaN;
  }
  return s;
}

double denormalize(const ScheduleEntry& entry, double normalized) {
  return entry.center + entry.scale * normalized;
}

bool in_audit_sample(std::uint64_t seed, std::int64_t index) {
  return splitmix64(seed ^ 0xa0d17a0d17ULL ^ splitmix64(static_cast<std::uint64_t>(index))) % 100 == 0;
}

UnimodularLattice sample_lattice(const ExperimentConfig& config, Rng& rng) {
  const bool exact = config.sampler == SamplerKind::kExact2d ||
                     (config.sampler == SamplerKind::kAuto && config.d == 2);
  if (exact) return haar_sample_exact_2d(rng);
  return haar_sample_approx(config.d, config.t0, rng);
}

ExperimentResult run_dioph_clt(const ExperimentConfig& config, int threads) {
  if (config.kind != ExperimentKind::kDiophClt) throw std::invalid_argument("config kind is not dioph-clt");
  return run_dioph(config, threads, false);
}

ExperimentResult run_fuchs_d1(const ExperimentConfig& config, int threads) {
  if (config.kind != ExperimentKind::kFuchs1d) throw std::invalid_argument("config kind is not fuchs1d");
  return run_dioph(config, threads, true);
}

namespace {

ExperimentResult run_counting(const ExperimentConfig& config, int threads, bool spiral) {
  config.validate();
  const BlockSystem system = config.block_system();
  const AngularTarget target = spiral ? *config.target : AngularTarget::full(system.num_blocks());
  const double target_volume = spiral_fraction(target, system);
  const EnumerationOptions options{config.delta, kDefaultEnumerationCap};
  std::vector<ProductDomain> domains;
  for (double T : config.T_schedule) domains.emplace_back(system, config.a, config.b, T);

  const auto M = static_cast<std::size_t>(config.trials);
  std::vector<std::vector<std::int64_t>> raw(domains.size(), std::vector<std::int64_t>(M));
  std::vector<std::vector<std::int64_t>> in_domain(domains.size(), std::vector<std::int64_t>(M));
  parallel_for(config.trials, threads, [&](std::int64_t i) {
    Rng rng = trial_rng(config.seed, static_cast<std::uint64_t>(i));
    const UnimodularLattice lattice = sample_lattice(config, rng);
    for (std::size_t j = 0; j < domains.size(); ++j) {
      const SpiralCounts c = count_domain_and_spiraling(lattice, domains[j], target, options);
      raw[j][static_cast<std::size_t>(i)] = spiral ? c.in_target : c.in_domain;
      in_domain[j][static_cast<std::size_t>(i)] = c.in_domain;
    }
  });

  ExperimentResult result;
  Report& report = result.report;
  report.kind = spiral ? "spiral-clt" : "lattice-clt";
  for (std::size_t j = 0; j < domains.size(); ++j) {
    const double vol = domain_volume(domains[j]);
    ScheduleEntry e = make_entry(config.T_schedule[j], target_volume * vol, std::sqrt(vol), raw[j]);
    e.extra["domain_volume"] = vol;
    e.extra["mean_minus_center_in_se"] = (e.raw_mean - e.center) / e.raw_se;
    if (spiral) {
      long double s_sum = 0.0L;
      long double n_sum = 0.0L;
      for (std::size_t i = 0; i < M; ++i) {
        s_sum += raw[j][i];
        n_sum += in_domain[j][i];
      }
      const double ratio = n_sum > 0 ? static_cast<double>(s_sum / n_sum) : kNaN;
      long double resid = 0.0L;
      for (std::size_t i = 0; i < M; ++i) {
        const long double r = raw[j][i] - ratio * in_domain[j][i];
        resid += r * r;
      }
      const double mean_n = static_cast<double>(n_sum / M);
      const double se = M > 1 ? std::sqrt(static_cast<double>(resid / (M * (M - 1.0)))) / mean_n : kNaN;
      e.extra["angular_volume"] = angular_volume(target);
      e.extra["spiral_fraction"] = target_volume;
      e.extra["pooled_fraction"] = ratio;
      e.extra["pooled_fraction_se"] = se;
    }
    report.schedule.push_back(std::move(e));
  }
  result.records = collect_records(config.T_schedule, raw, report.schedule);

  nlohmann::json& m = report.metadata;
  m = common_metadata(config, threads);
  m["a"] = config.a;
  m["b"] = config.b;
  m["d"] = config.d;
  m["variant"] = system.variant() == ProductVariant::kSigned ? "signed" : "norm";
  const bool exact = config.sampler == SamplerKind::kExact2d ||
                     (config.sampler == SamplerKind::kAuto && config.d == 2);
  m["sampler"] = exact ? "exact-2d" : "approx (t0 = " + std::to_string(config.t0) + ")";
  m["normalization"] = spiral ? "(|S_T| - vol(D) vol(Omega_T)) / vol(Omega_T)^(1/2)"
                              : "(|Lambda cap Omega_T| - vol(Omega_T)) / vol(Omega_T)^(1/2)";
  m["theory_regime"] = config.d >= 4 ? "covered (d >= 4)" : "not covered (theorem stated for d >= 4)";
  m["variance_estimate"] = "empirical variance at the largest T; no theoretical sigma is used";
  return result;
}

}  // namespace

ExperimentResult run_lattice_clt(const ExperimentConfig& config, int threads) {
  if (config.kind != ExperimentKind::kLatticeClt) throw std::invalid_argument("config kind is not lattice-clt");
  return run_counting(config, threads, false);
}

ExperimentResult run_spiral_clt(const ExperimentConfig& config, int threads) {
  if (config.kind != ExperimentKind::kSpiralClt) throw std::invalid_argument("config kind is not spiral-clt");
  return run_counting(config, threads, true);
}

ExperimentResult run_mixing_probe(const ExperimentConfig& config, int threads) {
  if (config.kind != ExperimentKind::kMixingProbe) throw std::invalid_argument("config kind is not mixing-probe");
  config.validate();
  const int d = config.d;
  TestFunctionSpec spec;
  spec.kind = "box";
  const TestFunction f = (config.test_function ? *config.test_function : spec).build(d);
  const EnumerationOptions options{config.delta, kDefaultEnumerationCap};
  const std::vector<double>& seps = config.separations;

  const auto M = static_cast<std::size_t>(config.trials);
  std::vector<double> phi0(M);
  std::vector<std::vector<double>> phis(seps.size(), std::vector<double>(M));
  auto phi = [&](const UnimodularLattice& l) {
    return std::min(siegel_transform(f, l, options), config.cap);
  };
  parallel_for(config.trials, threads, [&](std::int64_t i) {
    Rng rng = trial_rng(config.seed, static_cast<std::uint64_t>(i));
    const UnimodularLattice lattice = sample_lattice(config, rng);
    const std::size_t ii = static_cast<std::size_t>(i);
    phi0[ii] = phi(lattice);
    for (std::size_t j = 0; j < seps.size(); ++j) {
      if (seps[j] == 0.0) {
        phis[j][ii] = phi0[ii];
        continue;
      }
      std::vector<double> logs(static_cast<std::size_t>(d), seps[j] / (d - 1));
      logs.back() = -seps[j];
      phis[j][ii] = phi(flow_translate(lattice, logs));
    }
  });

  ExperimentResult result;
  Report& report = result.report;
  report.kind = "mixing-probe";
  const double n = static_cast<double>(M);
  long double s0 = 0.0L;
  for (double v : phi0) s0 += v;
  const double m0 = static_cast<double>(s0 / n);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t j = 0; j < seps.size(); ++j) {
    long double ss = 0.0L;
    for (double v : phis[j]) ss += v;
    const double ms = static_cast<double>(ss / n);
    long double cov = 0.0L;
    for (std::size_t i = 0; i < M; ++i) cov += (phi0[i] - m0) * (phis[j][i] - ms);
    const double estimate = static_cast<double>(cov / n);
    long double var = 0.0L;
    for (std::size_t i = 0; i < M; ++i) {
      const long double p = (phi0[i] - m0) * (phis[j][i] - ms) - estimate;
      var += p * p;
    }
    const double se = M > 1 ? std::sqrt(static_cast<double>(var / (n - 1)) / n) : kNaN;
    result.table.push_back({seps[j], estimate, se});
    const FlowElement g = FlowElement::equal_weights(d - 1, seps[j]);
    const FlowElement e = FlowElement::equal_weights(d - 1, 0.0);
    rows.push_back({{"s", seps[j]},
                    {"separation", separation(e, g)},
                    {"estimate", estimate},
                    {"stderr", se},
                    {"mean_phi_translate", ms}});
  }
  report.probe["rows"] = rows;
  report.probe["mean_phi"] = m0;
  report.probe["cap"] = config.cap;
  report.probe["statistic"] = "phi = min(f^, cap); estimate = sample covariance of phi(L) and phi(g(s) L)";

  nlohmann::json& m = report.metadata;
  m = common_metadata(config, threads);
  m["d"] = d;
  m["flow"] = "g(s) = diag(e^{s/(d-1)}, ..., e^{s/(d-1)}, e^{-s})";
  const bool exact = config.sampler == SamplerKind::kExact2d ||
                     (config.sampler == SamplerKind::kAuto && d == 2);
  m["sampler"] = exact ? "exact-2d" : "approx (t0 = " + std::to_string(config.t0) + ")";
  return result;
}

ExperimentResult run_tail_probe(const ExperimentConfig& config, int threads) {
  if (config.kind != ExperimentKind::kTailProbe) throw std::invalid_argument("config kind is not tail-probe");
  config.validate();
  const int d = config.d;
  const std::vector<double> weights = config.weights.empty() ? equal_weights(d) : config.weights;
  const TestFunction f = (config.test_function ? *config.test_function : TestFunctionSpec{}).build(d + 1);
  const double max_L = config.L_grid.back();
  const double required_n = 2.0 * std::log2(std::max(max_L, 1.0));
  const int n = config.flow_steps > 0 ? config.flow_steps : static_cast<int>(std::ceil(required_n));
  const EnumerationOptions options{config.delta, kDefaultEnumerationCap};

  const auto M = static_cast<std::size_t>(config.trials);
  std::vector<double> values(M);
  parallel_for(config.trials, threads, [&](std::int64_t i) {
    Rng rng = trial_rng(config.seed, static_cast<std::uint64_t>(i));
    TorusTranslate translate(uniform_torus_point(d, rng), weights);
    translate.advance_to(n * std::numbers::ln2);
    values[static_cast<std::size_t>(i)] = siegel_transform(f, BallEnumerator(translate.basis(), options));
  });

  ExperimentResult result;
  Report& report = result.report;
  report.kind = "tail-probe";
  std::vector<double> xs;
  std::vector<double> ys;
  nlohmann::json dropped = nlohmann::json::array();
  for (double L : config.L_grid) {
    const auto hits = std::count_if(values.begin(), values.end(), [L](double v) { return v > L; });
    const double p = static_cast<double>(hits) / static_cast<double>(M);
    result.table.push_back({L, p, std::sqrt(p * (1.0 - p) / static_cast<double>(M))});
    if (hits == 0) {
      dropped.push_back(L);
    } else {
      xs.push_back(std::log(L));
      ys.push_back(std::log(p));
    }
  }
  report.probe["slope"] = xs.size() >= 2 ? least_squares_slope(xs, ys) : kNaN;
  report.probe["fitted_points"] = xs.size();
  report.probe["dropped_L"] = dropped;
  report.probe["predicted_exponent"] = -(d + 1);
  report.probe["flow_steps"] = n;
  report.probe["flow_steps_sufficient"] = n >= required_n;
  report.probe["min_value"] = *std::min_element(values.begin(), values.end());
  report.probe["max_value"] = *std::max_element(values.begin(), values.end());

  nlohmann::json& m = report.metadata;
  m = common_metadata(config, threads);
  m["d"] = d;
  m["weights"] = weights;
  m["statistic"] = "f^(a^n Lambda_x), x uniform on [0,1]^d, a = diag(2^{w_1}, ..., 2^{w_d}, 2^{-1})";
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  switch (config.kind) {
    case ExperimentKind::kDiophClt: return run_dioph_clt(config, threads);
    case ExperimentKind::kFuchs1d: return run_fuchs_d1(config, threads);
    case ExperimentKind::kLatticeClt: return run_lattice_clt(config, threads);
    case ExperimentKind::kSpiralClt: return run_spiral_clt(config, threads);
    case ExperimentKind::kMixingProbe: return run_mixing_probe(config, threads);
    case ExperimentKind::kTailProbe: return run_tail_probe(config, threads);
  }
  throw std::invalid_argument("unknown experiment kind");
}

}  // namespace latclt
