#pragma once

// Monte Carlo drivers. Each driver is a pure function of its configuration:
// trial i draws from the stream stream_seed(seed, i), trials may run on any
// number of workers, and aggregation folds the trials in index order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "latclt/counting.hpp"
#include "latclt/domains.hpp"
#include "latclt/siegel.hpp"
#include "latclt/stats.hpp"

namespace latclt {

enum class ExperimentKind {
  kDiophClt,
  kLatticeClt,
  kSpiralClt,
  kFuchs1d,
  kMixingProbe,
  kTailProbe,
};

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

enum class SamplerKind { kAuto, kExact2d, kApprox };

struct TestFunctionSpec {
  std::string kind = "ball";         // ball | box | bump
  double radius = 1.0;               // ball, bump
  double margin = 0.25;              // bump
  std::vector<double> half_widths;   // box

  TestFunction build(int dim) const;
  friend bool operator==(const TestFunctionSpec&, const TestFunctionSpec&) = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kDiophClt;
  int d = 2;

  // Diophantine problems.
  std::vector<double> weights;
  std::vector<double> constants;

  // Lattice and spiral counting.
  std::optional<BlockSystem> system;  // identity signed forms when unset
  double a = 1.0;
  double b = 2.0;
  std::optional<AngularTarget> target;
  SamplerKind sampler = SamplerKind::kAuto;

  std::vector<double> T_schedule;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  double t0 = 32.0;
  double delta = kDefaultDelta;

  // Probes.
  std::vector<double> separations;  // mixing probe
  double cap = 10.0;                // mixing probe: phi = min(f^, cap)
  std::vector<double> L_grid;       // tail probe
  int flow_steps = 0;               // tail probe n; 0 means ceil(2 log2 max L)
  std::optional<TestFunctionSpec> test_function;

  std::string output;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;

  BlockSystem block_system() const;
  DiophantineProblem dioph_problem() const;
};

struct TrialRecord {
  std::int64_t trial = 0;
  double T = 0.0;
  std::int64_t raw_count = 0;
  double normalized = 0.0;
};

struct MomentSummary {
  std::int64_t samples = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double cum3 = 0.0;
  double cum4 = 0.0;
  double ks = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
  double se_skewness = 0.0;
  double se_kurtosis = 0.0;
  double se_ks = 0.0;
};

/// Statistics of normalized values; shape fields are NaN for a zero-variance sample.
MomentSummary summarize(const std::vector<double>& values);

struct ScheduleEntry {
  double T = 0.0;
  double center = 0.0;  // subtracted from the raw count
  double scale = 1.0;   // divides the centered count
  double raw_mean = 0.0;
  double raw_se = 0.0;
  MomentSummary normalized;
  nlohmann::json extra = nlohmann::json::object();
};

struct ProbeRow {
  double key = 0.0;  // s for the mixing probe, L for the tail probe
  double estimate = 0.0;
  double stderr_ = 0.0;
};

struct Report {
  std::string kind;
  std::vector<ScheduleEntry> schedule;
  nlohmann::json probe = nlohmann::json::object();
  nlohmann::json metadata = nlohmann::json::object();
};

struct ExperimentResult {
  Report report;
  std::vector<TrialRecord> records;  // ordered by (trial, T)
  std::vector<ProbeRow> table;
};

inline constexpr const char* kCodeVersion = "latclt 0.1.0";

ExperimentResult run_dioph_clt(const ExperimentConfig& config, int threads = 1);
ExperimentResult run_fuchs_d1(const ExperimentConfig& config, int threads = 1);
ExperimentResult run_lattice_clt(const ExperimentConfig& config, int threads = 1);
ExperimentResult run_spiral_clt(const ExperimentConfig& config, int threads = 1);
ExperimentResult run_mixing_probe(const ExperimentConfig& config, int threads = 1);
ExperimentResult run_tail_probe(const ExperimentConfig& config, int threads = 1);

/// Dispatches on config.kind.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

/// Samples a lattice of dimension d with the configured sampler.
UnimodularLattice sample_lattice(const ExperimentConfig& config, Rng& rng);

/// Rebuilds the raw count from a normalized value: center + scale * z.
double denormalize(const ScheduleEntry& entry, double normalized);

/// Whether trial `index` is in the 1% audit subsample of the Diophantine driver.
bool in_audit_sample(std::uint64_t seed, std::int64_t index);

}  // namespace latclt
