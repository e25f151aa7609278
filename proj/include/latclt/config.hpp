#pragma once

// JSON configuration and the output file set.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "latclt/experiments.hpp"

namespace latclt {

/// Schema or constraint violation; the message starts with the key path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig parse_config_json(const nlohmann::json& doc);
nlohmann::json serialize_config(const ExperimentConfig& config);

/// Structural equality through the canonical serialization.
bool same_config(const ExperimentConfig& a, const ExperimentConfig& b);

/// Applies `key=value` to a config document. Dotted keys address nested
/// objects; the value is read as JSON and falls back to a plain string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Settings for the one-off subcommands (count, volume, sample-lattice).
struct UtilityConfig {
  int d = 2;
  std::optional<BlockSystem> system;
  double a = 1.0;
  double b = 2.0;
  double T = 1.0;
  std::optional<MatrixD> basis;  // columns; sampled when unset
  std::optional<AngularTarget> target;
  SamplerKind sampler = SamplerKind::kAuto;
  std::uint64_t seed = 0;
  double t0 = 32.0;
  double delta = kDefaultDelta;

  BlockSystem block_system() const { return system ? *system : BlockSystem::identity(d); }
};

UtilityConfig parse_utility_config(const nlohmann::json& doc);

/// Reals with 9 significant digits, as written to every output file.
std::string format_real(double x);

/// Writes trials.csv, summary.json and, for probes, the probe table.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir);

nlohmann::json summary_json(const ExperimentResult& result, const ExperimentConfig& config);
std::string trials_csv(const std::vector<TrialRecord>& records);
/// `s,estimate,stderr` or `L,exceedance,stderr`.
std::string probe_csv(const std::string& kind, const std::vector<ProbeRow>& rows);
std::string probe_file_name(const std::string& kind);

}  // namespace latclt
