// latclt: command-line front end for the experiment drivers and the
// one-off counting utilities.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "latclt/config.hpp"
#include "latclt/counting.hpp"
#include "latclt/experiments.hpp"

namespace {

using nlohmann::json;

struct Invocation {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int threads = 1;
};

json load_document(const Invocation& inv) {
  json doc = json::object();
  if (!inv.config_path.empty()) {
    std::ifstream in(inv.config_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config " + inv.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw latclt::ConfigError(inv.config_path + ": invalid JSON: " + e.what());
    }
  }
  for (const std::string& s : inv.overrides) latclt::apply_override(doc, s);
  return doc;
}

int run_experiment(const std::string& kind, const Invocation& inv) {
  json doc = load_document(inv);
  if (doc.contains("kind") && doc["kind"] != kind) {
    throw latclt::ConfigError("kind: config says " + doc["kind"].dump() + " but the subcommand is " + kind);
  }
  doc["kind"] = kind;
  const latclt::ExperimentConfig config = latclt::parse_config_json(doc);
  const latclt::ExperimentResult result = latclt::run_experiment(config, inv.threads);
  std::string dir = inv.out_dir.empty() ? config.output : inv.out_dir;
  if (dir.empty()) dir = "out";
  latclt::emit_outputs(result, config, dir);
  std::cout << "wrote " << dir << "/trials.csv and " << dir << "/summary.json\n";
  for (const latclt::ScheduleEntry& e : result.report.schedule) {
    const latclt::MomentSummary& m = e.normalized;
    std::printf("T=%s mean=%s var=%s skew=%s exkurt=%s ks=%s\n", latclt::format_real(e.T).c_str(),
                latclt::format_real(m.mean).c_str(), latclt::format_real(m.variance).c_str(),
                latclt::format_real(m.skewness).c_str(), latclt::format_real(m.excess_kurtosis).c_str(),
                latclt::format_real(m.ks).c_str());
  }
  if (!result.table.empty()) std::cout << latclt::probe_csv(result.report.kind, result.table);
  return 0;
}

latclt::UnimodularLattice utility_lattice(const latclt::UtilityConfig& u) {
  if (u.basis) return latclt::UnimodularLattice(*u.basis);
  latclt::ExperimentConfig c;
  c.d = u.d;
  c.sampler = u.sampler;
  c.t0 = u.t0;
  latclt::Rng rng = latclt::trial_rng(u.seed, 0);
  return latclt::sample_lattice(c, rng);
}

json basis_json(const latclt::MatrixD& b) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < b.cols(); ++c) row.push_back(std::stod(latclt::format_real(b(r, c))));
    rows.push_back(row);
  }
  return rows;
}

int run_utility(const std::string& name, const Invocation& inv) {
  const latclt::UtilityConfig u = latclt::parse_utility_config(load_document(inv));
  json out;
  if (name == "volume") {
    const latclt::ProductDomain domain(u.block_system(), u.a, u.b, u.T);
    const double vol = latclt::domain_volume(domain);
    out["volume"] = vol;
    if (u.target) {
      out["angular_volume"] = latclt::angular_volume(*u.target);
      out["spiral_mean"] = latclt::spiral_fraction(*u.target, u.block_system()) * vol;
    }
  } else {
    const latclt::UnimodularLattice lattice = utility_lattice(u);
    out["basis"] = basis_json(lattice.basis());
    if (name == "count") {
      const latclt::ProductDomain domain(u.block_system(), u.a, u.b, u.T);
      const latclt::EnumerationOptions options{u.delta, latclt::kDefaultEnumerationCap};
      const latclt::AngularTarget target = u.target ? *u.target : latclt::AngularTarget::full(domain.system().num_blocks());
      const latclt::SpiralCounts c = latclt::count_domain_and_spiraling(lattice, domain, target, options);
      out["count"] = c.in_domain;
      if (u.target) out["spiraling"] = c.in_target;
      out["volume"] = latclt::domain_volume(domain);
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice point counting and central limit experiments"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"dioph-clt", "CLT for weighted Diophantine approximation counts"},
      {"fuchs1d", "one-dimensional Diophantine counts with the log log normalization"},
      {"lattice-clt", "CLT for lattice points in product domains"},
      {"spiral-clt", "CLT for spiraling lattice points"},
      {"mixing-probe", "correlation decay along the diagonal flow"},
      {"tail-probe", "exceedance tail of Siegel transforms on torus translates"},
  };
  const std::vector<std::pair<std::string, std::string>> utilities = {
      {"count", "count points of one lattice in one domain"},
      {"volume", "volume of a product domain"},
      {"sample-lattice", "draw one random unimodular lattice"},
  };

  Invocation inv;
  std::string chosen;
  bool is_experiment = false;
  auto add = [&](const std::string& name, const std::string& help, bool experiment) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", inv.overrides, "override a config key, key=value");
    if (experiment) {
      sub->add_option("--out", inv.out_dir, "output directory");
      sub->add_option("--threads", inv.threads, "worker threads")->check(CLI::Range(1, 1024));
    }
    sub->callback([&chosen, &is_experiment, name, experiment] {
      chosen = name;
      is_experiment = experiment;
    });
  };
  for (const auto& [name, help] : experiments) add(name, help, true);
  for (const auto& [name, help] : utilities) add(name, help, false);

  CLI11_PARSE(app, argc, argv);

  try {
    return is_experiment ? run_experiment(chosen, inv) : run_utility(chosen, inv);
  } catch (const latclt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
