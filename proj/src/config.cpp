#include "latclt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace latclt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + message);
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string child(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) fail(child(path, key), "unknown key");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::int64_t as_int(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v) && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  fail(path, "expected an integer");
}

std::uint64_t as_uint(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const std::int64_t v = as_int(j, path);
  if (v < 0) fail(path, "expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::vector<double> as_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], child(path, i)));
  return out;
}

double parse_T(const json& j, const std::string& path) {
  if (j.is_string()) {
    static const std::regex pow2(R"(^\s*2\s*\^\s*(\d{1,3})\s*$)");
    std::smatch m;
    const std::string s = j.get<std::string>();
    if (!std::regex_match(s, m, pow2)) fail(path, "expected a number or a \"2^N\" literal");
    const int n = std::stoi(m[1].str());
    if (n > 1000) fail(path, "exponent too large");
    return std::ldexp(1.0, n);
  }
  return as_number(j, path);
}

MatrixD parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) fail(child(path, 0), "expected a nonempty row");
  const std::size_t cols = j[0].size();
  if (rows > kMaxDim || cols > kMaxDim) fail(path, "matrix larger than " + std::to_string(kMaxDim));
  MatrixD m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::vector<double> row = as_numbers(j[r], child(path, r));
    if (row.size() != cols) fail(child(path, r), "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

json matrix_json(const MatrixD& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

BlockSystem parse_system(const json& j, const std::string& path, int d) {
  check_keys(j, path, {"variant", "sizes", "stacked"});
  ProductVariant variant = ProductVariant::kSigned;
  if (j.contains("variant")) {
    const std::string v = as_string(j["variant"], child(path, "variant"));
    if (v == "signed") variant = ProductVariant::kSigned;
    else if (v == "norm") variant = ProductVariant::kNorm;
    else fail(child(path, "variant"), "expected \"signed\" or \"norm\"");
  }
  std::vector<int> sizes;
  if (j.contains("sizes")) {
    for (double s : as_numbers(j["sizes"], child(path, "sizes"))) {
      if (s != std::floor(s) || s < 1) fail(child(path, "sizes"), "sizes must be positive integers");
      sizes.push_back(static_cast<int>(s));
    }
  } else {
    sizes.assign(static_cast<std::size_t>(d), 1);
  }
  MatrixD stacked = MatrixD::Identity(d, d);
  if (j.contains("stacked")) stacked = parse_matrix(j["stacked"], child(path, "stacked"));
  try {
    return BlockSystem::from_stacked(stacked, sizes, variant);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

json system_json(const BlockSystem& s) {
  return {{"variant", s.variant() == ProductVariant::kSigned ? "signed" : "norm"},
          {"sizes", s.block_sizes()},
          {"stacked", matrix_json(s.stacked())}};
}

AngularTarget parse_target(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of factors");
  std::vector<angular::Factor> factors;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = child(path, i);
    const json& f = j[i];
    if (!f.is_object() || !f.contains("type")) fail(p, "expected an object with a type");
    const std::string type = as_string(f["type"], child(p, "type"));
    if (type == "full") {
      check_keys(f, p, {"type"});
      factors.emplace_back(angular::Full{});
    } else if (type == "sign") {
      check_keys(f, p, {"type", "plus", "minus"});
      angular::Signs s;
      if (f.contains("plus")) s.plus = as_bool(f["plus"], child(p, "plus"));
      if (f.contains("minus")) s.minus = as_bool(f["minus"], child(p, "minus"));
      factors.emplace_back(s);
    } else if (type == "arc") {
      check_keys(f, p, {"type", "start", "length"});
      angular::Arc a;
      if (f.contains("start")) a.start = as_number(f["start"], child(p, "start"));
      if (!f.contains("length")) fail(child(p, "length"), "required");
      a.length = as_number(f["length"], child(p, "length"));
      factors.emplace_back(a);
    } else if (type == "cap") {
      check_keys(f, p, {"type", "axis", "angle"});
      angular::Cap c;
      if (!f.contains("axis")) fail(child(p, "axis"), "required");
      if (!f.contains("angle")) fail(child(p, "angle"), "required");
      const std::vector<double> axis = as_numbers(f["axis"], child(p, "axis"));
      if (axis.empty() || axis.size() > kMaxDim) fail(child(p, "axis"), "bad length");
      c.axis = Eigen::Map<const Eigen::VectorXd>(axis.data(), static_cast<Eigen::Index>(axis.size()));
      c.angle = as_number(f["angle"], child(p, "angle"));
      factors.emplace_back(c);
    } else {
      fail(child(p, "type"), "expected full, sign, arc or cap");
    }
  }
  try {
    return AngularTarget(std::move(factors));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

json target_json(const AngularTarget& t) {
  json out = json::array();
  for (const angular::Factor& f : t.factors()) {
    std::visit(
        [&out](const auto& v) {
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, angular::Full>) {
            out.push_back({{"type", "full"}});
          } else if constexpr (std::is_same_v<V, angular::Signs>) {
            out.push_back({{"type", "sign"}, {"plus", v.plus}, {"minus", v.minus}});
          } else if constexpr (std::is_same_v<V, angular::Arc>) {
            out.push_back({{"type", "arc"}, {"start", v.start}, {"length", v.length}});
          } else {
            std::vector<double> axis(v.axis.data(), v.axis.data() + v.axis.size());
            out.push_back({{"type", "cap"}, {"axis", axis}, {"angle", v.angle}});
          }
        },
        f);
  }
  return out;
}

SamplerKind parse_sampler(const json& j, const std::string& path) {
  const std::string s = as_string(j, path);
  if (s == "auto") return SamplerKind::kAuto;
  if (s == "exact") return SamplerKind::kExact2d;
  if (s == "approx") return SamplerKind::kApprox;
  fail(path, "expected auto, exact or approx");
}

const char* sampler_name(SamplerKind s) {
  switch (s) {
    case SamplerKind::kAuto: return "auto";
    case SamplerKind::kExact2d: return "exact";
    case SamplerKind::kApprox: return "approx";
  }
  return "auto";
}

TestFunctionSpec parse_test_function(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "radius", "margin", "half_widths"});
  TestFunctionSpec t;
  if (j.contains("kind")) t.kind = as_string(j["kind"], child(path, "kind"));
  if (t.kind != "ball" && t.kind != "box" && t.kind != "bump") fail(child(path, "kind"), "expected ball, box or bump");
  if (j.contains("radius")) t.radius = as_number(j["radius"], child(path, "radius"));
  if (j.contains("margin")) t.margin = as_number(j["margin"], child(path, "margin"));
  if (j.contains("half_widths")) t.half_widths = as_numbers(j["half_widths"], child(path, "half_widths"));
  return t;
}

int parse_dim(const json& j, const std::string& path) {
  const std::int64_t d = as_int(j, path);
  if (d < 1 || d > kMaxDim) fail(path, "d must lie in 1.." + std::to_string(kMaxDim));
  return static_cast<int>(d);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
  }
  return parse_config_json(doc);
}

ExperimentConfig parse_config_json(const json& doc) {
  check_keys(doc, "", {"kind", "d", "w", "c", "system", "a", "b", "T", "M", "seed", "t0", "delta",
                       "sampler", "target", "s", "cap", "L", "n", "test_function", "output"});
  ExperimentConfig c;
  if (!doc.contains("kind")) fail("kind", "required");
  try {
    c.kind = experiment_kind_from_string(as_string(doc["kind"], "kind"));
  } catch (const std::invalid_argument& e) {
    fail("kind", e.what());
  }
  if (!doc.contains("d")) fail("d", "required");
  c.d = parse_dim(doc["d"], "d");
  if (doc.contains("w")) c.weights = as_numbers(doc["w"], "w");
  if (doc.contains("c")) c.constants = as_numbers(doc["c"], "c");
  if (doc.contains("system")) c.system = parse_system(doc["system"], "system", c.d);
  if (doc.contains("a")) c.a = as_number(doc["a"], "a");
  if (doc.contains("b")) c.b = as_number(doc["b"], "b");
  if (doc.contains("T")) {
    const json& T = doc["T"];
    if (T.is_array()) {
      for (std::size_t i = 0; i < T.size(); ++i) c.T_schedule.push_back(parse_T(T[i], child("T", i)));
    } else {
      c.T_schedule.push_back(parse_T(T, "T"));
    }
  }
  if (doc.contains("M")) c.trials = as_int(doc["M"], "M");
  if (doc.contains("seed")) c.seed = as_uint(doc["seed"], "seed");
  if (doc.contains("t0")) c.t0 = as_number(doc["t0"], "t0");
  if (doc.contains("delta")) c.delta = as_number(doc["delta"], "delta");
  if (doc.contains("sampler")) c.sampler = parse_sampler(doc["sampler"], "sampler");
  if (doc.contains("target")) c.target = parse_target(doc["target"], "target");
  if (doc.contains("s")) c.separations = as_numbers(doc["s"], "s");
  if (doc.contains("cap")) c.cap = as_number(doc["cap"], "cap");
  if (doc.contains("L")) c.L_grid = as_numbers(doc["L"], "L");
  if (doc.contains("n")) c.flow_steps = static_cast<int>(as_int(doc["n"], "n"));
  if (doc.contains("test_function")) c.test_function = parse_test_function(doc["test_function"], "test_function");
  if (doc.contains("output")) c.output = as_string(doc["output"], "output");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("constraint violated: ") + e.what());
  }
  return c;
}

json serialize_config(const ExperimentConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["d"] = c.d;
  j["w"] = c.weights;
  j["c"] = c.constants;
  if (c.system) j["system"] = system_json(*c.system);
  j["a"] = c.a;
  j["b"] = c.b;
  j["T"] = c.T_schedule;
  j["M"] = c.trials;
  j["seed"] = c.seed;
  j["t0"] = c.t0;
  j["delta"] = c.delta;
  j["sampler"] = sampler_name(c.sampler);
  if (c.target) j["target"] = target_json(*c.target);
  j["s"] = c.separations;
  j["cap"] = c.cap;
  j["L"] = c.L_grid;
  j["n"] = c.flow_steps;
  if (c.test_function) {
    j["test_function"] = {{"kind", c.test_function->kind},
                          {"radius", c.test_function->radius},
                          {"margin", c.test_function->margin},
                          {"half_widths", c.test_function->half_widths}};
  }
  j["output"] = c.output;
  return j;
}

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

void apply_override(json& doc, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("--set " + std::string(assignment) + ": expected key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set " + key + ": empty key component");
    if (!node->is_object()) throw ConfigError("--set " + key + ": parent is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

UtilityConfig parse_utility_config(const json& doc) {
  check_keys(doc, "", {"d", "system", "a", "b", "T", "basis", "target", "sampler", "seed", "t0", "delta"});
  UtilityConfig u;
  if (doc.contains("d")) u.d = parse_dim(doc["d"], "d");
  if (doc.contains("basis")) {
    u.basis = parse_matrix(doc["basis"], "basis");
    if (!doc.contains("d")) u.d = static_cast<int>(u.basis->rows());
    if (u.basis->rows() != u.d || u.basis->cols() != u.d) fail("basis", "expected a d x d matrix");
  }
  if (doc.contains("system")) u.system = parse_system(doc["system"], "system", u.d);
  if (doc.contains("a")) u.a = as_number(doc["a"], "a");
  if (doc.contains("b")) u.b = as_number(doc["b"], "b");
  if (doc.contains("T")) u.T = parse_T(doc["T"], "T");
  if (doc.contains("target")) u.target = parse_target(doc["target"], "target");
  if (doc.contains("sampler")) u.sampler = parse_sampler(doc["sampler"], "sampler");
  if (doc.contains("seed")) u.seed = as_uint(doc["seed"], "seed");
  if (doc.contains("t0")) u.t0 = as_number(doc["t0"], "t0");
  if (doc.contains("delta")) u.delta = as_number(doc["delta"], "delta");
  try {
    ProductDomain(u.block_system(), u.a, u.b, u.T);
    if (u.target) u.target->check_compatible(u.block_system());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("constraint violated: ") + e.what());
  }
  return u;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace {

// Rounds every real in a document to 9 significant digits.
json rounded(const json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_real(v));
  }
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = rounded(*it);
    return out;
  }
  return j;
}

json moments_json(const MomentSummary& m) {
  return {{"samples", m.samples},
          {"mean", m.mean},
          {"variance", m.variance},
          {"skewness", m.skewness},
          {"excess_kurtosis", m.excess_kurtosis},
          {"cum3", m.cum3},
          {"cum4", m.cum4},
          {"ks", m.ks},
          {"se", {{"mean", m.se_mean},
                  {"variance", m.se_variance},
                  {"skewness", m.se_skewness},
                  {"excess_kurtosis", m.se_kurtosis},
                  {"ks", m.se_ks}}}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

json summary_json(const ExperimentResult& result, const ExperimentConfig& config) {
  const Report& r = result.report;
  json s;
  s["kind"] = r.kind;
  s["code_version"] = kCodeVersion;
  s["seed"] = config.seed;
  s["T"] = config.T_schedule;
  s["config"] = serialize_config(config);
  s["metadata"] = r.metadata;
  json schedule = json::array();
  for (const ScheduleEntry& e : r.schedule) {
    json row = {{"T", e.T},
                {"center", e.center},
                {"scale", e.scale},
                {"raw_mean", e.raw_mean},
                {"raw_se", e.raw_se},
                {"normalized", moments_json(e.normalized)}};
    for (const auto& [k, v] : e.extra.items()) row[k] = v;
    schedule.push_back(row);
  }
  s["schedule"] = schedule;
  // Proposition-style diagnostics over the schedule: variance stabilization
  // and shrinking higher cumulants.
  if (r.schedule.size() >= 2) {
    json variance = json::array();
    json cum3 = json::array();
    json cum4 = json::array();
    for (const ScheduleEntry& e : r.schedule) {
      variance.push_back(e.normalized.variance);
      cum3.push_back(e.normalized.cum3);
      cum4.push_back(e.normalized.cum4);
    }
    s["trend"] = {{"variance", variance}, {"cum3", cum3}, {"cum4", cum4}};
  }
  if (!r.probe.empty()) s["probe"] = r.probe;
  return rounded(s);
}

std::string trials_csv(const std::vector<TrialRecord>& records) {
  std::string out = "trial,T,raw_count,normalized\n";
  for (const TrialRecord& t : records) {
    out += std::to_string(t.trial);
    out += ',';
    out += format_real(t.T);
    out += ',';
    out += std::to_string(t.raw_count);
    out += ',';
    out += format_real(t.normalized);
    out += '\n';
  }
  return out;
}

std::string probe_file_name(const std::string& kind) {
  return kind == "mixing-probe" ? "decay.csv" : "tail.csv";
}

std::string probe_csv(const std::string& kind, const std::vector<ProbeRow>& rows) {
  std::string out = kind == "mixing-probe" ? "s,estimate,stderr\n" : "L,exceedance,stderr\n";
  for (const ProbeRow& r : rows) {
    out += format_real(r.key) + ',' + format_real(r.estimate) + ',' + format_real(r.stderr_) + '\n';
  }
  return out;
}

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "trials.csv", trials_csv(result.records));
  write_file(dir / "summary.json", summary_json(result, config).dump(2) + "\n");
  const std::string& kind = result.report.kind;
  if (kind == "mixing-probe" || kind == "tail-probe") {
    write_file(dir / probe_file_name(kind), probe_csv(kind, result.table));
  }
}

}  // namespace latclt
