#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "latclt/config.hpp"

using namespace latclt;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const ExperimentConfig c =
      parse_config(R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"w":[0.5,0.5],"T":["2^20"],"M":1000})");
  CHECK(c.kind == ExperimentKind::kDiophClt);
  CHECK(c.T_schedule == std::vector<double>{1048576.0});
  CHECK(c.t0 == 32.0);
  CHECK(c.seed == 0);
  CHECK(c.delta == 0.99);
  CHECK(c.trials == 1000);
}

TEST_CASE("constraint and schema errors") {
  CHECK(error_of(R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"w":[0.5,0.6],"T":["2^20"]})").find("sum w_i = 1") !=
        std::string::npos);
  CHECK(error_of(R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"T":["2^20","2^10"]})").find("increasing") !=
        std::string::npos);
  CHECK(error_of(R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"T":[1024],"bogus":1})").find("bogus") !=
        std::string::npos);
  CHECK(error_of(R"({"kind":"lattice-clt","d":2,"T":[8],"target":[{"type":"arc","length":1,"x":2}]})")
            .find("target[0].x") != std::string::npos);
  CHECK(error_of(R"({"kind":"dioph-clt","d":"two"})").find("d:") == 0);
  CHECK(error_of(R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"T":["3^4"]})").find("T[0]") == 0);
  CHECK_FALSE(error_of("{not json").empty());
}

TEST_CASE("round trip") {
  const char* texts[] = {
      R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"w":[0.7,0.3],"T":["2^10","2^15"],"M":12,"seed":99})",
      R"({"kind":"spiral-clt","d":3,"system":{"variant":"norm","sizes":[2,1],"stacked":[[1,0.2,0],[0,1,0],[0.1,0,1]]},
          "a":0.5,"b":3,"T":[4,8],"target":[{"type":"arc","start":0.1,"length":2},{"type":"sign","minus":false}],
          "sampler":"approx","t0":8})",
      R"({"kind":"mixing-probe","d":3,"s":[0,1,2],"cap":5,"test_function":{"kind":"box","half_widths":[1,1,2]}})",
      R"({"kind":"tail-probe","d":2,"L":[4,8,16],"n":12,"M":10})",
  };
  for (const char* t : texts) {
    const ExperimentConfig c = parse_config(t);
    const ExperimentConfig back = parse_config(serialize_config(c).dump());
    CHECK(same_config(c, back));
    CHECK(serialize_config(back) == serialize_config(c));
  }
}

TEST_CASE("overrides") {
  nlohmann::json doc = nlohmann::json::parse(R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"T":[1024]})");
  apply_override(doc, "M=17");
  apply_override(doc, "T=[\"2^12\"]");
  apply_override(doc, "test_function.radius=2");
  apply_override(doc, "sampler=exact");
  CHECK(doc["M"] == 17);
  CHECK(doc["test_function"]["radius"] == 2);
  CHECK(doc["sampler"] == "exact");
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
  doc.erase("test_function");
  doc.erase("sampler");
  CHECK(parse_config_json(doc).T_schedule == std::vector<double>{4096.0});
}

TEST_CASE("output formatting") {
  CHECK(trials_csv({}) == "trial,T,raw_count,normalized\n");
  CHECK(trials_csv({{0, 1048576.0, 14, 0.123456789}}) ==
        "trial,T,raw_count,normalized\n0,1048576,14,0.123456789\n");
  CHECK(format_real(1.0 / 3.0) == "0.333333333");
  CHECK(probe_csv("tail-probe", {{4, 0.5, 0.01}}) == "L,exceedance,stderr\n4,0.5,0.01\n");
}

TEST_CASE("emitted files are byte stable") {
  const ExperimentConfig c =
      parse_config(R"({"kind":"dioph-clt","d":2,"c":[0.5,0.5],"w":[0.5,0.5],"T":["2^8","2^12"],"M":50})");
  const auto base = std::filesystem::temp_directory_path() / "latclt_emit_test";
  std::filesystem::remove_all(base);
  const ExperimentResult r1 = run_experiment(c);
  const ExperimentResult r2 = run_experiment(c, 2);
  emit_outputs(r1, c, base / "a");
  emit_outputs(r2, c, base / "b");
  CHECK(slurp(base / "a" / "trials.csv") == slurp(base / "b" / "trials.csv"));
  CHECK(slurp(base / "a" / "summary.json") == slurp(base / "b" / "summary.json"));
  const auto summary = nlohmann::json::parse(slurp(base / "a" / "summary.json"));
  CHECK(summary["seed"] == 0);
  CHECK(summary["T"][1] == 4096.0);
  CHECK(summary["config"]["M"] == 50);
  std::filesystem::remove_all(base);
}

TEST_CASE("utility config") {
  const UtilityConfig u = parse_utility_config(nlohmann::json::parse(R"({"basis":[[1,0],[0,1]],"a":0.5,"b":2.5,"T":3})"));
  CHECK(u.d == 2);
  CHECK(u.basis.has_value());
  CHECK_THROWS_AS(parse_utility_config(nlohmann::json::parse(R"({"a":2,"b":1})")), ConfigError);
}
