#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "apd/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace apd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "apd_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string model_file(const std::string& name) {
  const char* dir = std::getenv("APD_MODELS_DIR");
  REQUIRE(dir != nullptr);
  return (fs::path(dir) / (name + ".json")).string();
}

}  // namespace

TEST_CASE("decode prints groups") {
  const auto r = run({"decode", "--model", "builtin:determ4", "--decoder", "apd"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("[A C B A]\n", 0) == 0);
  const auto ar = run({"decode", "--model", "builtin:determ4", "--decoder", "ar"});
  CHECK(ar.out.rfind("[A] [C] [B] [A]\n", 0) == 0);
}

TEST_CASE("decode json output and trace file") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  const auto path = scratch("trace.json");
  const auto r = run({"decode", "--model", model_file("dep4"), "--decoder", "apd", "--seed", "9",
                      "--format", "json", "--out", path.string()});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["manifest"]["timestamp"] == "1970-01-01T00:00:00Z");
  CHECK(doc["manifest"]["config"]["seed"] == 9);
  CHECK(doc["manifest"]["model_digests"].begin()->get<std::string>().rfind("sha256:", 0) == 0);
  CHECK(doc["trace"]["tokens"].size() == 4);
  CHECK(slurp(path) == r.out);
}

TEST_CASE("validation errors exit with 1") {
  CHECK(run({"decode", "--model", "builtin:nope"}).code == kExitValidation);
  CHECK(run({"decode", "--model", "builtin:dep4", "--decoder", "beam"}).code == kExitValidation);
  CHECK(run({"decode", "--model", "builtin:dep4", "--M", "9"}).code == kExitValidation);
  CHECK(run({"decode", "--model", "builtin:dep4", "--decoder", "apd", "--small-model",
             "builtin:j1"})
            .code == kExitValidation);
  CHECK(run({"decode"}).code == kExitValidation);
  CHECK(run({"frobnicate"}).code == kExitValidation);
  CHECK(run({"verify", "nope"}).code == kExitValidation);
  CHECK(run({"sweep", "--R", "0,x"}).code == kExitValidation);
  const auto r = run({"decode", "--model", "/no/such/file.json"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("help and version exit with 0") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).out == std::string(kArtifactVersion) + "\n");
}

TEST_CASE("verify desiderata passes") {
  const auto r = run({"verify", "desiderata"});
  CHECK(r.code == 0);
  CHECK(r.out.find("ALL PASSED") != std::string::npos);
}

TEST_CASE("mi-gap on j1") {
  const auto r = run({"mi-gap", "--model", "builtin:j1", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(std::abs(doc["mi_gap_nats"].get<double>() - 0.1927447570217574) < 1e-9);
}

TEST_CASE("sweep writes matching csv and json") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  const auto stem = scratch("sweep");
  const auto r = run({"sweep", "--model", "builtin:dep4", "--decoder", "ar,apd", "--R", "0,1",
                      "--trials", "200", "--out", stem.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(stem.string() + ".csv");
  const auto doc = nlohmann::json::parse(slurp(stem.string() + ".json"));
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("# {", 0) == 0);
  CHECK(nlohmann::json::parse(line.substr(2)) == doc["manifest"]);
  std::getline(lines, line);
  CHECK(line == "decoder,R,W,M,mean_k,se_k,tv,se_tv,throughput,seed,trials");
  std::size_t row = 0;
  while (std::getline(lines, line)) {
    const auto& j = doc["rows"][row++];
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 11);
    CHECK(cells[0] == j["decoder"].get<std::string>());
    CHECK(cells[1].empty() == j["R"].is_null());
    CHECK(std::stod(cells[4]) == j["mean_k"].get<double>());
    CHECK(std::stod(cells[6]) == j["tv"].get<double>());
    CHECK(std::stod(cells[8]) == j["throughput"].get<double>());
  }
  CHECK(row == 3);
  CHECK(doc["rows"].size() == 3);
}

TEST_CASE("empty decoder list gives a header-only csv") {
  const auto r = run({"sweep", "--decoder", "", "--trials", "10"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 2);
}

TEST_CASE("reruns are byte identical") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  for (const auto& stem : {a, b}) {
    REQUIRE(run({"sweep", "--model", "builtin:chain8", "--decoder", "semi:2,apd", "--R", "0.5",
                 "--trials", "300", "--seed", "12", "--out", stem.string()})
                .code == 0);
  }
  CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));
  CHECK(slurp(a.string() + ".csv") == slurp(b.string() + ".csv"));
}

TEST_CASE("decode grouping examples") {
  const auto r1 = run({"decode", "--model", "builtin:chain8", "--decoder", "apd", "--R", "1",
                       "--M", "8"});
  REQUIRE(r1.code == 0);
  CHECK(std::count(r1.out.begin(), r1.out.end(), '[') == 1);
  const auto s2 = run({"decode", "--model", "builtin:dep4", "--decoder", "semi:2"});
  REQUIRE(s2.code == 0);
  const std::string first_line = s2.out.substr(0, s2.out.find('\n'));
  CHECK(std::count(first_line.begin(), first_line.end(), '[') == 2);
  CHECK(std::count(first_line.begin(), first_line.end(), ' ') == 3);
  const auto a = run({"decode", "--model", model_file("j1"), "--decoder", "ar", "--seed", "7"});
  const auto b = run({"decode", "--model", model_file("j1"), "--decoder", "ar", "--seed", "7"});
  CHECK(a.out == b.out);
}

TEST_CASE("ar-only sweep has unit mean k") {
  const auto r = run({"sweep", "--decoder", "ar", "--trials", "100", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  REQUIRE(doc["rows"].size() == 1);
  CHECK(doc["rows"][0]["mean_k"] == 1.0);
  CHECK(doc["rows"][0]["R"].is_null());
}
