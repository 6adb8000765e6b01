// Command-line interface, driven in-process through run_cli and once through
// the built executable for exit codes.

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "cli.hpp"

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = gdcount::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) v.push_back(f);
  return v;
}

}  // namespace

TEST_CASE("pmf", "[cli]") {
  SECTION("univariate point") {
    const auto r = run({"pmf", "--mu", "1", "--v", "1", "--x", "0"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 2);
    CHECK(l[0] == "x,pmf");
    const auto f = fields(l[1]);
    CHECK(f[0] == "0");
    CHECK(std::stod(f[1]) == Catch::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(f[1].rfind("0.367879", 0) == 0);
  }
  SECTION("univariate grid") {
    const auto r = run({"pmf", "--mu", "10", "--v", "25", "--grid"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    CHECK(l.size() == 52);  // header + 0..50
    double total = 0.0;
    for (std::size_t i = 1; i < l.size(); ++i) total += std::stod(fields(l[i])[1]);
    CHECK(std::fabs(total - 1.0) <= 1e-6);
  }
  SECTION("bivariate point, both pmfs") {
    const auto r = run({"pmf", "--mu", "50,50", "--v", "25,25", "--rho", "0.5", "--x", "50,50", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["values"]["exact"].get<double>() > 0.0);
    CHECK(j["values"]["exact_error"].get<double>() == 0.0);
    CHECK(j["values"]["approx_unnorm"].get<double>() > 0.0);
    CHECK(j["config"]["rho"] == nlohmann::json::array({0.5}));
  }
  SECTION("trivariate point through the lattice rule") {
    const auto r = run({"pmf", "--mu", "4,7,20", "--v", "2,9,20", "--x", "4,7,20", "--which", "exact"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    CHECK(l[0] == "x1,x2,x3,exact,exact_error");
    const auto f = fields(l[1]);
    CHECK(std::stod(f[4]) <= 1e-7);
  }
  SECTION("bivariate grid reports K and the clamp count") {
    const auto r = run({"pmf", "--mu", "10,5", "--v", "5,10", "--rho", "0.7", "--grid", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["metadata"]["K"].get<double>() == Catch::Approx(0.9740902216).margin(1e-9));
    CHECK(j["metadata"].contains("clamped"));
    CHECK(j["grid"]["ranges"].size() == 2);
  }
  SECTION("usage errors") {
    CHECK(run({"pmf", "--mu", "1", "--v", "1"}).code == 1);
    CHECK(run({"pmf", "--mu", "1", "--v", "1", "--x", "0", "--grid"}).code == 1);
    CHECK(run({"pmf", "--mu", "1,2", "--v", "1", "--x", "0"}).code == 1);
    CHECK(run({"pmf", "--mu", "1,2", "--v", "1,2", "--x", "0"}).code == 1);
    CHECK(run({"pmf", "--mu", "-1", "--v", "1", "--x", "0"}).code == 1);
    CHECK(run({"pmf", "--v", "1", "--x", "0"}).code == 1);
    CHECK(run({"pmf", "--mu", "1", "--v", "1", "--x", "0", "--format", "xml"}).code == 1);
    const auto r = run({"pmf", "--mu", "abc", "--v", "1", "--x", "0"});
    CHECK(r.code == 1);
    CHECK(r.err.find("Usage") != std::string::npos);
  }
}

TEST_CASE("cdf and quantile", "[cli]") {
  auto r = run({"cdf", "--mu", "1", "--v", "2", "--x", "0,1"});
  REQUIRE(r.code == 0);
  auto l = lines(r.out);
  CHECK(l[0] == "x,cdf");
  CHECK(std::stod(fields(l[2])[1]) == Catch::Approx(0.75).epsilon(1e-14));

  r = run({"cdf", "--mu", "50,50", "--v", "25,25", "--rho", "0", "--x", "50,50"});
  REQUIRE(r.code == 0);
  l = lines(r.out);
  CHECK(l[0] == "x1,x2,cdf,error");
  const auto f = fields(l[1]);
  const double F50 = std::stod(fields(lines(run({"cdf", "--mu", "50", "--v", "25", "--x", "50"}).out)[1])[1]);
  CHECK(std::stod(f[2]) == Catch::Approx(F50 * F50).epsilon(1e-13));

  r = run({"quantile", "--mu", "1", "--v", "2", "--u", "0.5,0.75,0.9"});
  REQUIRE(r.code == 0);
  l = lines(r.out);
  CHECK(l[0] == "u,x");
  CHECK(fields(l[1])[1] == "0");
  CHECK(fields(l[2])[1] == "1");
  CHECK(run({"quantile", "--mu", "1", "--v", "2", "--u", "1.5"}).code == 1);
  CHECK(run({"quantile", "--mu", "1,1", "--v", "2,2", "--u", "0.5"}).code == 1);
}

TEST_CASE("sample", "[cli]") {
  const std::vector<std::string> args{"sample", "--mu", "50,50", "--v", "25,25", "--rho", "0.5", "--n", "5", "--seed", "7"};
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto l = lines(a.out);
  REQUIRE(l.size() == 6);
  CHECK(l[0] == "x1,x2");
  auto other = args;
  other.back() = "8";
  CHECK(run(other).out != a.out);

  const auto one = run({"sample", "--mu", "1", "--v", "2", "--n", "1000", "--seed", "3", "--format", "json"});
  REQUIRE(one.code == 0);
  const auto j = nlohmann::json::parse(one.out);
  CHECK(j["values"].size() == 1000);
  CHECK(j["metadata"]["defaults"]["seed"] == 0);
  CHECK(j["config"]["seed"] == 3);

  SECTION("three dimensions with an upper-triangle rho") {
    const auto r = run({"sample", "--mu", "5,6,7", "--v", "4,9,7", "--rho", "0.3,-0.2,0.6", "--n", "3"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out)[0] == "x1,x2,x3");
    CHECK(run({"sample", "--mu", "5,6,7", "--v", "4,9,7", "--rho", "0.3", "--n", "3"}).code == 1);
  }
}

TEST_CASE("table1", "[cli]") {
  const auto r = run({"table1", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 5);
  CHECK(l[0].rfind("case,mu1,v1,mu2,v2,rho,rho_prime,K,mu1s,v1s,mu2s,v2s,rhos,", 0) == 0);
  const auto header = fields(l[0]);
  CHECK(header.size() == 13 + 14 + 4);
  for (std::size_t i = 1; i < l.size(); ++i) CHECK(fields(l[i]).size() == header.size());
  CHECK(fields(l[1])[0] == "a");
  CHECK(fields(l[4])[0] == "d");
  CHECK(std::stod(fields(l[1])[7]) == Catch::Approx(0.9949853497).margin(1e-9));
  // Warnings about clamped rounding negatives go to the error stream only.
  CHECK(r.out.find("warning") == std::string::npos);

  const auto j = run({"table1", "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::ordered_json::parse(j.out);
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"config", "grid", "rows", "metadata"});
  CHECK(doc["rows"].size() == 4);
  CHECK(doc["rows"][1]["reference"]["rho_prime"] == 0.7129);
  CHECK(doc["metadata"]["defaults"]["sigmas"] == 8.0);
  CHECK(doc["metadata"]["defaults"]["accuracy"] == 1e-7);
  CHECK(doc.dump(2) + "\n" == j.out);
}

TEST_CASE("contour", "[cli]") {
  const auto r = run({"contour", "--mu", "50,50", "--v", "25,25", "--rho", "0.5", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["values"]["exact"].size() == 81);
  REQUIRE(j["values"]["exact"][0].size() == 81);
  double total = 0.0;
  for (const auto& row : j["values"]["approx"])
    for (const auto& v : row) total += v.get<double>();
  CHECK(std::fabs(total - 1.0) <= 1e-12);
  CHECK(j["metadata"]["argmax_match"] == true);
  CHECK(j["metadata"]["tv_distance"].get<double>() == Catch::Approx(0.0231508516).margin(1e-9));

  const auto csv = run({"contour", "--mu", "10,5", "--v", "5,10", "--rho", "0.7", "--which", "approx"});
  REQUIRE(csv.code == 0);
  const auto l = lines(csv.out);
  CHECK(l[0] == "x1,x2,approx");
  CHECK(l.size() == 1 + 21 * 32);
  CHECK(run({"contour", "--mu", "1,2,3", "--v", "1,2,3"}).code == 1);
}

TEST_CASE("numerical failures and output files", "[cli]") {
  const auto r = run({"pmf", "--mu", "50,50", "--v", "25,25", "--rho", "1.0", "--x", "50,50"});
  CHECK(r.code == 2);
  CHECK(r.err.find("numerical error") != std::string::npos);
  CHECK(r.out.empty());

  const auto path = std::filesystem::temp_directory_path() / "gdcount_cli_test.csv";
  std::filesystem::remove(path);
  const auto w = run({"quantile", "--mu", "1", "--v", "2", "--u", "0.5", "-o", path.string()});
  CHECK(w.code == 0);
  CHECK(w.out.empty());
  std::ifstream in(path);
  std::stringstream content;
  content << in.rdbuf();
  CHECK(content.str() == "u,x\n0.5,0\n");
  std::filesystem::remove(path);

  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("table1") != std::string::npos);
}

TEST_CASE("installed executable", "[cli]") {
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  const std::string tool = GDCOUNT_TOOL;
  CHECK(status(tool + " pmf --mu 1 --v 1 --x 0") == 0);
  CHECK(status(tool + " pmf --mu 1 --v 1") == 1);
  CHECK(status(tool + " pmf --mu 50,50 --v 25,25 --rho 1.0 --x 50,50") == 2);

  FILE* pipe = popen((tool + " pmf --mu 1 --v 1 --x 0").c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 256> buf{};
  std::string out;
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  pclose(pipe);
  CHECK(out == run({"pmf", "--mu", "1", "--v", "1", "--x", "0"}).out);
}
