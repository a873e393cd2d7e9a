#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kspacings/cli.hpp"
#include "kspacings/harness.hpp"

using namespace kspacings;
namespace fs = std::filesystem;

namespace {
struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "kspacings_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}
}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("beta-plus") {
    const Run r = run({"beta-plus", "--c", "1"});
    CHECK(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("beta").get<double>() == doctest::Approx(2.718281828).epsilon(1e-9));
    CHECK(std::abs(j.at("residual").get<double>()) <= 1e-12);
  }

  TEST_CASE("gamma subcommands") {
    Run r = run({"gamma", "quantile", "--k", "1", "--p", "0.5"});
    CHECK(r.code == kExitOk);
    CHECK(std::stod(r.out) == doctest::Approx(0.6931472).epsilon(1e-7));
    r = run({"gamma", "cdf", "--k", "2", "--x", "2"});
    CHECK(std::stod(r.out) == doctest::Approx(0.5939942).epsilon(1e-7));
    r = run({"gamma", "tail-bounds", "--k", "2", "--x", "4"});
    CHECK(r.code == kExitOk);
    CHECK(nlohmann::json::parse(r.out).at("upper").get<double>() ==
          doctest::Approx(8.0 * std::exp(-4.0)).epsilon(1e-14));
    r = run({"gamma", "tk", "--k", "2", "--delta", "3"});
    CHECK(nlohmann::json::parse(r.out).at("value").get<double>() == doctest::Approx(0.0732626).epsilon(1e-6));
    r = run({"gamma", "cdf", "--k", "2", "--x", "-1"});
    CHECK(r.code == kExitRuntime);
  }

  TEST_CASE("usage errors") {
    CHECK(run({"modulus", "--bogus"}).code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"gamma", "cdf", "--k", "x", "--x", "1"}).code == kExitUsage);
  }

  TEST_CASE("help on every subcommand") {
    for (const char* sub : {"gamma", "beta-plus", "sample-spacings", "modulus", "verify",
                            "conditions", "experiment"}) {
      const Run r = run({sub, "--help"});
      CAPTURE(sub);
      CHECK(r.code == kExitOk);
      CHECK(r.out.find("Usage") != std::string::npos);
    }
    CHECK(run({"gamma", "tk", "--help"}).code == kExitOk);
  }

  TEST_CASE("missing config names the path") {
    const Run r = run({"experiment", "--config", "missing.json"});
    CHECK(r.code == kExitRuntime);
    CHECK(r.err.find("missing.json") != std::string::npos);
  }

  TEST_CASE("sample-spacings feeds modulus") {
    const fs::path dir = scratch("pipe");
    const Run s = run({"sample-spacings", "--k", "2", "--N", "200", "--seed", "4"});
    REQUIRE(s.code == kExitOk);
    CHECK(s.out.rfind("# {", 0) == 0);
    CHECK(s.out.find("\ni,Y,D,W\n") != std::string::npos);
    write_text(dir / "sample.csv", s.out);
    const Run m = run({"modulus", "--input", (dir / "sample.csv").string(), "--a", "0.05",
                       "--normalized", "--theta"});
    REQUIRE(m.code == kExitOk);
    const auto j = nlohmann::json::parse(m.out);
    CHECK(j.at("N").get<int>() == 200);
    CHECK(j.at("k_n").get<double>() > 0.0);
    CHECK(j.at("theta").get<double>() <= j.at("lambda").get<double>());

    write_text(dir / "points.txt", "0.25\n0.75\n");
    const Run p = run({"modulus", "--input", (dir / "points.txt").string(), "--a", "0.1"});
    REQUIRE(p.code == kExitOk);
    CHECK(nlohmann::json::parse(p.out).at("lambda").get<double>() ==
          doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(1e-15));
  }

  TEST_CASE("verify and conditions") {
    Run r = run({"verify", "--lemma", "a1", "--k", "1,2", "--a-grid", "1e-2,1e-4", "--mu", "fixed:1"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("lemma,k,mu,a", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
    r = run({"verify", "--lemma", "a3", "--k", "3", "--delta", "2.1", "--a-grid", "1e-2"});
    CHECK(r.code == kExitRuntime);
    CHECK(r.err.find("k = 3") != std::string::npos);
    r = run({"conditions", "--regime", "II", "--c", "1", "--k", "fixed:2", "--n-grid",
             "1000,10000,100000"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("Q2,1000,2,NA,+inf,false,inconsistent") != std::string::npos);
  }

  TEST_CASE("experiment writes outputs") {
    const fs::path dir = scratch("experiment");
    write_text(dir / "config.json",
               R"({"regime": "II", "c": 1, "k": 1, "n_grid": [500, 1000], "replicates": 3,
                   "base_seed": 1, "out_dir": ")" +
                   (dir / "out").string() + R"("})");
    const Run r = run({"experiment", "--config", (dir / "config.json").string(), "--threads", "2"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("regime,N,count", 0) == 0);
    CHECK(parse_records_csv(read_text(dir / "out" / "records.csv")).size() == 6);
    CHECK(fs::exists(dir / "out" / "conditions.csv"));
  }
}
