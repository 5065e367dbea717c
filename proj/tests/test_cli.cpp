#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "json.hpp"
#include "nggmix/io.hpp"
#include "oracles.hpp"

using namespace nggmix;
namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("NGGMIX_CLI");
  REQUIRE_MESSAGE(p != nullptr, "NGGMIX_CLI is not set");
  return p;
}

int run(const std::string& args) {
  int status = std::system((cli() + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("nggmix_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string small_dataset(const fs::path& dir) {
  auto data = oracle::censor(oracle::bimodal_sample(40, 3), 0.3, 5);
  auto path = (dir / "data.csv").string();
  write_text_file(path, serialize_dataset(data));
  return path;
}

}  // namespace

TEST_CASE("number formatting round trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(std::nan("")) == "NA");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("dataset parsing") {
  auto d = parse_dataset_text("# comment\nleft,right\n1,1\n,2\n3,\n4,5\nNA,6\n");
  REQUIRE(d.size() == 5);
  CHECK(d[0] == Observation::exact(1));
  CHECK(d[1] == Observation::left_censored(2));
  CHECK(d[2] == Observation::right_censored(3));
  CHECK(d[3] == Observation::interval(4, 5));
  CHECK(d[4] == Observation::left_censored(6));
  auto single = parse_dataset_text("0.5\n1.5\n");
  CHECK(single.size() == 2);
  CHECK(single[1] == Observation::exact(1.5));
  auto named = parse_dataset_text("id,right,left\na,2,1\n");
  CHECK(named[0] == Observation::interval(1, 2));
  auto round = parse_dataset_text(serialize_dataset(d));
  CHECK(round == d);
  try {
    parse_dataset_text("left,right\n1,2\n3,x\n");
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_dataset_text("left,right\n5,2\n"), ValidationError);
  CHECK_THROWS_AS(parse_dataset_text(""), ValidationError);
  CHECK_THROWS_AS(parse_dataset("/nonexistent/file.csv"), ValidationError);
}

TEST_CASE("bundled datasets parse") {
  std::string dir = std::getenv("NGGMIX_DATA_DIR");
  auto acid = parse_dataset(dir + "/acidity_like.csv");
  CHECK(acid.size() == 155);
  auto carb = parse_dataset(dir + "/carbaryl_like.csv");
  std::size_t censored = 0;
  for (const auto& o : carb) censored += !o.is_exact();
  CHECK(censored > carb.size() / 4);
}

TEST_CASE("run writes every product and is reproducible") {
  auto dir = scratch("run");
  auto data = small_dataset(dir);
  std::string common = "run " + data + " --nit 120 --burnin 20 --thin 5 --chains 2 --seed 9 -q ";
  REQUIRE(run(common + "-o " + (dir / "a").string()) == 0);
  REQUIRE(run(common + "-o " + (dir / "b").string() + " --sequential") == 0);
  auto manifest = nlohmann::json::parse(read_text_file((dir / "a" / "manifest.json").string()));
  for (const auto& f : manifest["files"]) {
    CHECK(fs::exists(dir / "a" / f.get<std::string>()));
  }
  for (std::string f : {"trace.csv", "atoms.csv", "density.csv", "cdf.csv", "quantiles.json", "cpo.csv",
                        "psrf.json", "clustering.csv", "gof_pp.csv", "gof_qq.csv"}) {
    INFO(f);
    CHECK(read_text_file((dir / "a" / f).string()) == read_text_file((dir / "b" / f).string()));
  }
  CHECK(manifest["config"]["seed"] == 9);
  CHECK(manifest["seeds"].size() == 2);
  auto psrf = nlohmann::json::parse(read_text_file((dir / "a" / "psrf.json").string()));
  CHECK(psrf["univariate"].size() == 4);
}

TEST_CASE("configuration file") {
  auto dir = scratch("config");
  auto data = small_dataset(dir);
  write_text_file((dir / "run.ini").string(), "nit=60\nburnin=10\nthin=5\nkernel=laplace\nclustering=none\n");
  REQUIRE(run("run " + data + " --config " + (dir / "run.ini").string() + " -q -o " + (dir / "o").string()) == 0);
  auto manifest = nlohmann::json::parse(read_text_file((dir / "o" / "manifest.json").string()));
  CHECK(manifest["config"]["iterations"] == 60);
  CHECK(manifest["config"]["kernel"] == "laplace");
  CHECK_FALSE(fs::exists(dir / "o" / "clustering.csv"));
  REQUIRE(run("run " + data + " --nit 80 --config " + (dir / "run.ini").string() + " -q -o " + (dir / "p").string()) == 0);
  manifest = nlohmann::json::parse(read_text_file((dir / "p" / "manifest.json").string()));
  CHECK(manifest["config"]["iterations"] == 80);
  write_text_file((dir / "bad.ini").string(), "nit=60\nwhatever=3\n");
  CHECK(run("run " + data + " --config " + (dir / "bad.ini").string() + " -q -o " + (dir / "q").string()) == 2);
}

TEST_CASE("exit codes") {
  auto dir = scratch("codes");
  auto data = small_dataset(dir);
  auto out = " -q -o " + (dir / "o").string();
  CHECK(run("run /nonexistent.csv" + out) == 2);
  CHECK(run("run " + data + " --kernel cauchy" + out) == 2);
  CHECK(run("run " + data + " --kernel gamma" + out) == 2);
  CHECK(run("run " + data + " --nit 10 --burnin 20" + out) == 2);
  CHECK(run("run " + data + " --gamma 1.2" + out) == 2);
  CHECK(run("run " + data + " --scale-prior gamma,1" + out) == 2);
  CHECK(run("run " + data + " --unknown-flag" + out) == 2);
  CHECK(run("bogus") == 2);
  CHECK(run("--version") == 0);
  CHECK(run("run " + data + " --nit 40 --burnin 10 --scale-prior half_cauchy,1" + out) == 0);
}

TEST_CASE("elicit") {
  auto dir = scratch("elicit");
  auto csv = (dir / "prior.csv").string();
  REQUIRE(run("elicit --n 100 --alpha 1 --gamma 0.4 -o " + csv) == 0);
  auto text = read_text_file(csv);
  CHECK(text.rfind("k,dirichlet,stable\n", 0) == 0);
  std::size_t rows = std::count(text.begin(), text.end(), '\n');
  CHECK(rows == 101);
  CHECK(run("elicit --n 100000") == 2);
}
