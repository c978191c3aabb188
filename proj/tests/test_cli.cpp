#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

const std::string kCli = DGOF_CLI_PATH;
const std::string kDataDir = DGOF_DATA_DIR;

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  const std::string out_path = "/tmp/dgof_cli_out.txt";
  const std::string err_path = "/tmp/dgof_cli_err.txt";
  const std::string cmd =
      kCli + " " + args + " >" + out_path + " 2>" + err_path;
  const int raw = std::system(cmd.c_str());
  RunResult result;
  result.status = WEXITSTATUS(raw);
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

}  // namespace

TEST_CASE("cli test: candy vs uniform emits well-formed reports") {
  const auto result = run_cli("test --data " + kDataDir +
                              "/candy.csv --model uniform:5 "
                              "--stats euclid,chi2 --sims 2000 --seed 1");
  REQUIRE(result.status == 0);
  const auto doc = json::parse(result.out);
  CHECK(doc["meta"]["version"] == "0.1.0");
  CHECK(doc["meta"]["rng_id"] == "philox4x32-10");
  CHECK(doc["meta"]["seed"] == 1);
  CHECK(doc["meta"]["simulations"] == 2000);
  REQUIRE(doc["reports"].size() == 2);
  CHECK(doc["reports"][0]["statistic"] == "euclidean");
  CHECK(doc["reports"][1]["statistic"] == "chi2");
  const double p = doc["reports"][0]["p_value"];
  CHECK(p > 0.5);  // the candy data fits well
  CHECK(p <= 1.0);
  // chi2 and euclidean hit the same simulations under a uniform model
  CHECK(doc["reports"][0]["hits"] == doc["reports"][1]["hits"]);
}

TEST_CASE("cli output bytes are reproducible and worker-independent") {
  const std::string base = "test --data " + kDataDir +
                           "/candy.csv --model uniform:5 --stats ks,euclid "
                           "--sims 1000 --seed 9";
  const auto a = run_cli(base + " --workers 1");
  const auto b = run_cli(base + " --workers 4");
  const auto c = run_cli(base + " --workers 16");
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);

  // the embedded command re-runs to identical bytes
  const auto doc = json::parse(a.out);
  const std::string cmd = doc["meta"]["command"];
  const std::string args = cmd.substr(std::string("dgof ").size());
  const auto again = run_cli(args);
  CHECK(again.out == a.out);
}

TEST_CASE("cli test: rhesus vs hw with re-estimation") {
  const auto result = run_cli("test --data " + kDataDir +
                              "/rhesus.csv --model hw --stats euclid "
                              "--sims 4000 --seed 2");
  REQUIRE(result.status == 0);
  const auto doc = json::parse(result.out);
  const double p = doc["reports"][0]["p_value"];
  // the paper-scale estimate is ~.039; loose stochastic band at sims=4000
  CHECK(p > 0.0);
  CHECK(p < 0.2);
}

TEST_CASE("cli error paths exit with 2 and name the offender") {
  const auto missing =
      run_cli("test --data /no/such.csv --model uniform:5");
  CHECK(missing.status == 2);
  CHECK(missing.err.find("/no/such.csv") != std::string::npos);

  std::ofstream("/tmp/dgof_empty.csv") << "label,count\n";
  const auto empty =
      run_cli("test --data /tmp/dgof_empty.csv --model uniform:5");
  CHECK(empty.status == 2);
  CHECK(empty.err.find("/tmp/dgof_empty.csv") != std::string::npos);

  std::ofstream("/tmp/dgof_badline.csv") << "label,count\na,1\nb,x\n";
  const auto bad =
      run_cli("test --data /tmp/dgof_badline.csv --model uniform:5");
  CHECK(bad.status == 2);
  CHECK(bad.err.find(":3") != std::string::npos);

  const auto mismatch = run_cli("test --data " + kDataDir +
                                "/candy.csv --model uniform:7");
  CHECK(mismatch.status == 2);

  const auto zero_trials = run_cli("trials --data " + kDataDir +
                                   "/candy.csv --model uniform:5 "
                                   "--trials 0 --sims 100");
  CHECK(zero_trials.status == 2);

  const auto bad_claim = run_cli("theory nonsense");
  CHECK(bad_claim.status == 2);

  const auto no_args = run_cli("");
  CHECK(no_args.status == 2);
}

TEST_CASE("cli trials emits one JSON line per trial") {
  const auto result = run_cli(
      "trials --data " + kDataDir +
      "/candy.csv --model uniform:5 --stats ks,euclid --trials 4 "
      "--sims 500 --seed 3 --plot /tmp/dgof_trials.csv");
  REQUIRE(result.status == 0);
  std::istringstream lines(result.out);
  std::string line;
  REQUIRE(std::getline(lines, line));  // meta
  CHECK(json::parse(line)["meta"]["trials"] == 4);
  int count = 0;
  double shared_euclid = -1.0;
  while (std::getline(lines, line)) {
    const auto trial = json::parse(line);
    ++count;
    CHECK(trial["trial"] == count);
    REQUIRE(trial["permutation"].size() == 5);  // m <= 64: included
    const double e = trial["reports"][1]["p_value"];
    if (shared_euclid < 0)
      shared_euclid = e;
    else
      CHECK(e == shared_euclid);
  }
  CHECK(count == 4);

  std::ifstream plot("/tmp/dgof_trials.csv");
  std::string header;
  REQUIRE(std::getline(plot, header));
  CHECK(header == "x,ks,euclidean");
  int rows = 0;
  while (std::getline(plot, header)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("cli theory: small verifications pass") {
  const auto bridge = run_cli("theory bridge --m 1000 --trials 3000 --seed 4");
  CHECK(bridge.status == 0);
  CHECK(bridge.out.find("PASS") != std::string::npos);

  const auto power = run_cli("theory power --m 4 --c 0.1 --trials 20000");
  CHECK(power.status == 0);
  CHECK(power.out.find("\"u\":0.2") != std::string::npos);

  const auto sparse = run_cli(
      "theory sparse-limit --n 100 --M 4294967296 --trials 200");
  CHECK(sparse.status == 0);

  const auto null_euclid = run_cli(
      "theory null-euclid --model uniform:10 --n 50 --trials 3000");
  CHECK(null_euclid.status == 0);
  CHECK(null_euclid.out.find("PASS") != std::string::npos);
}

TEST_CASE("cli rng-uniform on a sequential stream") {
  {
    std::ofstream draws("/tmp/dgof_seq.txt");
    for (int i = 1; i <= 200; ++i) draws << i << "\n";
  }
  const auto result = run_cli(
      "rng-uniform --draws /tmp/dgof_seq.txt --sims 400 --seed 5");
  REQUIRE(result.status == 0);
  const auto doc = json::parse(result.out);
  REQUIRE(doc["reports"].size() == 2);
  CHECK(doc["reports"][0]["statistic"] == "ks");
  CHECK(doc["reports"][0]["hits"] == 0);
  const double pe = doc["reports"][1]["p_value"];
  CHECK(pe >= 0.999);

  const auto bad = run_cli(
      "rng-uniform --draws /tmp/dgof_seq.txt --M 100 --sims 10");
  CHECK(bad.status == 2);  // draws 101..200 fall outside [1, 100]
}

TEST_CASE("cli plot emits the poisson data files") {
  const auto result = run_cli(
      "plot --experiment poisson-cmf-observed --output /tmp/dgof_cmf.csv");
  REQUIRE(result.status == 0);
  std::ifstream in("/tmp/dgof_cmf.csv");
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "x,model,observed");
  int rows = 0;
  std::string last;
  while (std::getline(in, last)) ++rows;
  CHECK(rows == 180);

  const auto unknown =
      run_cli("plot --experiment wat --output /tmp/dgof_x.csv");
  CHECK(unknown.status == 2);
}
