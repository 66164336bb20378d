#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "locdist_cli/cli.hpp"
#include "oracles.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "locdist");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = locdist::cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("history below the floor is a usage error") {
    const auto dir = oracle::scratch_dir("cli_usage");
    const auto trace = (dir / "t.trace").string();
    REQUIRE(run({"simulate", "--seed", "1", "--count", "8", "--out", trace}).code == 0);
    const auto r = run({"detect", "--in", trace, "--history", "2", "--out", (dir / "d.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("floor of 3") != std::string::npos);
    CHECK(run({"detect", "--in", trace}).code == 1);
    CHECK(run({"bogus"}).code == 1);
    CHECK(run({"detect", "--in", trace, "--norm", "l3", "--out", "x"}).code == 1);
    CHECK(run({"sweep", "--kind", "history", "--grid", "2,5", "--out", (dir / "s.csv").string()}).code == 1);
  }

  TEST_CASE("data errors name the file and line") {
    const auto dir = oracle::scratch_dir("cli_data");
    const auto bad = dir / "bad.trace";
    std::ofstream(bad) << "{\"format_version\":1,\"kind\":\"snapshot\",\"k1\":1,\"k2\":1,\"M\":2,"
                          "\"sample_period_s\":1e-8,\"carrier_hz\":2.55e9,\"record_count\":1}\n"
                          "{\"n\":0,\"t\":0,\"pos\":[0,0],\"h\":[[[[1,0]]]]}\n";
    const auto r = run({"detect", "--in", bad.string(), "--out", (dir / "d.csv").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("bad.trace:2") != std::string::npos);
    CHECK(run({"detect", "--in", (dir / "missing.trace").string(), "--out", (dir / "d.csv").string()}).code == 2);
  }

  TEST_CASE("detect writes one row per record") {
    const auto dir = oracle::scratch_dir("cli_detect");
    const auto trace = (dir / "t.trace").string();
    const auto csv = dir / "d.csv";
    REQUIRE(run({"simulate", "--seed", "3", "--count", "12", "--k1", "2", "--k2", "2", "--out", trace}).code == 0);
    REQUIRE(run({"detect", "--in", trace, "--history", "3", "--delay", "2", "--out", csv.string()}).code == 0);
    std::istringstream is(slurp(csv));
    std::string line;
    std::getline(is, line);
    CHECK(line == "meas_index,verdict,delta");
    std::getline(is, line);
    CHECK(line == "0,warming,");
    int rows = 1;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 12);
  }

  TEST_CASE("sound produces a readable trace for both methods") {
    const auto dir = oracle::scratch_dir("cli_sound");
    for (std::string m : {"multitone", "ofdm"}) {
      const auto trace = (dir / (m + ".trace")).string();
      REQUIRE(run({"sound", "--method", m, "--count", "6", "--k2", "2", "--jitter-samples", "0.5", "--out", trace})
                  .code == 0);
      REQUIRE(run({"detect", "--in", trace, "--out", (dir / (m + ".csv")).string()}).code == 0);
    }
  }

  TEST_CASE("fixed-seed pipeline is byte identical") {
    std::string first;
    for (int pass = 0; pass < 2; ++pass) {
      const auto dir = oracle::scratch_dir("cli_repro" + std::to_string(pass));
      const auto h0 = (dir / "h0.trace").string(), h1 = (dir / "h1.trace").string();
      REQUIRE(run({"simulate", "--seed", "5", "--count", "30", "--out", h0}).code == 0);
      REQUIRE(run({"simulate", "--seed", "5", "--count", "30", "--speed-mps", "2", "--out", h1}).code == 0);
      REQUIRE(run({"roc", "--h0", h0, "--h1", h1, "--out", (dir / "roc.csv").string()}).code == 0);
      const auto text = slurp(dir / "roc.csv");
      CHECK(text.rfind("gamma,pfa,pd,pm\n-inf,1,1,0\n", 0) == 0);
      if (pass == 0) first = text;
      else CHECK(text == first);
    }
  }

  TEST_CASE("sweep then fit") {
    const auto dir = oracle::scratch_dir("cli_sweep");
    const auto sweep = (dir / "sweep.csv").string();
    REQUIRE(run({"sweep", "--kind", "antennas", "--grid", "1,4", "--trials", "20", "--seed", "2", "--out", sweep,
                 "--roc-out", (dir / "roc.csv").string()})
                .code == 0);
    const auto text = slurp(sweep);
    CHECK(text.rfind("kind,value,target_pfa,pm,at_floor\nantennas,1,0.002,", 0) == 0);
    REQUIRE(run({"fit", "--in", sweep, "--out", (dir / "fit.csv").string()}).code == 0);
    CHECK(slurp(dir / "fit.csv").rfind("b,m,residual\n", 0) == 0);

    const auto hist = (dir / "hist.csv").string();
    REQUIRE(run({"sweep", "--kind", "history", "--grid", "3,5", "--trials", "5", "--out", hist}).code == 0);
    CHECK(run({"fit", "--in", hist, "--out", (dir / "f2.csv").string()}).code == 2);
  }
}
