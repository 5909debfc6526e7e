#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = fama::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

// Numeric cells agree to 1e-9 relative; text cells must match exactly.
void check_same_table(const std::string& got, const std::string& want) {
  const auto g = parse_csv(got), w = parse_csv(want);
  REQUIRE(g.size() == w.size());
  for (std::size_t r = 0; r < g.size(); ++r) {
    REQUIRE(g[r].size() == w[r].size());
    for (std::size_t c = 0; c < g[r].size(); ++c) {
      char* end_g = nullptr;
      char* end_w = nullptr;
      const double vg = std::strtod(g[r][c].c_str(), &end_g);
      const double vw = std::strtod(w[r][c].c_str(), &end_w);
      INFO("row " << r << " col " << c << ": " << g[r][c] << " vs " << w[r][c]);
      if (*end_g == '\0' && *end_w == '\0' && !g[r][c].empty()) {
        CHECK(std::abs(vg - vw) <= 1e-9 * std::max(std::abs(vw), 1e-300));
      } else {
        CHECK(g[r][c] == w[r][c]);
      }
    }
  }
}

const fs::path kGolden = FAMA_GOLDEN_DIR;

}  // namespace

TEST_CASE("sweep and count parsing") {
  auto g = fama::cli::parse_sweep("N=10:100:10");
  CHECK(g.axis == "N");
  REQUIRE(g.values.size() == 10);
  CHECK(g.values.front() == 10.0);
  CHECK(g.values.back() == 100.0);

  g = fama::cli::parse_sweep("gamma-db=-10:10:0.5");
  CHECK(g.values.size() == 41);
  CHECK(g.values[1] == -9.5);

  g = fama::cli::parse_sweep("W=2.5");
  CHECK(g.values == std::vector<double>{2.5});

  CHECK_THROWS(fama::cli::parse_sweep("N=10:1:1"));
  CHECK_THROWS(fama::cli::parse_sweep("N=1:10:0"));
  CHECK_THROWS(fama::cli::parse_sweep("N10:20:1"));

  CHECK(fama::cli::parse_count("1e6") == 1000000u);
  CHECK(fama::cli::parse_count("250") == 250u);
  CHECK_THROWS(fama::cli::parse_count("0"));
  CHECK_THROWS(fama::cli::parse_count("1.5"));
  CHECK_THROWS(fama::cli::parse_count("-3"));
}

TEST_CASE("digest is 64-bit FNV-1a") {
  CHECK(fama::cli::digest("") == "fnv1a64:cbf29ce484222325");
  CHECK(fama::cli::digest("a") == "fnv1a64:af63dc4c8601ec8c");
}

TEST_CASE("blocks command") {
  auto r = run({"blocks", "--N", "100", "--W", "0", "--delta", "0.97"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["B"] == 1);
  CHECK(j["lengths"] == json::array({100}));

  r = run({"blocks", "--N", "100", "--W", "1", "--delta", "0.97", "--rho-th", "1"});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["B"] == 4);
  CHECK(j["lengths"] == json::array({42, 38, 18, 2}));
  CHECK(j["delta"] == 0.97);
  CHECK(j["rho_th"] == 1.0);
  CHECK(j["eigenvalues_used"].size() == 4);

  r = run({"blocks", "--N", "1", "--model", "jakes"});
  CHECK(r.code == fama::cli::kExitDomain);
  CHECK(!r.err.empty());
}

TEST_CASE("flag and domain errors exit with code 2") {
  CHECK(run({"op", "--method", "bogus"}).code == fama::cli::kExitDomain);
  CHECK(run({"op", "--sweep", "Q=1:2:1"}).code == fama::cli::kExitDomain);
  CHECK(run({"op", "--m", "0"}).code == fama::cli::kExitDomain);
  CHECK(run({"op", "--U", "1"}).code == fama::cli::kExitDomain);
  CHECK(run({"op", "--method", "mc", "--trials", "0"}).code == fama::cli::kExitDomain);
  CHECK(run({"nonsense"}).code == fama::cli::kExitDomain);
}

TEST_CASE("op output layout and grid order") {
  auto r = run({"op", "--mode", "fast", "--method", "quad", "--sweep", "gamma-db=-4:0:2", "--N", "20"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"sweep_param", "value", "p_out", "method", "error", "B", "delta"});
  CHECK(rows[1][1] == "-4");
  CHECK(rows[3][1] == "0");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] == "quad");

  const auto one = run({"op", "--sweep", "N=10:40:10", "--threads", "1"});
  const auto four = run({"op", "--sweep", "N=10:40:10", "--threads", "4"});
  CHECK(one.out == four.out);

  const auto j = run({"op", "--sweep", "N=10:40:10", "--format", "json"});
  REQUIRE(j.code == 0);
  const auto arr = json::parse(j.out);
  REQUIRE(arr.size() == 4);
  const auto csv = parse_csv(one.out);
  for (std::size_t i = 0; i < 4; ++i) CHECK(arr[i]["p_out"].get<double>() == doctest::Approx(std::stod(csv[i + 1][2])).epsilon(1e-14));

  // Upper bound dominates quadrature row by row.
  const auto ub = parse_csv(run({"op", "--sweep", "N=10:40:10", "--method", "ub"}).out);
  for (std::size_t i = 1; i < 5; ++i) CHECK(std::stod(ub[i][2]) >= std::stod(csv[i][2]));
}

TEST_CASE("Monte Carlo runs are reproducible byte for byte") {
  const std::vector<std::string> base = {"op", "--method", "mc", "--trials", "1e6", "--seed", "42", "--N", "10"};
  auto with_threads = [&](const char* t) {
    auto a = base;
    a.insert(a.end(), {"--threads", t});
    return a;
  };
  const auto first = run(base);
  const auto second = run(base);
  REQUIRE(first.code == 0);
  CHECK(first.out == second.out);
  CHECK(run(with_threads("1")).out == first.out);
  CHECK(run(with_threads("3")).out == first.out);
  const auto other = run({"op", "--method", "mc", "--trials", "1e6", "--seed", "43", "--N", "10"});
  CHECK(other.out != first.out);
}

TEST_CASE("gain command") {
  // Threshold so low that outage never happens.
  auto r = run({"gain", "--gamma-db", "-200", "--U-sweep", "2:6:1", "--M", "U", "--M", "8"});
  REQUIRE(r.code == 0);
  auto rows = parse_csv(r.out);
  CHECK(rows[0] == std::vector<std::string>{"U", "M", "mode", "gain_exact", "gain_approx"});
  REQUIRE(rows.size() == 11);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][3]) == doctest::Approx(std::stod(rows[i][0])).epsilon(1e-12));
    CHECK(std::stod(rows[i][4]) == doctest::Approx(std::stod(rows[i][0])).epsilon(1e-12));
  }

  r = run({"gain", "--U-sweep", "5:5:1", "--M", "8", "--M", "16"});
  REQUIRE(r.code == 0);
  rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[2][3]) >= std::stod(rows[1][3]));

  // Pools smaller than U are rejected row by row.
  r = run({"gain", "--U-sweep", "2:6:1", "--M", "4"});
  REQUIRE(r.code == 0);
  rows = parse_csv(r.out);
  CHECK(rows.size() == 4);
  CHECK(r.err.find("M < U") != std::string::npos);
}

TEST_CASE("figure recipes match the golden tables") {
  check_same_table(
      run({"op", "--mode", "slow", "--method", "quad", "--sweep", "N=10:100:10", "--U", "5", "--m", "2", "--gamma-db",
           "-3", "--W", "1"})
          .out,
      read_file(kGolden / "fig1_slow_quad.csv"));
  check_same_table(run({"op", "--mode", "fast", "--method", "quad", "--sweep", "gamma-db=-10:10:1", "--N", "100", "--W",
                        "1", "--U", "5", "--m", "2"})
                       .out,
                   read_file(kGolden / "fig2_fast_quad.csv"));
  for (std::string mode : {"slow", "fast"}) {
    const auto r = run({"gain", "--mode", mode, "--U-sweep", "2:30:1", "--M", "U", "--M", "40", "--M", "60", "--N",
                        "100", "--W", "1", "--m", "2", "--gamma-db", "-3"});
    REQUIRE(r.code == 0);
    check_same_table(r.out, read_file(kGolden / ("fig3_" + mode + "_gain.csv")));

    // min{U, M(1 - p)} is a Jensen upper bound on E[min(K, U)], K ~ Bin(M, 1 - p),
    // and exceeds it by at most E[(M(1 - p) - K)^+] <= sqrt(M p (1 - p)) / 2.
    std::map<int, double> p_out;
    const auto rows = parse_csv(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][0] == rows[i][1]) p_out[std::stoi(rows[i][0])] = 1.0 - std::stod(rows[i][3]) / std::stod(rows[i][0]);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const int users = std::stoi(rows[i][0]), pool = std::stoi(rows[i][1]);
      const double p = p_out.at(users);
      const double gap = std::stod(rows[i][4]) - std::stod(rows[i][3]);
      INFO("U=" << users << " M=" << pool);
      CHECK(gap >= -1e-12);
      CHECK(gap <= 0.5 * std::sqrt(pool * p * (1.0 - p)) + 1e-12);
    }
  }
}

TEST_CASE("manifests replay to the same digest") {
  const fs::path dir = fs::temp_directory_path() / "fama_cli_test";
  fs::create_directories(dir);
  const auto out = (dir / "op.csv").string();
  auto r = run({"op", "--method", "mc", "--trials", "2e4", "--seed", "7", "--N", "20", "--sweep", "gamma-db=-6:0:3",
                "--out", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto manifest_path = out + ".manifest.json";
  REQUIRE(fs::exists(manifest_path));
  auto manifest = json::parse(read_file(manifest_path));
  CHECK(manifest["command"] == "op");
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["parameters"]["N"] == 20);
  CHECK(manifest["output_digest"] == fama::cli::digest(read_file(out)));
  CHECK(!manifest["timestamp"].get<std::string>().empty());
  CHECK(!manifest["version"].get<std::string>().empty());

  r = run({"replay", manifest_path});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("replay ok", 0) == 0);

  manifest["output_digest"] = "fnv1a64:0000000000000000";
  std::ofstream(manifest_path) << manifest.dump();
  CHECK(run({"replay", manifest_path}).code == fama::cli::kExitFailure);
  fs::remove_all(dir);
}
