#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "msd/cli.hpp"

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("msd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = msd::run_command_line(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("generated instance is reproducible and valid") {
  TempDir dir;
  REQUIRE(run({"gen", "--seed", "4", "-o", dir / "a.json"}).code == 0);
  REQUIRE(run({"gen", "--seed", "4", "-o", dir / "b.json"}).code == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.json") == slurp(std::string(MSD_FIXTURE_DIR) + "/small4.json"));
  const auto v = run({"validate", dir / "a.json"});
  CHECK(v.code == 0);
  CHECK(v.out.rfind("ok:", 0) == 0);
}

TEST_CASE("joint deployments are byte-identical across runs") {
  TempDir dir;
  REQUIRE(run({"gen", "--seed", "4", "-o", dir / "inst.json"}).code == 0);
  REQUIRE(run({"solve-joint", dir / "inst.json", "--sensors", "2", "-o", dir / "a.json"}).code == 0);
  REQUIRE(run({"solve-joint", dir / "inst.json", "--sensors", "2", "--jobs", "3", "-o", dir / "b.json"}).code == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  const auto doc = nlohmann::json::parse(slurp(dir / "a.json"));
  CHECK(doc["fingerprint"].get<std::string>().size() == 16);
  CHECK_FALSE(doc.contains("timings"));
}

TEST_CASE("sweep reward does not drop with more sensors") {
  TempDir dir;
  REQUIRE(run({"gen", "--seed", "4", "-o", dir / "inst.json"}).code == 0);
  const auto r = run({"sweep", dir / "inst.json", "--sensors", "1..6", "-o", dir / "sweep.csv", "--lines-csv",
                      dir / "lines.csv"});
  REQUIRE(r.code == 0);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 7);
  CHECK(rows[0][1] == "phi_sequential");
  CHECK(rows[0][3] == "phi_joint");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][1]) >= std::stod(rows[i - 1][1]));
    CHECK(std::stod(rows[i][3]) >= std::stod(rows[i - 1][3]));
  }
  CHECK(read_csv(dir / "lines.csv").size() > 1);
}

TEST_CASE("report compares joint against sequential") {
  TempDir dir;
  REQUIRE(run({"gen", "--seed", "4", "-o", dir / "inst.json"}).code == 0);
  REQUIRE(run({"solve-seq", dir / "inst.json", "--sensors", "3", "-o", dir / "seq.json"}).code == 0);
  REQUIRE(run({"solve-joint", dir / "inst.json", "--sensors", "3", "-o", dir / "joint.json", "--coverage-csv",
               dir / "cov.csv"})
              .code == 0);
  const auto r = run({"report", dir / "inst.json", "--deployment", dir / "joint.json", "--compare", dir / "seq.json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["phi_difference"].get<double>() >= 0.0);
  CHECK(read_csv(dir / "cov.csv").size() == 37);
}

TEST_CASE("tampered reward is caught") {
  TempDir dir;
  REQUIRE(run({"gen", "--seed", "4", "-o", dir / "inst.json"}).code == 0);
  REQUIRE(run({"solve-seq", dir / "inst.json", "--sensors", "2", "-o", dir / "seq.json"}).code == 0);
  auto doc = nlohmann::ordered_json::parse(slurp(dir / "seq.json"));
  doc["phi"] = doc["phi"].get<double>() + 1e-3;
  std::ofstream(dir / "bad.json") << doc.dump(1);
  CHECK(run({"report", dir / "inst.json", "--deployment", dir / "bad.json"}).code == msd::kExitInternal);
}

TEST_CASE("exit codes") {
  TempDir dir;
  REQUIRE(run({"gen", "--seed", "4", "-o", dir / "inst.json"}).code == 0);
  CHECK(run({}).code == msd::kExitUsage);
  CHECK(run({"solve-joint"}).code == msd::kExitUsage);
  CHECK(run({"sweep", dir / "inst.json", "--sensors", "5..2"}).code == msd::kExitUsage);
  CHECK(run({"solve-joint", dir / "inst.json", "--delta", "soon"}).code == msd::kExitUsage);
  CHECK(run({"solve-seq", dir / "missing.json"}).code == msd::kExitData);
  CHECK(run({"solve-joint", dir / "inst.json", "--delta", "0"}).code == msd::kExitData);
  CHECK(run({"solve-seq", dir / "inst.json", "--interval", "7"}).code == msd::kExitUsage);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(run({"validate", dir / "broken.json"}).code == msd::kExitData);
}

TEST_CASE("greedy allocation is not certified optimal") {
  TempDir dir;
  REQUIRE(run({"gen", "--seed", "4", "--trips-per-line", "14", "-o", dir / "inst.json"}).code == 0);
  const auto r = run({"solve-seq", dir / "inst.json", "--sensors", "3", "--mode", "greedy", "-o", dir / "g.json"});
  CHECK(r.code == msd::kExitLimit);
  const auto doc = nlohmann::json::parse(slurp(dir / "g.json"));
  CHECK(doc["allocation"] == "greedy");
}

TEST_CASE("models can be dumped") {
  TempDir dir;
  REQUIRE(run({"gen", "--seed", "4", "-o", dir / "inst.json"}).code == 0);
  REQUIRE(run({"solve-joint", dir / "inst.json", "--sensors", "1", "--dump-models", dir / "lp", "-o",
               dir / "d.json"})
              .code == 0);
  CHECK(std::filesystem::exists(dir / "lp/upper.lp"));
  CHECK(slurp(dir / "lp/upper.lp").find("Maximize") != std::string::npos);
}
