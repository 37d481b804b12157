#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "sbmsir/graph.hpp"
#include "test_util.hpp"

using namespace sbmsir;
using namespace sbmsir::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("sbmsir_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_config(const TempDir& dir, const Json& j, const std::string& name = "config.json") {
  const std::string p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

Json base_config(const TempDir& dir) {
  Json j = Json::parse(R"({
    "model": {"K": 2, "W": [[10, 1], [1, 10]], "sizes": [100, 100], "eta": 0.5, "gamma": 0.5},
    "init": {"infected": [2, 0]},
    "run": {"n_runs": 3, "grid": {"t_end": 10, "points": 11}, "seed": 5},
    "outputs": {"per_run_csv": true}
  })");
  j["outputs"]["directory"] = dir / "out";
  return j;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("dotted overrides") {
  Json j = Json::parse(R"({"run": {"seed": 1}})");
  apply_override(j, "run.seed=7");
  CHECK(j["run"]["seed"] == 7);
  apply_override(j, "run.mode=graph");
  CHECK(j["run"]["mode"] == "graph");
  apply_override(j, "model.W=[[1,2],[2,1]]");
  CHECK(j["model"]["W"][0][1] == 2);
  apply_override(j, "outputs.directory=\"x y\"");
  CHECK(j["outputs"]["directory"] == "x y");
  CHECK_ERROR_CODE(apply_override(j, "run.seed"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(apply_override(j, "run.seed.deeper=1"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(apply_override(j, "run..seed=1"), ErrorCode::ParseError);
}

TEST_CASE("config parsing") {
  TempDir dir;
  Json j = base_config(dir);
  SUBCASE("defaults and grid spec") {
    const ExperimentConfig cfg = parse_config(j);
    CHECK(cfg.model.n() == 200);
    CHECK(cfg.run.grid.size() == 11);
    CHECK(cfg.run.grid.back() == 10.0);
    CHECK(cfg.run.mode == SimMode::Exploration);
    CHECK(std::isinf(cfg.run.horizon));
    CHECK(cfg.init.infected == Counts{2, 0});
  }
  SUBCASE("infected fraction of n") {
    j["init"] = Json::parse(R"({"infected_fraction": [0.05, 0.0]})");
    CHECK(parse_config(j).init.infected == Counts{10, 0});
  }
  SUBCASE("horizon inf and explicit grid") {
    j["run"]["horizon"] = "inf";
    j["run"]["grid"] = Json::array({0.0, 0.5, 2.0});
    const ExperimentConfig cfg = parse_config(j);
    CHECK(std::isinf(cfg.run.horizon));
    CHECK(cfg.run.grid == std::vector<double>{0.0, 0.5, 2.0});
  }
  SUBCASE("errors") {
    Json bad = j;
    bad["run"]["mode"] = "teleport";
    CHECK_ERROR_CODE(parse_config(bad), ErrorCode::ParseError);
    bad = j;
    bad["model"]["W"] = Json::parse("[[0,0],[0,1]]");
    CHECK_ERROR_CODE(parse_config(bad), ErrorCode::ZeroRow);
    bad = j;
    bad["run"]["grid"] = Json::array({0.0});
    bad["run"]["horizon"] = 5;
    CHECK_ERROR_CODE(parse_config(bad), ErrorCode::ParseError);
    bad = j;
    bad["init"]["infected"] = Json::array({500, 0});
    CHECK_ERROR_CODE(parse_config(bad), ErrorCode::InfeasibleInit);
    bad = j;
    bad.erase("model");
    CHECK_ERROR_CODE(parse_config(bad), ErrorCode::ParseError);
  }
}

TEST_CASE("usage errors exit 2 with a JSON error") {
  CHECK(run({}).code == kUsage);
  CHECK(run({"frobnicate"}).code == kUsage);
  CHECK(run({"simulate"}).code == kUsage);
  const Result missing = run({"simulate", "--config", "/nonexistent/config.json"});
  CHECK(missing.code == kUsage);
  CHECK(Json::parse(missing.err)["error"] == "ParseError");

  TempDir dir;
  Json j = base_config(dir);
  j["model"]["W"] = Json::parse("[[10,1],[2,10]]");
  const Result asym = run({"simulate", "-c", write_config(dir, j)});
  CHECK(asym.code == kUsage);
  const Json e = Json::parse(asym.err);
  CHECK(e["error"] == "AsymmetricW");
  CHECK(e.contains("message"));
  CHECK(run({"--help"}).code == kOk);
}

TEST_CASE("simulate") {
  TempDir dir;
  SUBCASE("one run with horizon 0 gives a one-row CSV") {
    Json j = base_config(dir);
    j["run"] = Json::parse(R"({"n_runs": 1, "horizon": 0, "seed": 3})");
    REQUIRE(run({"simulate", "-c", write_config(dir, j)}).code == kOk);
    std::vector<fs::path> csvs;
    for (const auto& e : fs::directory_iterator(dir.path / "out"))
      if (e.path().filename().string().rfind("run_", 0) == 0) csvs.push_back(e.path());
    REQUIRE(csvs.size() == 1);
    const std::string text = slurp(csvs[0].string());
    CHECK(count_lines(text) == 2);
    CHECK(text.rfind("t,S_1,S_2,I_1,I_2,R_1,R_2,X_1,X_2\n", 0) == 0);
  }
  SUBCASE("byte-identical reruns and overrides") {
    const std::string cfg = write_config(dir, base_config(dir));
    REQUIRE(run({"simulate", "-c", cfg}).code == kOk);
    const std::string a = slurp(dir / "out/stats.json");
    const std::string a0 = slurp(dir / "out/run_0000.csv");
    REQUIRE(run({"simulate", "-c", cfg}).code == kOk);
    CHECK(slurp(dir / "out/stats.json") == a);
    CHECK(slurp(dir / "out/run_0000.csv") == a0);
    CHECK(count_lines(a0) == 12);
    REQUIRE(run({"simulate", "-c", cfg, "--run.seed=6"}).code == kOk);
    CHECK(slurp(dir / "out/stats.json") != a);
    const Json stats = Json::parse(a);
    CHECK(stats["mean"].contains("I_1"));
    CHECK(stats["std"].contains("X_2"));
    CHECK(stats["runs"].size() == 3);
  }
  SUBCASE("graph mode") {
    const std::string cfg = write_config(dir, base_config(dir));
    CHECK(run({"simulate", "-c", cfg, "--run.mode=graph"}).code == kOk);
  }
}

TEST_CASE("ode") {
  TempDir dir;
  SUBCASE("no infection gives a constant table") {
    Json j = base_config(dir);
    j["init"]["infected"] = Json::array({0, 0});
    REQUIRE(run({"ode", "-c", write_config(dir, j)}).code == kOk);
    const Table t = read_table(dir / "out/ode.csv");
    REQUIRE(t.t.size() == 11);
    for (const auto& row : t.rows) CHECK(row == t.rows.front());
  }
  SUBCASE("steady state row") {
    const std::string cfg = write_config(dir, base_config(dir));
    REQUIRE(run({"ode", "-c", cfg, "--steady-state"}).code == kOk);
    const std::string text = slurp(dir / "out/ode.csv");
    const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
    CHECK(last.rfind("inf,", 0) == 0);
    const Json fs = Json::parse(slurp(dir / "out/final_size.json"));
    for (const char* key : {"s_inf", "q", "r0", "residual", "iterations"}) CHECK(fs.contains(key));
  }
  SUBCASE("x peaks bracket the herd immunity time") {
    Json j = base_config(dir);
    j["model"]["sizes"] = Json::array({50000, 50000});
    j["init"]["infected"] = Json::array({500, 0});
    j["ode"]["grid"] = Json::parse(R"({"t_end": 40, "points": 4001})");
    const Result r = run({"ode", "-c", write_config(dir, j)});
    REQUIRE(r.code == kOk);
    const double th = Json::parse(r.out)["herd_immunity_time"].get<double>();
    const Table t = read_table(dir / "out/ode.csv");
    std::vector<double> peaks;
    for (const char* col : {"X_1", "X_2"}) {
      const auto c = static_cast<std::size_t>(std::find(t.columns.begin(), t.columns.end(), col) - t.columns.begin());
      for (std::size_t i = 1; i + 1 < t.t.size(); ++i)
        if (t.rows[i][c] > t.rows[i - 1][c] && t.rows[i][c] >= t.rows[i + 1][c]) peaks.push_back(t.t[i]);
    }
    REQUIRE(peaks.size() >= 2);
    CHECK(th >= *std::min_element(peaks.begin(), peaks.end()));
    CHECK(th <= *std::max_element(peaks.begin(), peaks.end()));
  }
  SUBCASE("numeric failure exits 3") {
    const std::string cfg = write_config(dir, base_config(dir));
    const Result r = run({"ode", "-c", cfg, "--steady-state", "--ode.t_max=0.5"});
    CHECK(r.code == kNumeric);
    CHECK(Json::parse(r.err)["error"] == "HorizonExceeded");
  }
}

TEST_CASE("compare") {
  TempDir dir;
  Json j = base_config(dir);
  j["ode"]["reff"] = false;
  const std::string cfg = write_config(dir, j);
  REQUIRE(run({"ode", "-c", cfg, "--outputs.directory=" + (dir / "a")}).code == kOk);
  REQUIRE(run({"ode", "-c", cfg, "--outputs.directory=" + (dir / "b"), "--init.infected=[4,0]"}).code == kOk);
  REQUIRE(run({"simulate", "-c", cfg}).code == kOk);

  const Result self = run({"compare", dir / "a/ode.csv", dir / "a/ode.csv", "--tol", "0"});
  CHECK(self.code == kOk);
  CHECK(Json::parse(self.out)["max_distance"] == 0.0);

  const Result diff = run({"compare", dir / "a/ode.csv", dir / "b/ode.csv", "--tol", "1e-6"});
  CHECK(diff.code == kCompareFailed);
  CHECK(Json::parse(diff.out)["max_distance"].get<double>() > 1e-6);

  const Result cols = run({"compare", dir / "a/ode.csv", dir / "b/ode.csv", "--columns", "S_1,I_1"});
  CHECK(Json::parse(cols.out)["distances"].size() == 2);

  CHECK(run({"compare", dir / "out/stats.json", dir / "a/ode.csv", "--tol", "1"}).code == kOk);

  j["run"]["grid"] = Json::parse(R"({"t_end": 10, "points": 21})");
  REQUIRE(run({"ode", "-c", write_config(dir, j, "c.json"), "--outputs.directory=" + (dir / "c")}).code == kOk);
  const Result mismatch = run({"compare", dir / "a/ode.csv", dir / "c/ode.csv"});
  CHECK(mismatch.code == kUsage);
  CHECK(Json::parse(mismatch.err)["error"] == "GridMismatch");
}

TEST_CASE("final-size and outbreak") {
  TempDir dir;
  SUBCASE("final-size report") {
    const Result r = run({"final-size", "-c", write_config(dir, base_config(dir))});
    REQUIRE(r.code == kOk);
    const Json j = Json::parse(r.out);
    for (const char* key : {"s_inf", "q", "theta", "pi", "r0", "residual", "iterations"}) CHECK(j.contains(key));
  }
  SUBCASE("subcritical outbreak report") {
    Json j = base_config(dir);
    j["model"]["W"] = Json::parse("[[1,0.2],[0.2,1]]");
    j["init"]["infected"] = Json::array({1, 0});
    j["run"]["n_runs"] = 50;
    const Result r = run({"outbreak", "-c", write_config(dir, j)});
    REQUIRE(r.code == kOk);
    const Json o = Json::parse(r.out);
    CHECK(o["pi"][0] == 0.0);
    CHECK(o["predicted_probability"] == 0.0);
    CHECK(o["frequency"].get<double>() <= 0.1);
    CHECK(o["runs"] == 50);
  }
}

TEST_CASE("sample-graph") {
  TempDir dir;
  Json j = base_config(dir);
  const std::string cfg = write_config(dir, j);
  const Result r = run({"sample-graph", "-c", cfg, "--kind", "psbm", "--out", dir / "g.txt"});
  REQUIRE(r.code == kOk);
  std::ifstream in(dir / "g.txt");
  const ModelParams p = parse_config(j).model;
  const LabeledGraph g = read_edge_list(in, &p);
  CHECK(g.n() == 200);
  CHECK(Json::parse(r.out)["pairs"] == g.edges().size());

  CHECK(run({"sample-graph", "-c", cfg, "--kind", "bogus"}).code == kUsage);
  j["model"]["sizes"] = Json::array({10, 10});
  j["init"]["infected"] = Json::array({0, 0});
  const Result dense = run({"sample-graph", "-c", write_config(dir, j, "dense.json"), "--kind", "coupling",
                            "--max-attempts", "1"});
  CHECK(dense.code == kNumeric);
  CHECK(Json::parse(dense.err)["error"] == "MaxAttemptsExceeded");
}
