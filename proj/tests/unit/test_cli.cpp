#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "septensor_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SEPTENSOR_CLI) + " " + args + " > " + (scratch() / "stdout.txt").string() +
                          " 2> " + (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

const char* kSolve = R"({
  "problem": "poisson_case1", "seed": 7, "params": {"dimension": 2},
  "discretization": {"n_elem": 16, "s": 2, "p": 3},
  "solver": {"max_modes": 4}
})";

}  // namespace

TEST_CASE("flags and exit codes") {
  CHECK(run("--version") == 0);
  CHECK(run("") == 2);
  CHECK(run("solve") == 2);
  CHECK(run("frobnicate --config x.json") == 2);
  CHECK(run("solve --config " + (scratch() / "missing.json").string()) == 2);

  const fs::path out = scratch() / "bad_out";
  const fs::path bad = write_config("bad.json", R"({"problem": "poisson_case1", "solver": {"max_mode": 4}})");
  CHECK(run("solve --config " + bad.string() + " --out " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(slurp(scratch() / "stderr.txt").find("config.solver.max_mode") != std::string::npos);

  const fs::path broken = write_config("broken.json", "{\"problem\": ");
  CHECK(run("solve --config " + broken.string() + " --out " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out));

  // A zero operator makes the solve singular: a numerical failure.
  const fs::path singular = write_config("singular.json", R"({
    "problem": "custom", "discretization": {"n_elem": 4, "s": 0, "p": 1},
    "dims": [{"name": "x", "kind": "space", "domain": [0, 1]}],
    "params": {"operator": [{"coeff": 0, "factors": ["stiffness"]}], "source": [{"factors": [1]}]}
  })");
  CHECK(run("solve --config " + singular.string() + " --out " + (scratch() / "singular").string()) == 3);
}

TEST_CASE("solve writes its artifacts") {
  const fs::path cfg = write_config("solve.json", kSolve);
  const fs::path out = scratch() / "solve";
  REQUIRE(run("solve --config " + cfg.string() + " --out " + out.string()) == 0);
  for (const char* f : {"field.inntd", "solve_report.json", "errors.csv", "manifest.json"})
    CHECK(fs::exists(out / f));
  CHECK(first_line(out / "errors.csv") == "metric,value");
  std::ifstream in(out / "errors.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.rfind("rel_l2_integral,", 0) == 0);
  CHECK(std::stod(line.substr(line.find(',') + 1)) <= 1e-5);
  std::getline(in, line);
  CHECK(line.rfind("rel_l2_pointwise,", 0) == 0);

  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "solve");
  CHECK(manifest["seed"] == 7);
  CHECK(manifest.contains("config_crc32"));
  CHECK(manifest["outputs"].size() >= 3);

  const fs::path again = scratch() / "solve_again";
  REQUIRE(run("solve --config " + cfg.string() + " --out " + again.string()) == 0);
  CHECK(slurp(out / "errors.csv") == slurp(again / "errors.csv"));
  CHECK(slurp(out / "field.inntd") == slurp(again / "field.inntd"));

  const fs::path reseeded = scratch() / "solve_seed";
  REQUIRE(run("solve --config " + cfg.string() + " --out " + reseeded.string() + " --seed 11") == 0);
  CHECK(nlohmann::json::parse(slurp(reseeded / "manifest.json"))["seed"] == 11);
}

TEST_CASE("oracle, train and invert") {
  const fs::path ocfg = write_config("oracle.json", R"({
    "problem": "heat_spt", "seed": 2,
    "oracle": {"kind": "heat_2d", "grid": 9, "steps": 10, "t_end": 0.04,
               "k_values": [1.5, 3.0], "p_values": [120, 180], "max_rows": 600}
  })");
  const fs::path odir = scratch() / "oracle";
  REQUIRE(run("oracle --config " + ocfg.string() + " --out " + odir.string()) == 0);
  CHECK(first_line(odir / "dataset.csv") == "x,y,k,P,t,u");

  const std::string tcfg_text = R"({
    "problem": "custom", "seed": 4,
    "discretization": {"n_elem": 4, "s": 1, "p": 1},
    "dims": [{"name": "x", "kind": "space", "domain": [0, 1]},
             {"name": "y", "kind": "space", "domain": [0, 1]},
             {"name": "k", "kind": "param", "domain": [1, 4]},
             {"name": "P", "kind": "param", "domain": [100, 200]},
             {"name": "t", "kind": "time", "domain": [0, 0.04]}],
    "trainer": {"modes": 2, "epochs_max": 5, "batch_size": 32, "learning_rate": 1e-3,
                "dataset": ")" + (odir / "dataset.csv").string() + R"("}
  })";
  const fs::path tcfg = write_config("train.json", tcfg_text);
  const fs::path tdir = scratch() / "train";
  REQUIRE(run("train --config " + tcfg.string() + " --out " + tdir.string()) == 0);
  CHECK(first_line(tdir / "train_history.csv") == "epoch,train_mse,validation_mse");
  const auto report = nlohmann::json::parse(slurp(tdir / "train_report.json"));
  CHECK(report["stop_reason"].is_string());
  CHECK(report["parameters"] == 2 * (5 + 5 + 5 + 5 + 5));

  const fs::path tdir2 = scratch() / "train2";
  REQUIRE(run("train --config " + tcfg.string() + " --out " + tdir2.string()) == 0);
  CHECK(slurp(tdir / "train_history.csv") == slurp(tdir2 / "train_history.csv"));

  const std::string icfg_text = R"({
    "problem": "custom", "seed": 5,
    "discretization": {"n_elem": 4, "s": 1, "p": 1},
    "dims": [{"name": "x", "kind": "space", "domain": [0, 1]},
             {"name": "y", "kind": "space", "domain": [0, 1]},
             {"name": "k", "kind": "param", "domain": [1, 4]},
             {"name": "P", "kind": "param", "domain": [100, 200]},
             {"name": "t", "kind": "time", "domain": [0, 0.04]}],
    "inverse": {"field": ")" + (tdir / "field.inntd").string() + R"(", "free_dims": ["k", "P"],
                "box": [[1, 4], [100, 200]], "true_params": [2.5, 150], "target_grid": 4,
                "restarts": 2, "max_steps": 50}
  })";
  const fs::path icfg = write_config("invert.json", icfg_text);
  const fs::path idir = scratch() / "invert";
  REQUIRE(run("invert --config " + icfg.string() + " --out " + idir.string()) == 0);
  CHECK(first_line(idir / "inverse.csv") == "param,estimate");
  CHECK(first_line(idir / "inverse_restarts.csv") ==
        "restart,initial_k,initial_P,estimate_k,estimate_P,loss,steps,converged");
  CHECK(first_line(idir / "inverse_history.csv") == "restart,step,loss,best_loss");
  CHECK(slurp(scratch() / "stdout.txt").find("restart 1: loss") != std::string::npos);

  const fs::path dcfg = write_config("oracle3.json", R"({
    "problem": "heat_spt", "oracle": {"kind": "heat_3d", "grid": 5, "steps": 4}
  })");
  REQUIRE(run("oracle --config " + dcfg.string() + " --out " + (scratch() / "oracle3").string()) == 0);
  CHECK(first_line(scratch() / "oracle3" / "target.csv") == "x,y,z,t,u");
}

TEST_CASE("study writes a convergence table") {
  const fs::path cfg = write_config("study.json", R"({
    "problem": "poisson_case1", "seed": 1, "params": {"dimension": 2},
    "solver": {"max_modes": 4},
    "study": {"elems": [4, 8], "patches": [{"s": 1, "p": 1}], "repeats": 1}
  })");
  const fs::path out = scratch() / "study";
  REQUIRE(run("study --config " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(first_line(out / "study.csv") == "elems,s,p,params,mean_error,std_error,mean_wall_time");
  std::ifstream in(out / "study.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 7);
    CHECK(std::stod(cells[5]) == 0.0);
  }
  CHECK(rows == 2);

  const fs::path bad = write_config("study_bad.json", R"({
    "problem": "poisson_case1", "study": {"elems": [4], "patches": [{"s": 1, "p": 3}]}
  })");
  const fs::path bad_out = scratch() / "study_bad";
  CHECK(run("study --config " + bad.string() + " --out " + bad_out.string()) == 2);
  CHECK_FALSE(fs::exists(bad_out));
}
