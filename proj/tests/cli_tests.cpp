#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "tensorconc_cli_tests";
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(TENSORCONC_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

const char* kTinyConfig = R"({
  "schema_version": 1,
  "plan": {
    "families": ["gaussian"],
    "spectra": [{ "kind": "identity", "dims": [2] }],
    "n_grid": [8],
    "p_list": [2],
    "variant": "signed",
    "trials": 3,
    "base_seed": 5
  }
})";

}  // namespace

TEST_CASE("rate subcommand prints plain decimals") {
  const RunResult a = run_cli("rate thm1-exp --opnorm 1 --rank 4 --n 100 --p 2 --k 1");
  CHECK(a.exit_code == 0);
  CHECK(a.out == "0.24\n");

  const RunResult b = run_cli("rate kl-p2 --opnorm 1 --rank 1 --n 100");
  CHECK(b.exit_code == 0);
  CHECK(b.out == "0.11\n");

  const RunResult j = run_cli("rate kl-p2 --opnorm 1 --rank 1 --n 100 --json");
  CHECK(j.exit_code == 0);
  CHECK(j.out.find("\"value\"") != std::string::npos);
  CHECK(j.out.back() == '\n');
}

TEST_CASE("rate subcommand rejects missing flags and bad names") {
  const RunResult missing = run_cli("rate thm1-exp --opnorm 1");
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("--rank") != std::string::npos);
  CHECK(run_cli("rate not-a-rate --opnorm 1").exit_code == 2);
}

TEST_CASE("simulate writes three files and refuses accidental overwrite") {
  const fs::path dir = scratch_dir();
  const fs::path config = dir / "tiny.json";
  const fs::path out_dir = dir / "run1";
  fs::remove_all(out_dir);
  write_file(config, kTinyConfig);

  const RunResult first =
      run_cli("simulate " + config.string() + " --out " + out_dir.string());
  CHECK(first.exit_code == 0);
  CHECK(fs::exists(out_dir / "trials.csv"));
  CHECK(fs::exists(out_dir / "summary.csv"));
  CHECK(fs::exists(out_dir / "metadata.json"));
  const std::string trials = slurp(out_dir / "trials.csv");
  CHECK(trials.back() == '\n');
  CHECK(trials.find(',') != std::string::npos);

  const RunResult refuse =
      run_cli("simulate " + config.string() + " --out " + out_dir.string());
  CHECK(refuse.exit_code == 2);
  CHECK(refuse.err.find("--force") != std::string::npos);

  const RunResult again = run_cli("simulate " + config.string() + " --out " +
                                  out_dir.string() + " --force");
  CHECK(again.exit_code == 0);
  CHECK(slurp(out_dir / "trials.csv") == trials);  // byte-identical rerun
}

TEST_CASE("simulate validates configs up front") {
  const fs::path dir = scratch_dir();
  const fs::path bad = dir / "bad.json";
  write_file(bad, R"({
    "schema_version": 1,
    "plan": {
      "families": ["student_t"],
      "dof": 3.0,
      "spectra": [{ "kind": "identity", "dims": [2] }],
      "n_grid": [8],
      "p_list": [4],
      "variant": "signed",
      "trials": 3,
      "base_seed": 5
    }
  })");
  const RunResult result = run_cli("simulate " + bad.string() + " --out " +
                                   (dir / "never").string());
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("dof") != std::string::npos);

  const fs::path unknown = dir / "unknown.json";
  write_file(unknown, R"({"schema_version": 1, "plan": {"families": ["gaussian"]},
                          "extra": 3})");
  CHECK(run_cli("simulate " + unknown.string() + " --out x").exit_code == 2);

  const fs::path wrong_version = dir / "wrongv.json";
  write_file(wrong_version, R"({"schema_version": 99, "plan": {}})");
  const RunResult version = run_cli("simulate " + wrong_version.string() + " --out x");
  CHECK(version.exit_code == 2);
  CHECK(version.err.find("schema_version") != std::string::npos);
}

TEST_CASE("seed precedence: flag beats environment beats config") {
  const fs::path dir = scratch_dir();
  const fs::path config = dir / "tiny_seed.json";
  write_file(config, kTinyConfig);

  const fs::path out_env = dir / "out_env";
  fs::remove_all(out_env);
  const RunResult env_run = run_cli("simulate " + config.string() + " --out " +
                                    out_env.string() + " --force");
  CHECK(env_run.exit_code == 0);

  // Same seed through the environment: identical bytes.
  const fs::path out_env2 = dir / "out_env2";
  fs::remove_all(out_env2);
  setenv("TENSORCONC_SEED", "5", 1);
  CHECK(run_cli("simulate " + config.string() + " --out " + out_env2.string())
            .exit_code == 0);
  CHECK(slurp(out_env2 / "trials.csv") == slurp(out_env / "trials.csv"));

  // Different environment seed changes the draw; flag overrides it back.
  const fs::path out_env3 = dir / "out_env3";
  fs::remove_all(out_env3);
  setenv("TENSORCONC_SEED", "77", 1);
  CHECK(run_cli("simulate " + config.string() + " --out " + out_env3.string())
            .exit_code == 0);
  CHECK(slurp(out_env3 / "trials.csv") != slurp(out_env / "trials.csv"));

  const fs::path out_flag = dir / "out_flag";
  fs::remove_all(out_flag);
  CHECK(run_cli("simulate " + config.string() + " --out " + out_flag.string() +
                " --seed 5")
            .exit_code == 0);
  CHECK(slurp(out_flag / "trials.csv") == slurp(out_env / "trials.csv"));
  unsetenv("TENSORCONC_SEED");
}

TEST_CASE("verify rejects unknown suites and runs the cheap one") {
  CHECK(run_cli("verify no-such-suite").exit_code == 2);
  const RunResult phi = run_cli("verify phi");
  CHECK(phi.exit_code == 0);
  CHECK(phi.out.find("PASS") != std::string::npos);
  CHECK(phi.out.find("criterion-09") != std::string::npos);
}
