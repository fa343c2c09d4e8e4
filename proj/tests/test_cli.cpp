#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tvsar/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("TVSAR_CLI");
  REQUIRE(p != nullptr);
  return p;
}

struct RunResult {
  int status = -1;
  std::string out;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cmd.out";
  const std::string cmd =
      cli_path() + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.status = rc == -1 ? -1 : WEXITSTATUS(rc);
  std::ifstream f(log);
  std::stringstream ss;
  ss << f.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("tvsar_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(bool(f));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

void write_small_config(const fs::path& p, std::uint64_t seed) {
  std::ofstream f(p);
  f << "# small single-lag model for tests\n"
    << "model.seasons = 1\n"
    << "model.orders = 1\n"
    << "sampler.draws = 20\n"
    << "sampler.burnin = 10\n"
    << "sampler.thin = 2\n"
    << "sampler.seed = " << seed << "\n";
}

}  // namespace

TEST_CASE("simulate writes series and truth sidecars") {
  const fs::path dir = fresh_dir("simulate");
  const RunResult r = run_cli(
      "simulate --experiment exp1 --out " + dir.string() + " -T 120 --seed 3",
      dir);
  CHECK(r.status == 0);
  CHECK(count_lines(slurp(dir / "y.csv")) == 121);  // header + T rows
  CHECK(count_lines(slurp(dir / "truth_theta.csv")) == 121);
  const std::string spec = slurp(dir / "truth_spectrum.csv");
  CHECK(spec.rfind("t,omega,logf\n", 0) == 0);
  CHECK(count_lines(spec) == 1 + 120 * 314);

  // replicates get numbered files, same truth
  const fs::path dir2 = fresh_dir("simulate_reps");
  const RunResult r2 = run_cli("simulate --experiment exp1-one-lag --out " +
                                   dir2.string() + " -T 80 --replicates 3",
                               dir2);
  CHECK(r2.status == 0);
  CHECK(fs::exists(dir2 / "y_001.csv"));
  CHECK(fs::exists(dir2 / "y_003.csv"));
  CHECK(slurp(dir2 / "y_001.csv") != slurp(dir2 / "y_002.csv"));
}

TEST_CASE("simulate requires an existing output directory") {
  const fs::path dir = fresh_dir("sim_missing");
  const RunResult r = run_cli(
      "simulate --experiment exp1 --out " + (dir / "nope").string(), dir);
  CHECK(r.status != 0);
}

TEST_CASE("fit is reproducible byte for byte") {
  const fs::path dir = fresh_dir("fit");
  REQUIRE(run_cli("simulate --experiment exp1-one-lag --out " + dir.string() +
                      " -T 70 --seed 5",
                  dir)
              .status == 0);
  write_small_config(dir / "run.conf", 42);

  const std::string base = "fit --data " + (dir / "y.csv").string() +
                           " --config " + (dir / "run.conf").string();
  const RunResult a =
      run_cli(base + " --out " + (dir / "arch_a").string(), dir);
  const RunResult b =
      run_cli(base + " --out " + (dir / "arch_b").string(), dir);
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  for (const char* name : {"theta.csv", "h.csv", "sigma.csv", "mu.csv",
                           "kappa.csv", "manifest.json"}) {
    CHECK(slurp(dir / "arch_a" / name) == slurp(dir / "arch_b" / name));
  }
  // a different seed changes the draws
  const RunResult c = run_cli(
      base + " --seed 43 --out " + (dir / "arch_c").string(), dir);
  REQUIRE(c.status == 0);
  CHECK(slurp(dir / "arch_a" / "theta.csv") !=
        slurp(dir / "arch_c" / "theta.csv"));

  // archive round trip preserves shapes
  const tvsar::PosteriorDraws back =
      tvsar::read_archive((dir / "arch_a").string());
  CHECK(back.theta.size() == 10);
  CHECK(back.theta[0].rows() == 71);
  CHECK(back.theta[0].cols() == 1);
  const tvsar::ArchiveInfo info =
      tvsar::read_archive_info((dir / "arch_a").string());
  CHECK(info.T == 70);
  CHECK(info.seed == 42);
}

TEST_CASE("spectrum writes quantile surfaces and checks staleness") {
  const fs::path dir = fresh_dir("spectrum");
  REQUIRE(run_cli("simulate --experiment exp1-one-lag --out " + dir.string() +
                      " -T 70 --seed 7",
                  dir)
              .status == 0);
  write_small_config(dir / "run.conf", 11);
  REQUIRE(run_cli("fit --data " + (dir / "y.csv").string() + " --config " +
                      (dir / "run.conf").string() + " --out " +
                      (dir / "arch").string(),
                  dir)
              .status == 0);

  const fs::path out = dir / "grid.csv";
  const RunResult r =
      run_cli("spectrum --archive " + (dir / "arch").string() + " --times 30" +
                  " --frequencies 20 --out " + out.string(),
              dir);
  CHECK(r.status == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("t,omega,q025,median,q975\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 20);

  // matching config passes the hash check
  CHECK(run_cli("spectrum --archive " + (dir / "arch").string() +
                    " --times 30 --config " + (dir / "run.conf").string(),
                dir)
            .status == 0);
  // a changed config is rejected as stale
  write_small_config(dir / "other.conf", 12);
  const RunResult stale =
      run_cli("spectrum --archive " + (dir / "arch").string() +
                  " --times 30 --config " + (dir / "other.conf").string(),
              dir);
  CHECK(stale.status != 0);
  CHECK(stale.out.find("stale") != std::string::npos);

  // scoring against the simulate sidecar prints an mse
  const RunResult mse =
      run_cli("spectrum --archive " + (dir / "arch").string() + " --truth " +
                  (dir / "truth_spectrum.csv").string(),
              dir);
  CHECK(mse.status == 0);
  CHECK(mse.out.find("mse_log_spectral=") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected with the key name") {
  const fs::path dir = fresh_dir("badconf");
  std::ofstream(dir / "bad.conf") << "model.seasonz = 1\n";
  std::ofstream(dir / "y.csv") << "1.0\n2.0\n";
  const RunResult r = run_cli("fit --data " + (dir / "y.csv").string() +
                                  " --config " + (dir / "bad.conf").string() +
                                  " --out " + (dir / "arch").string(),
                              dir);
  CHECK(r.status != 0);
  CHECK(r.out.find("model.seasonz") != std::string::npos);
}

TEST_CASE("malformed data names the offending row") {
  const fs::path dir = fresh_dir("baddata");
  std::ofstream(dir / "y.csv") << "1.0\n2.0\nnot_a_number\n4.0\n";
  write_small_config(dir / "run.conf", 1);
  const RunResult r = run_cli("fit --data " + (dir / "y.csv").string() +
                                  " --config " + (dir / "run.conf").string() +
                                  " --out " + (dir / "arch").string(),
                              dir);
  CHECK(r.status != 0);
  CHECK(r.out.find("3") != std::string::npos);
}

TEST_CASE("lps prints a finite score") {
  const fs::path dir = fresh_dir("lps");
  REQUIRE(run_cli("simulate --experiment exp1-one-lag --out " + dir.string() +
                      " -T 90 --seed 9",
                  dir)
              .status == 0);
  write_small_config(dir / "run.conf", 13);
  const RunResult r =
      run_cli("lps --data " + (dir / "y.csv").string() + " --config " +
                  (dir / "run.conf").string() + " --split 80",
              dir);
  CHECK(r.status == 0);
  CHECK(r.out.find("lps=") != std::string::npos);
  CHECK(r.out.find("nan") == std::string::npos);
  CHECK(r.out.find("inf") == std::string::npos);
}

TEST_CASE("diag reports update rates and spectral chain ess") {
  const fs::path dir = fresh_dir("diag");
  REQUIRE(run_cli("simulate --experiment exp1-one-lag --out " + dir.string() +
                      " -T 70 --seed 15",
                  dir)
              .status == 0);
  write_small_config(dir / "run.conf", 17);
  REQUIRE(run_cli("fit --data " + (dir / "y.csv").string() + " --config " +
                      (dir / "run.conf").string() + " --out " +
                      (dir / "arch").string(),
                  dir)
              .status == 0);
  const RunResult r =
      run_cli("diag --archive " + (dir / "arch").string(), dir);
  CHECK(r.status == 0);
  CHECK(r.out.find("update_rate k=0") != std::string::npos);
  CHECK(r.out.find("ess t=") != std::string::npos);
}

TEST_CASE("detrending removes a linear trend before fitting") {
  const fs::path dir = fresh_dir("detrend");
  REQUIRE(run_cli("simulate --experiment exp1-one-lag --out " + dir.string() +
                      " -T 80 --seed 19",
                  dir)
              .status == 0);
  // add a strong trend to the simulated series
  const tvsar::Vector y = tvsar::read_series_csv((dir / "y.csv").string());
  tvsar::Vector trended = y;
  for (int t = 0; t < trended.size(); ++t) trended[t] += 0.5 * t;
  tvsar::write_series_csv((dir / "y_trend.csv").string(), trended);

  write_small_config(dir / "run.conf", 23);
  const RunResult r =
      run_cli("fit --data " + (dir / "y_trend.csv").string() + " --config " +
                  (dir / "run.conf").string() + " --detrend 0 --out " +
                  (dir / "arch").string(),
              dir);
  CHECK(r.status == 0);
  CHECK(fs::exists(dir / "arch" / "manifest.json"));
}
