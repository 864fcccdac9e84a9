// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "morcert/affine.hpp"
#include "morcert/io.hpp"

namespace fs = std::filesystem;
using namespace morcert;

namespace
{

struct CmdResult
{
  int code = -1;
  std::string log;
};

fs::path scratch_dir(const std::string &name)
{
  fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the installed command line binary with a fresh environment-default
// report directory and captures interleaved stdout/stderr.
CmdResult run_cli(const std::string &args, const fs::path &scratch)
{
  const fs::path log_path = scratch / "cmd.log";
  const std::string cmd =
      std::string(MORCERT_CLI_PATH) + " " + args + " > " + log_path.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CmdResult result;
  result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log_path);
  std::ostringstream text;
  text << in.rdbuf();
  result.log = text.str();
  return result;
}

std::string read_bytes(const fs::path &path)
{
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// Strips wall-clock metadata lines so two runs of identical numerics compare
// equal even though their timings differ.
std::string strip_timings(const std::string &text)
{
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
  {
    if (line.rfind("# dual_seconds", 0) == 0 || line.rfind("# offline_seconds", 0) == 0 ||
        line.rfind("# online_seconds", 0) == 0)
    {
      continue;
    }
    out << line << '\n';
  }
  return out.str();
}

std::string quoted(const fs::path &p) { return p.string(); }

}  // namespace

TEST_CASE("generate writes identical bundles for identical seeds")
{
  const fs::path dir = scratch_dir("gen_repeat");
  const std::string common =
      "generate --family damped_cavity --n 48 --ports 2 --seed 9 --report-dir " +
      quoted(dir / "rep");
  CmdResult a = run_cli(common + " --out " + quoted(dir / "sys_a"), dir);
  INFO(a.log);
  REQUIRE(a.code == 0);
  CmdResult b = run_cli(common + " --out " + quoted(dir / "sys_b"), dir);
  REQUIRE(b.code == 0);
  for (const auto &entry : fs::directory_iterator(dir / "sys_a"))
  {
    const fs::path other = dir / "sys_b" / entry.path().filename();
    INFO(entry.path().string());
    REQUIRE(read_bytes(entry.path()) == read_bytes(other));
  }

  // The three-coefficient dielectric family carries five affine matrix terms.
  CmdResult c = run_cli("generate --family three_param_dielectric --n 27 --ports 1 --seed 2 "
                        "--out " +
                            quoted(dir / "sys_d") + " --report-dir " + quoted(dir / "rep"),
                        dir);
  INFO(c.log);
  REQUIRE(c.code == 0);
  const AffineSystem sys = io::read_system_bundle((dir / "sys_d").string());
  REQUIRE(sys.terms().size() == 5);
  REQUIRE(sys.domain().extra_ranges.size() == 2);
}

TEST_CASE("generate rejects an inverted frequency band")
{
  const fs::path dir = scratch_dir("gen_bad_band");
  CmdResult r = run_cli("generate --family resonant_cavity --n 40 --f-lo 0.3 --f-hi 0.2 --out " +
                            quoted(dir / "sys"),
                        dir);
  REQUIRE(r.code == 2);
  REQUIRE_FALSE(r.log.empty());
}

TEST_CASE("greedy reports an unmet tolerance budget")
{
  const fs::path dir = scratch_dir("greedy_budget");
  CmdResult g = run_cli("generate --family damped_cavity --n 48 --ports 1 --seed 4 --out " +
                            quoted(dir / "sys"),
                        dir);
  REQUIRE(g.code == 0);
  CmdResult r = run_cli("greedy --system " + quoted(dir / "sys") + " --out " + quoted(dir / "rom") +
                            " --tol 1e-13 --max-iterations 3 --train-points 21 --deterministic" +
                            " --report-dir " + quoted(dir / "rep"),
                        dir);
  INFO(r.log);
  REQUIRE(r.code == 4);

  // The partial reduced model and the full report are preserved on failure.
  const std::string csv = read_bytes(dir / "rep" / "greedy.csv");
  REQUIRE(csv.find("# reason,max-iterations") != std::string::npos);
  const io::RomBundle bundle = io::read_rom_bundle((dir / "rom").string());
  REQUIRE(bundle.rom.order() >= 1);
  REQUIRE(bundle.has_estimator);
}

TEST_CASE("greedy refuses a dense factorization over the cap with guidance")
{
  const fs::path dir = scratch_dir("greedy_cap");
  CmdResult g = run_cli("generate --family damped_cavity --n 48 --ports 1 --seed 4 --out " +
                            quoted(dir / "sys"),
                        dir);
  REQUIRE(g.code == 0);
  CmdResult r = run_cli("greedy --system " + quoted(dir / "sys") + " --out " + quoted(dir / "rom") +
                            " --estimator standard --svd-cap 16 --report-dir " + quoted(dir / "rep"),
                        dir);
  REQUIRE(r.code == 2);
  REQUIRE(r.log.find("--svd-cap") != std::string::npos);
  REQUIRE(r.log.find("proposed") != std::string::npos);
  REQUIRE_FALSE(fs::exists(dir / "rom"));
}

TEST_CASE("sweep runs online-only from a saved bundle")
{
  const fs::path dir = scratch_dir("sweep_online");
  REQUIRE(run_cli("generate --family damped_cavity --n 48 --ports 2 --seed 4 --out " +
                      quoted(dir / "sys"),
                  dir)
              .code == 0);
  REQUIRE(run_cli("greedy --system " + quoted(dir / "sys") + " --out " + quoted(dir / "rom") +
                      " --tol 1e-5 --train-points 21 --deterministic --report-dir " +
                      quoted(dir / "rep"),
                  dir)
              .code == 0);

  // No --system: the run must rely on the bundle alone.
  CmdResult s = run_cli("sweep --rom " + quoted(dir / "rom") +
                            " --points 9 --deterministic --report-dir " + quoted(dir / "sw"),
                        dir);
  INFO(s.log);
  REQUIRE(s.code == 0);
  const SweepResult table = io::sweep_from_csv(read_bytes(dir / "sw" / "sweep.csv"));
  REQUIRE(table.grid.points.size() == 9);
  REQUIRE(table.rows.size() == 18);
  for (const SweepRow &row : table.rows)
  {
    REQUIRE(row.solved);
    REQUIRE(std::isfinite(row.estimate));
    REQUIRE(row.estimate >= 0.0);
    REQUIRE(std::isnan(row.true_error));
  }
}

TEST_CASE("resolved config replays a greedy run bit-for-bit")
{
  const fs::path dir = scratch_dir("replay");
  REQUIRE(run_cli("generate --family damped_cavity --n 48 --ports 2 --seed 11 --out " +
                      quoted(dir / "sys"),
                  dir)
              .code == 0);
  CmdResult first = run_cli("greedy --system " + quoted(dir / "sys") + " --out " +
                                quoted(dir / "rom") +
                                " --tol 1e-5 --train-points 21 --estimator randomized"
                                " --probes 6 --deterministic --report-dir " +
                                quoted(dir / "rep"),
                            dir);
  INFO(first.log);
  REQUIRE(first.code == 0);

  CmdResult replay = run_cli("greedy --config " + quoted(dir / "rep" / "resolved_config.json") +
                                 " --out " + quoted(dir / "rom2") + " --report-dir " +
                                 quoted(dir / "rep2"),
                             dir);
  INFO(replay.log);
  REQUIRE(replay.code == 0);
  REQUIRE(read_bytes(dir / "rom" / "V.mtx") == read_bytes(dir / "rom2" / "V.mtx"));
  REQUIRE(strip_timings(read_bytes(dir / "rep" / "greedy.csv")) ==
          strip_timings(read_bytes(dir / "rep2" / "greedy.csv")));

  // The equivalent INI section spelling drives the same run.
  std::ofstream ini(dir / "greedy.ini");
  ini << "[greedy]\nsystem=" << (dir / "sys").string() << "\nout=" << (dir / "rom3").string()
      << "\ntol=1e-5\ntrain-points=21\nestimator=randomized\nprobes=6\ndeterministic=true\n"
      << "report-dir=" << (dir / "rep3").string() << "\n";
  ini.close();
  CmdResult ini_run = run_cli("greedy --config " + quoted(dir / "greedy.ini"), dir);
  INFO(ini_run.log);
  REQUIRE(ini_run.code == 0);
  REQUIRE(read_bytes(dir / "rom" / "V.mtx") == read_bytes(dir / "rom3" / "V.mtx"));
}

TEST_CASE("config files with unknown keys are rejected")
{
  const fs::path dir = scratch_dir("bad_config");
  std::ofstream ini(dir / "bad.ini");
  ini << "[greedy]\nsystem=nowhere\nout=nowhere2\ntolx=1e-6\n";
  ini.close();
  CmdResult r = run_cli("greedy --config " + quoted(dir / "bad.ini"), dir);
  REQUIRE(r.code != 0);
  REQUIRE(r.log.find("tolx") != std::string::npos);

  CmdResult missing = run_cli("greedy --out somewhere", dir);
  REQUIRE(missing.code != 0);
  REQUIRE(missing.log.find("--system") != std::string::npos);
}

TEST_CASE("report directory falls back to the environment")
{
  const fs::path dir = scratch_dir("env_report");
  fs::create_directories(dir / "from_env");
  const std::string cmd = "MORCERT_REPORT_DIR=" + (dir / "from_env").string() +
                          " " MORCERT_CLI_PATH
                          " generate --family damped_cavity --n 32 --ports 1 --seed 1 --out " +
                          (dir / "sys").string() + " > " + (dir / "cmd.log").string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(raw));
  REQUIRE(WEXITSTATUS(raw) == 0);
  REQUIRE(fs::exists(dir / "from_env" / "resolved_config.json"));
  REQUIRE(fs::exists(dir / "from_env" / "generate.json"));
}
