#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

// Drives the installed command-line binary end to end through a shell.

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::string cli = PERIWAVE_CLI_PATH;

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "periwave_cli_test";
    fs::remove_all(d);
    fs::create_directories(d / "qcache");
    setenv("PERIWAVE_QUAD_CACHE", (d / "qcache").c_str(), 1);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const fs::path& log) {
  std::string cmd = cli + " " + args + " >" + log.string() + " 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace

TEST_CASE("validate gates the residual and writes the report") {
  fs::path d = work_dir();
  fs::path rep = d / "report.json";
  int code = run("validate --pde mhelm --beta 1 --eps 1e-9 --aspect 1,4 --n-src 300 "
                 "--samples 80 --seed 7 --out " + rep.string(),
                 d / "validate.log");
  CHECK(code == 0);
  json r = json::parse(slurp(rep));
  CHECK(r["pass"] == true);
  CHECK(r["failures"].empty());
  CHECK(r["pde"] == "mhelm");
  CHECK(r["beta"] == 1.0);
  CHECK(r["eps"] == 1e-9);
  REQUIRE(r["rows"].size() == 2);
  for (const json& row : r["rows"]) {
    CHECK(row["rank"].get<std::size_t>() > 0);
    CHECK(row["residuals"]["rel"].get<double>() <= 5e-9);
    CHECK(row["timings"].contains("per"));
    CHECK(row["timings"].contains("near"));
    CHECK(row["timings"].contains("total"));
    CHECK(row["timings"].contains("free"));
    CHECK(row["cell"]["d"] == 1.0);
  }
}

TEST_CASE("apply reproduces validate's internal fields bitwise in direct mode") {
  fs::path d = work_dir();
  fs::path src = d / "sources.txt", fld = d / "fields.txt", tgt = d / "targets.txt";
  std::string common = "--pde mhelm --beta 1 --eps 1e-9 --aspect 1 --accel direct --seed 11 ";
  int code = run("validate " + common + "--n-src 150 --samples 40 --dump-sources " +
                     src.string() + " --dump-fields " + fld.string(),
                 d / "dump.log");
  REQUIRE(code == 0);

  // Targets are the generated source points themselves.
  std::ifstream in(src);
  std::ostringstream tt;
  tt.precision(17);
  double x, y, q;
  while (in >> x >> y >> q) tt << x << " " << y << "\n";
  spit(tgt, tt.str());

  fs::path out = d / "applied.txt";
  code = run("apply " + common + src.string() + " " + tgt.string() + " --out " + out.string(),
             d / "apply.log");
  REQUIRE(code == 0);
  std::string a = slurp(fld), b = slurp(out);
  CHECK(!a.empty());
  CHECK(a == b);

  // Determinism: a second run produces the same bytes.
  fs::path out2 = d / "applied2.txt";
  code = run("apply " + common + src.string() + " " + tgt.string() + " --out " + out2.string(),
             d / "apply2.log");
  REQUIRE(code == 0);
  CHECK(slurp(out2) == b);
}

TEST_CASE("empty targets produce an empty output and exit 0") {
  fs::path d = work_dir();
  fs::path src = d / "one.txt", tgt = d / "none.txt", out = d / "empty_out.txt";
  spit(src, "0.1 0.2 1.0\n-0.1 -0.2 -1.0\n");
  spit(tgt, "# no targets\n");
  int code = run("apply --pde poisson --eps 1e-8 " + src.string() + " " + tgt.string() +
                     " --out " + out.string(),
                 d / "empty.log");
  CHECK(code == 0);
  CHECK(slurp(out).empty());
}

TEST_CASE("malformed records and bad configs fail with diagnostics") {
  fs::path d = work_dir();
  fs::path bad = d / "bad.txt", tgt = d / "t.txt";
  spit(bad, "0.1 0.2 oops\n");
  spit(tgt, "0.0 0.0\n");
  fs::path log = d / "bad.log";
  int code = run("apply --pde poisson --eps 1e-8 " + bad.string() + " " + tgt.string(), log);
  CHECK(code == 2);
  CHECK(slurp(log).find("bad.txt:1") != std::string::npos);

  spit(bad, "0.1 0.2 1.0\n0.3 0.4 1.0 2.0\n");
  code = run("apply --pde poisson --eps 1e-8 " + bad.string() + " " + tgt.string(), log);
  CHECK(code == 2);
  CHECK(slurp(log).find("bad.txt:2") != std::string::npos);

  spit(bad, "0.1 0.2 1.0\n");
  code = run("apply --pde poisson --eps 1e-20 " + bad.string() + " " + tgt.string(), log);
  CHECK(code == 2);
}

TEST_CASE("bench reports rows, the chosen path, and gate results") {
  fs::path d = work_dir();
  fs::path rep = d / "bench.json";
  int code = run("bench --pde poisson --eps 1e-12 --aspect 1,2 --n-src 1500 --reps 2 --seed 3 "
                 "--out " + rep.string(),
                 d / "bench.log");
  CHECK(code == 0);
  json r = json::parse(slurp(rep));
  CHECK(r["pass"] == true);
  REQUIRE(r["rows"].size() == 2);
  for (const json& row : r["rows"]) {
    CHECK(row["rank"].get<std::size_t>() > 0);
    CHECK((row["path"] == "direct" || row["path"] == "nufft"));
    CHECK(row["timings"]["direct"].get<double>() > 0.0);
  }
  CHECK(r["gates"].contains("direct_linear"));
  CHECK(r["gates"].contains("stability"));
}
