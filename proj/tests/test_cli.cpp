#include "catch_amalgamated.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Scratch directory per test case, removed on exit.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& tag) {
    dir = fs::temp_directory_path() / ("wassergeo_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const json& j) const {
    const auto p = dir / name;
    std::ofstream(p) << j.dump();
    return p;
  }
};

Run run(const std::string& args, const Scratch& s) {
  const auto o = s.dir / "stdout.txt", e = s.dir / "stderr.txt";
  const std::string cmd = std::string(WASSERGEO_CLI_PATH) + " " + args + " > " + o.string() + " 2> " + e.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

json two_point_space() { return {{"dist", {{0, 1}, {1, 0}}}, {"weights", {0.5, 0.5}}}; }

}  // namespace

TEST_CASE("ot on two Diracs at distance one") {
  Scratch s("ot");
  const auto a = s.write("a.json", {{"mass", {1, 0}}, {"space", two_point_space()}});
  const auto b = s.write("b.json", {{"mass", {0, 1}}, {"space", two_point_space()}});
  const auto r = run("ot " + a.string() + " " + b.string() + " --p 2 --convention standard", s);
  REQUIRE(r.code == 0);
  const auto rep = json::parse(r.out);
  CHECK(rep["result"]["w_p"].get<double>() == 1.0);
  CHECK(rep["status"] == "ok");
  CHECK(rep["tool"] == "wassergeo");
  CHECK(rep["seed"] == 7);
  CHECK(rep["convention"] == "standard");
  CHECK(rep.contains("version"));
  CHECK(rep["config"]["command"] == "ot");
  const auto paper = json::parse(run("ot " + a.string() + " " + b.string() + " --convention paper", s).out);
  CHECK_THAT(paper["result"]["w_p"].get<double>(), Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-15));
}

TEST_CASE("malformed space exits with code 2 and a machine code") {
  Scratch s("bad");
  const json bad{{"dist", {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}}, {"weights", {1, 1, 1}}};
  const auto a = s.write("a.json", {{"mass", {1, 0, 0}}, {"space", bad}});
  const auto b = s.write("b.json", {{"mass", {0, 0, 1}}, {"space", bad}});
  const auto r = run("ot " + a.string() + " " + b.string(), s);
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"]["code"] == "TriangleViolation");
  CHECK(r.out.empty());
  SECTION("unknown suite and bad usage") {
    CHECK(json::parse(run("lemma-check --suite nope", s).err)["error"]["code"] == "InvalidParameter");
    CHECK(run("ot", s).code == 2);
    CHECK(run("ot " + a.string() + " " + b.string() + " --convention other", s).code == 2);
  }
}

TEST_CASE("lemma-check reports zero violations") {
  Scratch s("lemma");
  for (const std::string suite : {"p-dist-ineq", "calculus", "beta", "non-crossing"}) {
    const auto r = run("lemma-check --suite " + suite + " --trials 50 --seed 7", s);
    CHECK(r.code == 0);
    const auto rep = json::parse(r.out);
    CHECK(rep["result"]["violations"] == 0);
    CHECK(rep["result"]["suite"] == suite);
  }
}

TEST_CASE("identical configs give identical bytes") {
  Scratch s("det");
  const std::string args = "lemma-check --suite p-dist-ineq --trials 200 --seed 11";
  const auto one = run(args + " --threads 1", s).out;
  const auto again = run(args + " --threads 1", s).out;
  const auto four = run(args + " --threads 4", s).out;
  CHECK(!one.empty());
  CHECK(one == again);
  CHECK(one == four);
  CHECK(run("lemma-check --suite p-dist-ineq --trials 200 --seed 12", s).out != one);
}

TEST_CASE("--out writes the report and the CSV table") {
  Scratch s("out");
  const json line{{"model", "interval"}, {"params", {{"a", 0.0}, {"b", 1.0}, {"count", 21}}}};
  std::vector<double> m0(21, 0.0), m1(21, 0.0);
  for (int i = 0; i < 5; ++i) {
    m0[i] = 0.2;
    m1[i + 12] = 0.2;
  }
  const auto sp = s.write("line.json", line);
  const auto a = s.write("a.json", {{"mass", m0}, {"space", "line.json"}});
  const auto b = s.write("b.json", {{"mass", m1}, {"space", "line.json"}});
  const auto dir = s.dir / "res";
  REQUIRE(run("ot " + a.string() + " " + b.string() + " --out " + dir.string(), s).code == 0);
  CHECK(fs::exists(dir / "report.json"));
  const auto csv = slurp(dir / "coupling.csv");
  CHECK(csv.rfind("x_index,y_index,mass\n", 0) == 0);
  SECTION("geodesic table") {
    const auto g = s.dir / "geo";
    const auto r = run("geodesic " + a.string() + " " + b.string() + " --p 2 --t 0,0.25,0.5,0.75,1 --out " + g.string(), s);
    CHECK(r.code == 0);
    const auto rep = json::parse(slurp(g / "report.json"));
    CHECK(rep["result"]["verdict"] == true);
    CHECK(slurp(g / "geodesic.csv").rfind("s,t,w\n", 0) == 0);
  }
  SECTION("orlicz and the trace") {
    const auto g = s.dir / "orl";
    REQUIRE(run("orlicz " + a.string() + " " + b.string() + " --phi square --out " + g.string(), s).code == 0);
    const auto rep = json::parse(slurp(g / "report.json"));
    CHECK(rep["result"]["trace_monotone"] == true);
    CHECK(rep["result"]["jensen"]["verdict"] == true);
    CHECK(slurp(g / "bisection.csv").rfind("lambda,g\n", 0) == 0);
  }
  SECTION("brenier") {
    const auto r = run("brenier " + a.string() + " " + b.string() + " --p 2", s);
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["result"]["pointwise"] == true);
  }
  SECTION("cd-check with a computed plan") {
    std::vector<double> d0(21, 0.0), d1(21, 0.0);
    for (int i = 2; i < 8; ++i) d0[i] = 1.0 + 0.1 * i;
    for (int i = 11; i < 19; ++i) d1[i] = 1.0;
    const auto plan = s.write("plan.json", {{"space", line}, {"mu0", d0}, {"mu1", d1}});
    const auto r = run("cd-check " + plan.string() + " --K 0 --N 2 --U UN --tol 1e-6", s);
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["result"]["per_t"].size() == 11);
  }
  CHECK(fs::exists(sp));
}

TEST_CASE("poincare prints a CSV table") {
  Scratch s("poincare");
  const std::size_t n = 2001;
  std::vector<double> w(n);
  const double h = 10.0 / (n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -5.0 + h * static_cast<double>(i);
    w[i] = h * std::exp(-x * x / 2);
  }
  const auto sp = s.write("gauss.json", {{"model", "interval"}, {"params", {{"a", -5.0}, {"b", 5.0}, {"count", n}, {"weights", w}}}});
  const auto r = run("poincare --variant corrected " + sp.string(), s);
  CHECK(r.code == 0);
  CHECK(r.out.rfind("h_function_id,ratio\nx,", 0) == 0);
  const auto paper = run("poincare --variant paper " + sp.string() + " --out " + (s.dir / "p").string(), s);
  CHECK(paper.code == 0);
  const auto rep = json::parse(slurp(s.dir / "p" / "report.json"));
  CHECK(rep["result"]["stated_constant_violated"] == true);
}

TEST_CASE("laplacian on a calibrated grid") {
  Scratch s("lap");
  const auto sp = s.write("grid.json", {{"model", "euclidean_grid"},
                                        {"params", {{"dim", 2}, {"counts", {41, 41}}, {"spacing", 0.025}}}});
  for (const std::string p : {"1.5", "2", "3"}) {
    const auto r = run("laplacian " + sp.string() + " --p " + p, s);
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["result"]["verdict"] == true);
  }
}
