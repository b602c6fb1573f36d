#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "quadrange/io.hpp"
#include "test_util.hpp"

using namespace quadrange;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("quadrange_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  return fs::exists(p) ? read_text_file(p) : std::string();
}

CliRun run_cli(const std::string& args, const std::string& env = "") {
  const fs::path so = work_dir() / "stdout.txt";
  const fs::path se = work_dir() / "stderr.txt";
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += std::string(QUADRANGE_CLI_BIN) + " " + args + " >" + so.string() +
         " 2>" + se.string();
  const int st = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = work_dir() / name;
  write_text_atomic(p, content);
  return p;
}

fs::path write_matrix(const std::string& name, const SymMatrix& m) {
  return write_file(name, matrix_to_json(m).dump());
}

}  // namespace

TEST_CASE("numrange identity pair collapses to one point") {
  const fs::path mi = write_matrix("id3.json", SymMatrix::identity(3));
  const fs::path out = work_dir() / "nr_id.json";
  const CliRun r = run_cli("numrange " + mi.string() + " " + mi.string() +
                           " --seed 7 --count 50 --probes 40 --out " +
                           out.string());
  REQUIRE(r.code == 0);
  const json j = parse_json(read_text_file(out), "report");
  REQUIRE(j["schema"] == 1);
  REQUIRE(j["convexity"]["defect"].get<double>() <= 1e-12);
  REQUIRE(j["convexity"]["convex_within_tol"] == true);
  REQUIRE(j["warnings"].empty());
  for (const auto& p : j["sample"]["points"]) {
    REQUIRE(p[0].get<double>() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(p[1].get<double>() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("numrange planar circle pair reports the defect and warns") {
  SymMatrix ex = SymMatrix::zero(2);
  ex.set(0, 1, 1.0);
  const fs::path m1 =
      write_matrix("circ1.json", SymMatrix::diagonal({1.0, -1.0}));
  const fs::path m2 = write_matrix("circ2.json", ex);
  const fs::path out = work_dir() / "nr_circle.json";
  const CliRun r = run_cli("numrange " + m1.string() + " " + m2.string() +
                           " --seed 11 --count 300 --probes 300 --out " +
                           out.string());
  REQUIRE(r.code == 0);
  REQUIRE(r.err.find("dim < 3: convexity not guaranteed") !=
          std::string::npos);
  const json j = parse_json(read_text_file(out), "report");
  REQUIRE(j["warnings"].size() == 1);
  REQUIRE(j["convexity"]["defect"].get<double>() > 0.5);
  REQUIRE(j["convexity"]["convex_within_tol"] == false);
}

TEST_CASE("numrange triple gets a null hull area and a small defect") {
  Rng rng(211);
  const fs::path m1 = write_matrix("t1.json", testutil::random_sym(rng, 4, 0.7));
  const fs::path m2 = write_matrix("t2.json", testutil::random_psd(rng, 4, 0.5));
  const fs::path m3 = write_matrix("t3.json", testutil::random_sym(rng, 4, 0.7));
  const fs::path out = work_dir() / "nr_triple.json";
  // The cone statement is about the full-space image, so sample that.
  const CliRun r =
      run_cli("numrange " + m1.string() + " " + m2.string() + " " +
              m3.string() +
              " --mode full --seed 13 --count 150 --probes 150 --out " +
              out.string());
  REQUIRE(r.code == 0);
  const json j = parse_json(read_text_file(out), "report");
  REQUIRE(j["dims"]["operators"] == 3);
  REQUIRE(j["convexity"]["hull_area"].is_null());
  REQUIRE(j["convexity"]["defect"].get<double>() <= 1e-4);
}

TEST_CASE("numrange flag and file errors") {
  const fs::path mi = write_matrix("id3b.json", SymMatrix::identity(3));
  const fs::path m2 = write_matrix("id2.json", SymMatrix::identity(2));
  // Missing required --seed.
  REQUIRE(run_cli("numrange " + mi.string() + " " + mi.string()).code == 2);
  // Unknown mode value.
  REQUIRE(run_cli("numrange " + mi.string() + " " + mi.string() +
                  " --seed 1 --mode banana")
              .code == 2);
  // Unreadable input file.
  REQUIRE(run_cli("numrange missing.json " + mi.string() + " --seed 1").code ==
          2);
  // Dimension mismatch is its own exit code.
  REQUIRE(run_cli("numrange " + mi.string() + " " + m2.string() + " --seed 1")
              .code == 3);
  // Plot needs exactly two operators.
  REQUIRE(run_cli("numrange " + mi.string() + " " + mi.string() + " " +
                  mi.string() + " --seed 1 --plot " +
                  (work_dir() / "no.svg").string())
              .code == 2);
}

TEST_CASE("numrange plot and csv outputs") {
  const fs::path mi = write_matrix("id3c.json", SymMatrix::identity(3));
  const fs::path svg = work_dir() / "nr.svg";
  const fs::path csv = work_dir() / "nr.csv";
  const CliRun r = run_cli("numrange " + mi.string() + " " + mi.string() +
                           " --seed 3 --count 30 --probes 20 --plot " +
                           svg.string() + " --format csv --out " +
                           csv.string());
  REQUIRE(r.code == 0);
  const std::string svg_text = read_text_file(svg);
  REQUIRE(svg_text.rfind("<svg ", 0) == 0);
  REQUIRE(svg_text.find("class=\"boundary\"") != std::string::npos);
  const std::string csv_text = read_text_file(csv);
  REQUIRE(std::count(csv_text.begin(), csv_text.end(), '\n') == 30);
}

TEST_CASE("pencil certificate and refusal") {
  const fs::path mi = write_matrix("p_id.json", SymMatrix::identity(3));
  const fs::path mz = write_matrix("p_zero.json", SymMatrix::zero(3));
  const fs::path out = work_dir() / "pencil.json";

  CliRun r = run_cli("pencil " + mi.string() + " " + mz.string() + " --out " +
                     out.string());
  REQUIRE(r.code == 0);
  json j = parse_json(read_text_file(out), "report");
  REQUIRE(j["verified"] == true);
  REQUIRE(j["multipliers"][0].get<double>() > 0.9);
  REQUIRE(std::abs(j["multipliers"][1].get<double>()) < 0.1);

  SymMatrix ex = SymMatrix::zero(2);
  ex.set(0, 1, 1.0);
  const fs::path t1 =
      write_matrix("p_t1.json", SymMatrix::diagonal({1.0, -1.0}));
  const fs::path t2 = write_matrix("p_t2.json", ex);
  r = run_cli("pencil " + t1.string() + " " + t2.string() + " --out " +
              out.string());
  REQUIRE(r.code == 1);
  j = parse_json(read_text_file(out), "report");
  REQUIRE(j["verified"] == false);
  REQUIRE(j["evidence"]["achieved"].get<double>() < 0.0);
  REQUIRE(j["evidence"]["indeterminate"] == false);

  // Unequal dimensions get their own exit code.
  const fs::path q1 = write_matrix("p_q1.json", SymMatrix::diagonal({1.0, -1.0, 0.0}));
  r = run_cli("pencil " + q1.string() + " " + t2.string());
  REQUIRE(r.code == 3);
  const fs::path z3 = write_matrix("p_z3.json", SymMatrix::zero(3));
  const fs::path i3 = write_matrix("p_i3.json", SymMatrix::identity(3));
  r = run_cli("pencil " + q1.string() + " " + z3.string() + " " + i3.string() +
              " --three --out " + out.string());
  REQUIRE(r.code == 0);
  j = parse_json(read_text_file(out), "report");
  REQUIRE(j["multipliers"][2].get<double>() > 0.9);
  REQUIRE(run_cli("pencil " + q1.string() + " " + z3.string() + " --three")
              .code == 2);
}

TEST_CASE("counterexample table, summary, and flag validation") {
  const fs::path out = work_dir() / "gap.csv";
  const fs::path svg = work_dir() / "gap.svg";
  const CliRun r =
      run_cli("counterexample --family vanishing --truncations 10,20 --seed 5"
              " --out " +
              out.string() + " --plot " + svg.string());
  REQUIRE(r.code == 0);
  const std::string csv = read_text_file(out);
  REQUIRE(csv.rfind("N,best_residual,witness_norm\n", 0) == 0);
  REQUIRE(csv.find("# all residuals positive: yes") != std::string::npos);

  // Parse the N=10 row and pin the bound residual <= 1/N.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  std::getline(lines, line);
  REQUIRE(line.rfind("10,", 0) == 0);
  const double r10 = std::stod(line.substr(3));
  REQUIRE(r10 > 0.0);
  REQUIRE(r10 <= 0.1 + 1e-9);
  REQUIRE(read_text_file(svg).find("class=\"decay\"") != std::string::npos);

  REQUIRE(run_cli("counterexample --family vanishing --truncations 20,10"
                  " --seed 5")
              .code == 2);
  REQUIRE(run_cli("counterexample --family bogus --truncations 10 --seed 5")
              .code == 2);
  REQUIRE(
      run_cli("counterexample --family convergent --truncations 5,10 --seed 5")
          .code == 0);
}

TEST_CASE("sproc instances over the exit-code contract") {
  Rng rng(223);
  const SymMatrix I3 = SymMatrix::identity(3);

  SProcInstance ident;
  ident.A0 = I3;
  ident.A1 = I3;
  ident.A2 = testutil::random_sym(rng, 3, 0.5);
  ident.alpha0 = 1.0;
  ident.alpha1 = 1.0;
  ident.alpha2 = 1.0;
  ident.slater = {0.0, 0.0, 0.0};
  const fs::path pi =
      write_file("sp_id.json", sproc_instance_to_json(ident).dump());
  const fs::path out = work_dir() / "sp.json";
  CliRun r = run_cli("sproc " + pi.string() + " --out " + out.string());
  REQUIRE(r.code == 0);
  json j = parse_json(read_text_file(out), "report");
  REQUIRE(j["certificate"]["verified"] == true);

  // Slater point on the constraint boundary: hypothesis fails.
  SProcInstance tight = ident;
  tight.slater = {1.0, 0.0, 0.0};
  const fs::path pt =
      write_file("sp_tight.json", sproc_instance_to_json(tight).dump());
  r = run_cli("sproc " + pt.string() + " --out " + out.string());
  REQUIRE(r.code == 5);
  j = parse_json(read_text_file(out), "report");
  REQUIRE(j["error"]["type"] == "HypothesisUnmet");

  // Violated implication: refused with best-effort evidence.
  SProcInstance viol = ident;
  viol.A0 = SymMatrix::diagonal({5.0, 0.0, 0.0});
  viol.alpha0 = 0.5;  // x = 0.9 e1 satisfies both constraints, f0 = 4.05
  const fs::path pv =
      write_file("sp_viol.json", sproc_instance_to_json(viol).dump());
  r = run_cli("sproc " + pv.string() + " --out " + out.string());
  REQUIRE(r.code == 1);
  j = parse_json(read_text_file(out), "report");
  REQUIRE(j["certificate"]["verified"] == false);
  REQUIRE(j["certificate"]["evidence"]["best_value"].get<double>() < 0.0);

  // Equality variant with its negative multiplier.
  SProcInstance eq;
  eq.A0 = SymMatrix::identity(2).scaled_by(-2.0);
  eq.A1 = SymMatrix::zero(2);
  eq.A2 = SymMatrix::identity(2);
  eq.alpha0 = -2.0;
  eq.alpha1 = 1.0;
  eq.alpha2 = 1.0;
  eq.slater = {1.0, 0.0};
  eq.equality = true;
  const fs::path pe =
      write_file("sp_eq.json", sproc_instance_to_json(eq).dump());
  r = run_cli("sproc " + pe.string() + " --out " + out.string());
  REQUIRE(r.code == 0);
  j = parse_json(read_text_file(out), "report");
  REQUIRE(j["certificate"]["multipliers"]["tau2"].get<double>() ==
          Catch::Approx(-2.0).margin(1e-6));
  REQUIRE(j["certificate"]["evidence"]["tau2_sign_unrestricted"] == true);

  // Malformed instance file.
  const fs::path pb = write_file("sp_bad.json", "{\"A0\": 3}");
  REQUIRE(run_cli("sproc " + pb.string()).code == 2);
}

TEST_CASE("slemma instances over the exit-code contract") {
  const fs::path out = work_dir() / "sl.json";
  const std::string interval_phi =
      R"("phi1":{"A":{"n":1,"rows":[[1]]},"a":[0],"b":-1},)"
      R"("phi2":{"A":{"n":1,"rows":[[0]]},"a":[1],"b":0})";

  // F = z1 + 1 on the parabola image: certificate with alpha = 1.
  const fs::path ok = write_file(
      "sl_ok.json",
      R"({"Theta":{"n":2,"rows":[[0,0],[0,0]]},"v":[1,0],"t":-1,)" +
          interval_phi + "}");
  CliRun r = run_cli("slemma " + ok.string() + " --seed 11 --out " +
                     out.string());
  REQUIRE(r.code == 0);
  json j = parse_json(read_text_file(out), "report");
  REQUIRE(j["certificate"]["verified"] == true);
  REQUIRE(j["certificate"]["multipliers"]["alpha"].get<double>() ==
          Catch::Approx(1.0).margin(1e-9));

  // F = z1 dips below zero on the image: counterexample witness.
  const fs::path bad = write_file(
      "sl_bad.json",
      R"({"Theta":{"n":2,"rows":[[0,0],[0,0]]},"v":[1,0],"t":0,)" +
          interval_phi + "}");
  r = run_cli("slemma " + bad.string() + " --seed 11 --out " + out.string());
  REQUIRE(r.code == 1);
  j = parse_json(read_text_file(out), "report");
  REQUIRE(j["certificate"]["verified"] == false);
  REQUIRE(j["certificate"]["evidence"]["criterion_value"].get<double>() <
          -1e-6);

  // Traceless pair has no PD combination: hypothesis unmet.
  const fs::path un = write_file(
      "sl_unmet.json",
      R"({"Theta":{"n":2,"rows":[[1,0],[0,1]]},"v":[0,0],"t":-1,)"
      R"("phi1":{"A":{"n":2,"rows":[[1,0],[0,-1]]},"a":[0,0],"b":0},)"
      R"("phi2":{"A":{"n":2,"rows":[[0,1],[1,0]]},"a":[0,0],"b":0}})");
  REQUIRE(run_cli("slemma " + un.string() + " --seed 11").code == 5);

  // Non-PSD criterion matrix is a format error.
  const fs::path npsd = write_file(
      "sl_npsd.json",
      R"({"Theta":{"n":2,"rows":[[1,0],[0,-1]]},"v":[0,0],"t":0,)" +
          interval_phi + "}");
  REQUIRE(run_cli("slemma " + npsd.string() + " --seed 11").code == 2);

  // Sample floor from the option contract.
  REQUIRE(run_cli("slemma " + ok.string() + " --seed 11 --samples 8").code ==
          2);
}

TEST_CASE("tlsdemo evaluates the ratio objective") {
  const fs::path mz = write_matrix("tls_zero.json", SymMatrix::zero(2));
  const fs::path bz = write_file("tls_bz.json", "[0, 0]");
  const fs::path out = work_dir() / "tls.json";
  CliRun r = run_cli("tlsdemo " + mz.string() + " " + bz.string() +
                     " --rho 0.7 --seed 5 --out " + out.string());
  REQUIRE(r.code == 0);
  json j = parse_json(read_text_file(out), "report");
  REQUIRE(j["best_value"].get<double>() == Catch::Approx(0.0).margin(1e-10));
  REQUIRE(j["certified"] == false);

  REQUIRE(run_cli("tlsdemo " + mz.string() + " " + bz.string() +
                  " --rho 0 --seed 5")
              .code == 2);
  const fs::path b3 = write_file("tls_b3.json", "[0, 0, 0]");
  REQUIRE(run_cli("tlsdemo " + mz.string() + " " + b3.string() +
                  " --rho 1 --seed 5")
              .code == 3);
}

TEST_CASE("tolerance overrides change reported thresholds") {
  const fs::path mi = write_matrix("id3d.json", SymMatrix::identity(3));
  const fs::path out = work_dir() / "tol.json";
  const CliRun r = run_cli("numrange " + mi.string() + " " + mi.string() +
                           " --seed 2 --count 20 --probes 10 --out " +
                           out.string(),
                           "QUADRANGE_TOL_DEFECT=-1");
  REQUIRE(r.code == 0);
  const json j = parse_json(read_text_file(out), "report");
  REQUIRE(j["config"]["tolerances"]["defect"] == -1.0);
  // Defect 0 cannot sit below -1, so the convexity flag flips off.
  REQUIRE(j["convexity"]["convex_within_tol"] == false);

  REQUIRE(run_cli("numrange " + mi.string() + " " + mi.string() + " --seed 2",
                  "QUADRANGE_TOL_BOGUS=1")
              .code == 2);
  REQUIRE(run_cli("numrange " + mi.string() + " " + mi.string() + " --seed 2",
                  "QUADRANGE_TOL_DEFECT=abc")
              .code == 2);
}

TEST_CASE("reports are byte-stable across reruns") {
  const fs::path mi = write_matrix("id3e.json", SymMatrix::identity(3));
  SymMatrix ex = SymMatrix::zero(3);
  ex.set(0, 1, 1.0);
  ex.set(1, 2, -0.5);
  const fs::path mx = write_matrix("mix3.json", ex);
  const fs::path o1 = work_dir() / "rep1.json";
  const fs::path o2 = work_dir() / "rep2.json";
  const std::string args = "numrange " + mi.string() + " " + mx.string() +
                           " --seed 99 --count 80 --probes 60 --out ";
  REQUIRE(run_cli(args + o1.string()).code == 0);
  REQUIRE(run_cli(args + o2.string()).code == 0);
  REQUIRE(read_text_file(o1) == read_text_file(o2));
}
