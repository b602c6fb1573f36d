#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "quadrange/certs.hpp"
#include "quadrange/io.hpp"
#include "quadrange/numrange.hpp"
#include "quadrange/pencil.hpp"
#include "quadrange/quadmap.hpp"
#include "quadrange/svg.hpp"

namespace {

using namespace quadrange;

// Exit-code contract, used by every subcommand:
//   0 verified artifact, 1 refuted or no certificate, 2 I/O or format error,
//   3 dimension mismatch, 4 inconclusive, 5 hypothesis unmet.
constexpr int kOk = 0;
constexpr int kRefuted = 1;
constexpr int kBadInput = 2;
constexpr int kDimMismatch = 3;
constexpr int kInconclusive = 4;
constexpr int kHypothesis = 5;

// Tolerances the CLI itself applies; overridable via QUADRANGE_TOL_<NAME>.
struct Tolerances {
  double defect = 1e-4;    // numrange: defect at or below counts as convex
  double residual = 0.0;   // counterexample: residual must exceed this
};

extern "C" char** environ;

// Scans the environment rather than probing known names, so a misspelled
// override fails loudly instead of being silently ignored.
bool load_tolerances(Tolerances& tol) {
  for (char** e = environ; *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind("QUADRANGE_TOL_", 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(14, eq - 14);
    const std::string value = entry.substr(eq + 1);
    double parsed = 0.0;
    try {
      std::size_t used = 0;
      parsed = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      std::cerr << "quadrange: bad value for QUADRANGE_TOL_" << name << ": '"
                << value << "'\n";
      return false;
    }
    if (name == "DEFECT") {
      tol.defect = parsed;
    } else if (name == "RESIDUAL") {
      tol.residual = parsed;
    } else {
      std::cerr << "quadrange: unknown override QUADRANGE_TOL_" << name
                << " (known: DEFECT, RESIDUAL)\n";
      return false;
    }
  }
  return true;
}

json tolerances_json(const Tolerances& tol) {
  return json{{"defect", tol.defect}, {"residual", tol.residual}};
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text_atomic(out_path, content);
}

void emit_json(const json& j, const std::string& out_path) {
  emit(j.dump(2) + "\n", out_path);
}

struct NumrangeArgs {
  std::vector<std::string> files;
  std::string mode = "sphere";
  int count = 200;
  int directions = 64;
  int probes = 200;
  std::uint64_t seed = 0;
  std::string plot, out, format = "json";
};

int run_numrange(const NumrangeArgs& a, const Tolerances& tol) {
  std::vector<SymMatrix> ops;
  for (const std::string& f : a.files) ops.push_back(read_matrix(f));
  for (const SymMatrix& m : ops)
    if (m.dim() != ops[0].dim()) {
      std::cerr << "quadrange numrange: operators have unequal dimensions\n";
      return kDimMismatch;
    }
  const int n = ops[0].dim();
  const int k = static_cast<int>(ops.size());
  const SampleKind kind =
      a.mode == "sphere" ? SampleKind::Sphere : SampleKind::FullSpace;

  const RangeSample sample =
      sample_range(std::span<const SymMatrix>(ops), kind, a.count, a.seed);
  const ConvexityReport conv = convexity_defect(
      sample, std::span<const SymMatrix>(ops), a.probes, a.seed + 1);

  std::vector<std::string> warnings;
  if (n < 3) warnings.push_back("dim < 3: convexity not guaranteed");

  if (a.format == "csv") {
    emit(range_sample_to_csv(sample), a.out);
  } else {
    json j;
    j["schema"] = 1;
    j["command"] = "numrange";
    j["config"] = {{"seed", a.seed},           {"mode", a.mode},
                   {"count", a.count},         {"probes", a.probes},
                   {"directions", a.directions}, {"tolerances", tolerances_json(tol)}};
    j["dims"] = {{"n", n}, {"operators", k}};
    j["sample"] = range_sample_to_json(sample);
    json cj;
    cj["defect"] = conv.defect;
    cj["violations"] = conv.violations;
    if (k == 2)
      cj["hull_area"] = conv.hull_area;
    else
      cj["hull_area"] = nullptr;
    cj["convex_within_tol"] = conv.defect <= tol.defect;
    j["convexity"] = cj;
    j["warnings"] = warnings;
    emit_json(j, a.out);
  }

  if (!a.plot.empty()) {
    if (k != 2) {
      std::cerr << "quadrange numrange: --plot requires two operators\n";
      return kBadInput;
    }
    std::vector<Point2> pts;
    for (const Vec& p : sample.points) pts.push_back({p[0], p[1]});
    std::vector<Point2> boundary;
    for (const Vec& p : trace_boundary(ops[0], ops[1], a.directions))
      boundary.push_back({p[0], p[1]});
    write_text_atomic(a.plot, scatter_svg(pts, boundary));
  }
  for (const std::string& w : warnings)
    std::cerr << "quadrange numrange: warning: " << w << "\n";
  return kOk;
}

struct PencilArgs {
  std::vector<std::string> files;
  bool three = false;
  std::string out;
};

int run_pencil(const PencilArgs& a) {
  std::vector<SymMatrix> ops;
  for (const std::string& f : a.files) ops.push_back(read_matrix(f));
  for (const SymMatrix& m : ops)
    if (m.dim() != ops[0].dim()) {
      std::cerr << "quadrange pencil: operators have unequal dimensions\n";
      return kDimMismatch;
    }
  if (a.three != (ops.size() == 3)) {
    std::cerr << "quadrange pencil: --three requires exactly three files\n";
    return kBadInput;
  }

  const PdSearchResult res =
      a.three ? find_pd_combination3(ops[0], ops[1], ops[2])
              : find_pd_combination(ops[0], ops[1]);

  json j;
  j["schema"] = 1;
  j["command"] = "pencil";
  j["kind"] = "pencil";
  if (res.certificate) {
    const PencilCertificate& c = *res.certificate;
    // Re-check definiteness of the certified combination before exiting 0.
    const SymMatrix combo =
        lincomb(std::span<const double>(c.mu), std::span<const SymMatrix>(ops));
    const bool pd =
        classify_definiteness(combo) == Definiteness::PositiveDefinite;
    j["multipliers"] = c.mu;
    j["slacks"] = {{"lambda_min", c.lambda_min}};
    j["verified"] = pd;
    j["evidence"] = {{"witness", c.witness}};
    emit_json(j, a.out);
    return pd ? kOk : kRefuted;
  }
  j["multipliers"] = nullptr;
  j["slacks"] = nullptr;
  j["verified"] = false;
  j["evidence"] = {{"achieved", res.achieved},
                   {"direction", res.direction},
                   {"indeterminate", res.indeterminate}};
  emit_json(j, a.out);
  return kRefuted;
}

struct CounterexampleArgs {
  std::string family = "vanishing";
  std::vector<int> truncations = {10, 20, 40, 80};
  std::uint64_t seed = 0;
  std::string out, plot;
};

int run_counterexample(const CounterexampleArgs& a, const Tolerances& tol) {
  const FamilyKind kind = a.family == "vanishing"
                              ? FamilyKind::VanishingDiag
                              : FamilyKind::ConvergentDiag;
  if (a.truncations.empty()) {
    std::cerr << "quadrange counterexample: empty truncation list\n";
    return kBadInput;
  }
  CounterexampleFamily fam;
  fam.kind = kind;
  fam.N = a.truncations.back();
  const std::vector<GapRow> rows =
      gap_table(fam, a.truncations, {1.0, 1.0}, a.seed);

  bool all_positive = true;
  for (const GapRow& r : rows)
    all_positive = all_positive && r.best_residual > tol.residual;

  std::string csv = gap_table_to_csv(rows);
  csv += std::string("# all residuals positive: ") +
         (all_positive ? "yes" : "no") + "\n";
  emit(csv, a.out);

  if (!a.plot.empty()) write_text_atomic(a.plot, decay_svg(rows));
  return all_positive ? kOk : kRefuted;
}

struct SprocArgs {
  std::string instance;
  std::uint64_t seed = 0;
  std::string out;
};

int run_sproc(const SprocArgs& a) {
  const SProcInstance inst = sproc_instance_from_json(
      parse_json(read_text_file(a.instance), a.instance), a.instance);
  if (inst.A0.dim() != inst.A1.dim() || inst.A0.dim() != inst.A2.dim() ||
      inst.slater.size() != static_cast<std::size_t>(inst.A0.dim())) {
    std::cerr << "quadrange sproc: instance dimensions disagree\n";
    return kDimMismatch;
  }

  json j;
  j["schema"] = 1;
  j["command"] = "sproc";
  j["config"] = {{"seed", a.seed}, {"equality", inst.equality}};
  try {
    const SProcOutcome out =
        inst.equality
            ? solve_sprocedure_eq(inst.A0, inst.A1, inst.A2, inst.alpha0,
                                  inst.alpha1, inst.alpha2, inst.slater)
            : solve_sprocedure(inst.A0, inst.A1, inst.A2, inst.alpha0,
                               inst.alpha1, inst.alpha2, inst.slater);
    j["certificate"] = sproc_outcome_to_json(out);
    emit_json(j, a.out);
    return out.certificate ? kOk : kRefuted;
  } catch (const HypothesisUnmet& e) {
    j["certificate"] = nullptr;
    j["error"] = {{"type", "HypothesisUnmet"}, {"message", e.what()}};
    emit_json(j, a.out);
    return kHypothesis;
  }
}

struct SlemmaArgs {
  std::string instance;
  int samples = 200;
  std::uint64_t seed = 0;
  std::string out;
};

int run_slemma(const SlemmaArgs& a) {
  const SLemmaInstance inst = slemma_instance_from_json(
      parse_json(read_text_file(a.instance), a.instance), a.instance);
  if (inst.phi1.dim() != inst.phi2.dim()) {
    std::cerr << "quadrange slemma: forms have unequal dimensions\n";
    return kDimMismatch;
  }

  json j;
  j["schema"] = 1;
  j["command"] = "slemma";
  j["config"] = {{"seed", a.seed}, {"samples", a.samples}};
  try {
    const SLemmaOutcome out =
        solve_slemma(inst.criterion(), inst.phi1, inst.phi2, a.samples,
                     a.seed);
    j["certificate"] = slemma_outcome_to_json(out);
    emit_json(j, a.out);
    switch (out.kind) {
      case SLemmaKind::Certificate:
        return kOk;
      case SLemmaKind::Counterexample:
        return kRefuted;
      case SLemmaKind::Inconclusive:
        return kInconclusive;
    }
    return kInconclusive;
  } catch (const HypothesisUnmet& e) {
    j["certificate"] = nullptr;
    j["error"] = {{"type", "HypothesisUnmet"}, {"message", e.what()}};
    emit_json(j, a.out);
    return kHypothesis;
  }
}

struct TlsdemoArgs {
  std::string a_file, b_file;
  double rho = 0.0;
  int restarts = 16;
  std::uint64_t seed = 0;
  std::string out;
};

int run_tlsdemo(const TlsdemoArgs& a) {
  if (!(a.rho > 0.0)) {
    std::cerr << "quadrange tlsdemo: --rho must be positive\n";
    return kBadInput;
  }
  const SymMatrix A = read_matrix(a.a_file);
  const Vec b = vec_from_json(
      parse_json(read_text_file(a.b_file), a.b_file), a.b_file);
  if (b.size() != static_cast<std::size_t>(A.dim())) {
    std::cerr << "quadrange tlsdemo: b length does not match A\n";
    return kDimMismatch;
  }
  const int n = A.dim();
  const double rho = a.rho;

  auto G = [&](const Vec& x) {
    const Vec r = vsub(A.apply(x), b);
    const double s = 1.0 + dot(x, x);
    return dot(r, r) / s + rho * dot(x, x);
  };
  auto grad = [&](const Vec& x) {
    const Vec r = vsub(A.apply(x), b);
    const double s = 1.0 + dot(x, x);
    Vec g = scaled(A.apply(r), 2.0 / s);
    axpy(-2.0 * dot(r, r) / (s * s) + 2.0 * rho, x, g);
    return g;
  };

  Rng rng(a.seed);
  DescentOptions opt;
  opt.max_iters = 500;
  Vec best_x(n, 0.0);
  double best = G(best_x);
  for (int s = 0; s < a.restarts; ++s) {
    const Vec start = scaled(rng.gaussian_vec(n),
                             std::pow(10.0, rng.uniform(-1.0, 1.0)));
    const DescentResult dr = gradient_descent(G, grad, start, opt);
    if (dr.value < best) {
      best = dr.value;
      best_x = dr.x;
    }
  }

  json j;
  j["schema"] = 1;
  j["command"] = "tlsdemo";
  j["config"] = {{"seed", a.seed}, {"rho", rho}, {"restarts", a.restarts}};
  j["best_value"] = best;
  j["best_x"] = best_x;
  j["certified"] = false;
  j["note"] =
      "multistart descent evidence only; no optimality certificate is issued";
  emit_json(j, a.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Tolerances tol;
  if (!load_tolerances(tol)) return kBadInput;

  CLI::App app{"joint quadratic range and certificate toolkit"};
  app.require_subcommand(1);
  int code = kOk;

  NumrangeArgs na;
  CLI::App* nr = app.add_subcommand(
      "numrange", "sample a joint range and measure its convexity defect");
  nr->add_option("files", na.files, "matrix files (2 or 3)")
      ->expected(2, 3)
      ->required();
  nr->add_option("--mode", na.mode, "sphere or full")
      ->check(CLI::IsMember({"sphere", "full"}));
  nr->add_option("--count", na.count, "sample count")->check(CLI::PositiveNumber);
  nr->add_option("--directions", na.directions, "boundary directions")
      ->check(CLI::Range(8, 100000));
  nr->add_option("--probes", na.probes, "convexity probes")
      ->check(CLI::PositiveNumber);
  nr->add_option("--seed", na.seed, "random seed")->required();
  nr->add_option("--plot", na.plot, "SVG output path");
  nr->add_option("--out", na.out, "report path (stdout when absent)");
  nr->add_option("--format", na.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  nr->callback([&] { code = run_numrange(na, tol); });

  PencilArgs pa;
  CLI::App* pc = app.add_subcommand(
      "pencil", "search for a positive definite combination");
  pc->add_option("files", pa.files, "matrix files (2 or 3)")
      ->expected(2, 3)
      ->required();
  pc->add_flag("--three", pa.three, "three-matrix pencil");
  pc->add_option("--out", pa.out, "report path (stdout when absent)");
  pc->callback([&] { code = run_pencil(pa); });

  CounterexampleArgs ca;
  CLI::App* cx = app.add_subcommand(
      "counterexample", "residual gap table for a non-closed image family");
  cx->add_option("--family", ca.family, "vanishing or convergent")
      ->check(CLI::IsMember({"vanishing", "convergent"}));
  cx->add_option("--truncations", ca.truncations,
                 "ascending truncation sizes")
      ->delimiter(',');
  cx->add_option("--seed", ca.seed, "random seed")->required();
  cx->add_option("--out", ca.out, "CSV path (stdout when absent)");
  cx->add_option("--plot", ca.plot, "decay SVG path");
  cx->callback([&] { code = run_counterexample(ca, tol); });

  SprocArgs sa;
  CLI::App* sp = app.add_subcommand(
      "sproc", "two-constraint s-procedure multiplier search");
  sp->add_option("instance", sa.instance, "instance JSON file")->required();
  sp->add_option("--seed", sa.seed, "echoed into the report");
  sp->add_option("--out", sa.out, "report path (stdout when absent)");
  sp->callback([&] { code = run_sproc(sa); });

  SlemmaArgs la;
  CLI::App* sl = app.add_subcommand(
      "slemma", "planar criterion certificate over a joint image");
  sl->add_option("instance", la.instance, "instance JSON file")->required();
  sl->add_option("--samples", la.samples, "image samples")
      ->check(CLI::Range(16, 1000000));
  sl->add_option("--seed", la.seed, "random seed")->required();
  sl->add_option("--out", la.out, "report path (stdout when absent)");
  sl->callback([&] { code = run_slemma(la); });

  TlsdemoArgs ta;
  CLI::App* td = app.add_subcommand(
      "tlsdemo", "regularized ratio objective, descent demo only");
  td->add_option("matrix", ta.a_file, "matrix file")->required();
  td->add_option("rhs", ta.b_file, "right-hand side JSON array file")
      ->required();
  td->add_option("--rho", ta.rho, "regularization weight")->required();
  td->add_option("--restarts", ta.restarts, "descent restarts")
      ->check(CLI::PositiveNumber);
  td->add_option("--seed", ta.seed, "random seed")->required();
  td->add_option("--out", ta.out, "report path (stdout when absent)");
  td->callback([&] { code = run_tlsdemo(ta); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  } catch (const IoError& e) {
    std::cerr << "quadrange: " << e.what() << "\n";
    return kBadInput;
  } catch (const InvalidInput& e) {
    std::cerr << "quadrange: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    std::cerr << "quadrange: " << e.what() << "\n";
    return kBadInput;
  }
  return code;
}
