#include "ipmlab/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "ipmlab/io.hpp"

namespace ipmlab {

namespace {

struct SolveArgs {
  std::string input;
  std::string mode = "corrected";
  std::string solver = "pcg";
  double eps = 0.1;
  double zeta = 0.5;
  double eta = 0.2;
  Index sketch_cols = 0;
  double c_w = 1.0;
  double c_s = 1.0;
  std::uint64_t seed = 0;
  double delta = 0;
  Index max_outer = 0;
  Index max_inner = 0;
  bool verify = false;
  bool gen_start = false;
  std::string trace;
  std::string out;
};

struct GenArgs {
  Index m = 20;
  Index n = 100;
  std::uint64_t seed = 0;
  std::string out;
};

struct ExperimentArgs {
  int figure = 1;
  Index reps = 60;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
};

struct ReduceArgs {
  std::string input;
  std::string kind;
  Index rank = 0;
  std::uint64_t seed = 0;
  double shift = 1.0;
  std::string out;
  std::string record;
};

struct MapbackArgs {
  std::string record;
  std::string solution;
  std::string out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  if (a.m > a.n)
    throw InvalidArgumentError(
        "m > n is not short-and-fat; generate the transposed problem and run "
        "`ipm_lab reduce --kind dual`");
  const auto inst = generate_synthetic_lp<double>(a.m, a.n, a.seed);
  LpFile f{inst.lp, inst.start, std::string("synthetic"), a.seed};
  const std::string text = lp_to_json(f);
  if (a.out.empty())
    out << text;
  else
    write_file(a.out, text);
  return kExitOk;
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  LpFile f = load_lp(a.input);
  validate(f.lp);
  if (!f.init) {
    if (!a.gen_start)
      throw InvalidStartError(
          "the LP file has no \"init\" start point; regenerate it with `ipm_lab gen` "
          "or pass --gen-start");
    f.init = construct_start(f.lp);
  }
  IpmConfig cfg;
  cfg.epsilon = a.eps;
  cfg.mode = a.mode == "uncorrected" ? Mode::uncorrected
             : a.mode == "exact"     ? Mode::exact
                                     : Mode::corrected;
  cfg.solver = a.solver == "direct"    ? SolverKind::direct
               : a.solver == "perturb" ? SolverKind::perturb
                                       : SolverKind::pcg;
  cfg.zeta = a.zeta;
  cfg.eta = a.eta;
  cfg.sketch_cols = a.sketch_cols;
  cfg.c_w = a.c_w;
  cfg.c_s = a.c_s;
  cfg.seed = a.seed;
  cfg.max_outer = a.max_outer;
  cfg.max_inner = a.max_inner;
  cfg.verify_with_direct = a.verify;
  if (a.delta > 0) cfg.delta = a.delta;

  const auto res = run(f.lp, *f.init, cfg);
  if (!a.out.empty()) write_file(a.out, solution_to_json(res, cfg));
  if (!a.trace.empty()) {
    std::ofstream os(a.trace);
    if (!os) throw InputError("cannot write " + a.trace);
    write_trace_csv(os, res.trace);
  }

  out << std::setprecision(6);
  out << "status: " << (res.converged ? "converged" : "iteration limit reached") << "\n"
      << "outer iterations: " << res.outer_iterations << "\n"
      << "mu: " << res.residuals.duality_measure << "\n"
      << "primal infeasibility: " << res.residuals.primal_infeasibility;
  if (cfg.mode == Mode::uncorrected)
    out << (res.residuals.primal_infeasibility < cfg.epsilon ? " (< eps)" : " (>= eps)");
  out << "\n"
      << "dual infeasibility: " << res.residuals.dual_infeasibility << "\n"
      << "solver tolerance: " << res.tolerance << "\n";
  if (res.trace.monitor_violations > 0)
    out << "monitor violations: " << res.trace.monitor_violations << "\n";
  return res.converged ? kExitOk : kExitNoConvergence;
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  ExperimentPlan plan = plan_for_figure(a.figure, a.reps, a.seed);
  plan.threads = a.threads;
  const ExperimentResult res = run_experiment(plan);
  const std::string prefix = a.out.empty() ? "figure" + std::to_string(a.figure) : a.out;
  {
    std::ofstream os(prefix + "_trials.csv");
    if (!os) throw InputError("cannot write " + prefix + "_trials.csv");
    write_trials_csv(os, res);
  }
  {
    std::ofstream os(prefix + "_summary.csv");
    if (!os) throw InputError("cannot write " + prefix + "_summary.csv");
    write_summary_csv(os, res);
  }
  out << std::setprecision(4);
  out << "figure " << a.figure << ", " << a.reps << " reps\n";
  for (const auto& g : res.grid) {
    out << "  n=" << g.n << " eps=" << g.eps << " median=" << g.median << " q10=" << g.q10
        << " q90=" << g.q90 << " inner=" << g.mean_inner_iters
        << " failures=" << g.failures << (g.flagged ? " FLAGGED" : "") << "\n";
  }
  out << "fit: slope=" << res.fit.slope << " intercept=" << res.fit.intercept
      << " r=" << res.fit.pearson_r << (res.fit.degenerate ? " (degenerate)" : "") << "\n";
  out << "wrote " << prefix << "_trials.csv and " << prefix << "_summary.csv\n";
  return res.flagged ? kExitNoConvergence : kExitOk;
}

int cmd_reduce(const ReduceArgs& a, std::ostream& out) {
  LpFile f = load_lp(a.input);
  LpFile reduced;
  ReductionRecord<double> rec;
  if (a.kind == "dual") {
    auto [lp, r] = dual_reformulate(f.lp);
    reduced.lp = std::move(lp);
    rec = std::move(r);
    if (f.init) {
      auto [adjusted, start] =
          dual_split_start(reduced.lp, rec, f.init->x, f.init->y, f.init->s, a.shift);
      reduced.lp = std::move(adjusted);
      reduced.init = std::move(start);
    }
  } else {
    if (a.rank < 1) throw InvalidArgumentError("--kind lowrank needs --rank k >= 1");
    auto [lp, r] = low_rank_reduce(f.lp, a.rank, a.seed);
    reduced.lp = std::move(lp);
    rec = std::move(r);
    if (f.init) reduced.init = low_rank_start(reduced.lp, *f.init);
  }
  reduced.generator = "reduce-" + a.kind;
  write_file(a.out, lp_to_json(reduced));
  write_file(a.record, record_to_json(rec));
  out << "reduced " << f.lp.m() << "x" << f.lp.n() << " to " << reduced.lp.m() << "x"
      << reduced.lp.n() << "\n";
  return kExitOk;
}

int cmd_mapback(const MapbackArgs& a, std::ostream& out) {
  const auto rec = parse_record(read_file(a.record));
  const auto pt = parse_solution_point(read_file(a.solution));
  const auto mapped = map_back(rec, pt);
  std::ostringstream doc;
  doc << std::setprecision(17) << "{\n \"x\": [";
  auto dump = [&doc](const Vector<double>& v) {
    for (Index i = 0; i < v.size(); ++i) doc << (i ? ", " : "") << v(i);
  };
  dump(mapped.x);
  doc << "],\n \"y\": [";
  dump(mapped.y);
  doc << "],\n \"s\": [";
  dump(mapped.s);
  doc << "]\n}\n";
  if (a.out.empty())
    out << doc.str();
  else
    write_file(a.out, doc.str());
  return kExitOk;
}

}  // namespace

PrimalDualPoint<double> construct_start(const LinearProgram<double>& lp) {
  const Index m = lp.m(), n = lp.n();
  const SpdFactor<double> gram(DenseMatrix<double>(lp.a * lp.a.transpose()));
  PrimalDualPoint<double> pt;
  pt.x = lp.a.transpose() * gram.solve(lp.b);
  if (pt.x.minCoeff() <= 0) {
    const Vector<double> ones = Vector<double>::Ones(n);
    const Vector<double> z = ones - lp.a.transpose() * gram.solve(lp.a * ones);
    double t = 0;
    for (Index j = 0; j < n; ++j) {
      if (pt.x(j) > 0) continue;
      if (z(j) <= 1e-12)
        throw InvalidStartError("could not construct a strictly positive x; supply init");
      t = std::max(t, (1.0 - pt.x(j)) / z(j));
    }
    pt.x += t * z;
    if (pt.x.minCoeff() <= 0)
      throw InvalidStartError("could not construct a strictly positive x; supply init");
  }
  if (lp.c.minCoeff() <= 0)
    throw InvalidStartError("--gen-start needs c > 0 for its dual start; supply init");
  pt.y = Vector<double>::Zero(m);
  pt.s = lp.c;

  try {
    return center(lp, pt);
  } catch (const InvalidStartError&) {
    throw InvalidStartError("centering did not reach N2(0.25); supply init");
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inexact predictor-corrector interior point methods for LPs", "ipm_lab"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic LP with a central start");
  g->add_option("--m", gen.m, "Rows")->check(CLI::PositiveNumber);
  g->add_option("--n", gen.n, "Columns")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Seed");
  g->add_option("--out", gen.out, "Output LP JSON (stdout if omitted)");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve an LP file");
  s->add_option("input", solve.input, "LP JSON file")->required();
  s->add_option("--mode", solve.mode)
      ->check(CLI::IsMember({"corrected", "uncorrected", "exact"}));
  s->add_option("--solver", solve.solver)->check(CLI::IsMember({"pcg", "direct", "perturb"}));
  s->add_option("--eps", solve.eps)->check(CLI::PositiveNumber);
  s->add_option("--zeta", solve.zeta)->check(CLI::Range(0.0, 1.0));
  s->add_option("--eta", solve.eta)->check(CLI::Range(0.0, 1.0));
  s->add_option("--sketch-cols", solve.sketch_cols, "Sketch width override (0: formula)");
  s->add_option("--c-w", solve.c_w)->check(CLI::PositiveNumber);
  s->add_option("--c-s", solve.c_s)->check(CLI::PositiveNumber);
  s->add_option("--seed", solve.seed);
  s->add_option("--delta", solve.delta, "Solver tolerance override");
  s->add_option("--max-outer", solve.max_outer);
  s->add_option("--max-inner", solve.max_inner);
  s->add_flag("--verify", solve.verify, "Also run direct solves to monitor (AD)+f");
  s->add_flag("--gen-start", solve.gen_start, "Construct a start when the file has none");
  s->add_option("--trace", solve.trace, "Per-iteration CSV");
  s->add_option("--out", solve.out, "Solution JSON");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run a figure experiment");
  e->add_option("--figure", exp.figure)->required()->check(CLI::Range(1, 4));
  e->add_option("--reps", exp.reps)->check(CLI::PositiveNumber);
  e->add_option("--seed", exp.seed, "Seed base");
  e->add_option("--threads", exp.threads);
  e->add_option("--out", exp.out, "Output prefix for _trials.csv and _summary.csv");

  ReduceArgs red;
  auto* r = app.add_subcommand("reduce", "Reduce to a short-and-fat full-rank LP");
  r->add_option("input", red.input, "LP JSON file")->required();
  r->add_option("--kind", red.kind)->required()->check(CLI::IsMember({"dual", "lowrank"}));
  r->add_option("--rank", red.rank);
  r->add_option("--seed", red.seed);
  r->add_option("--shift", red.shift, "Dual-split offset for the start")
      ->check(CLI::PositiveNumber);
  r->add_option("--out", red.out, "Reduced LP JSON")->required();
  r->add_option("--record", red.record, "Reduction record JSON")->required();

  MapbackArgs mb;
  auto* mbc = app.add_subcommand("mapback", "Map a reduced solution back");
  mbc->add_option("--record", mb.record)->required();
  mbc->add_option("--solution", mb.solution)->required();
  mbc->add_option("--out", mb.out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInput;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (s->parsed()) return cmd_solve(solve, out);
    if (e->parsed()) return cmd_experiment(exp, out);
    if (r->parsed()) return cmd_reduce(red, out);
    if (mbc->parsed()) return cmd_mapback(mb, out);
  } catch (const InputError& ex) {
    err << "input error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const ConvergenceError& ex) {
    err << "no convergence: " << ex.what() << "\n";
    return kExitNoConvergence;
  } catch (const NumericalError& ex) {
    err << "numerical failure: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace ipmlab
