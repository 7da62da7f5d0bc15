#include "ipmlab/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace ipmlab {

using json = nlohmann::json;

namespace {

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::corrected: return "corrected";
    case Mode::uncorrected: return "uncorrected";
    case Mode::exact: return "exact";
  }
  return "?";
}

std::string solver_name(SolverKind s) {
  switch (s) {
    case SolverKind::pcg: return "pcg";
    case SolverKind::direct: return "direct";
    case SolverKind::perturb: return "perturb";
  }
  return "?";
}

void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw InputError(where + ": non-finite number");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  const double v = j.get<double>();
  require_finite(v, where);
  return v;
}

Index count(const json& obj, const char* key) {
  if (!obj.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
  const json& j = obj.at(key);
  if (!j.is_number_integer() || j.get<long long>() < 1)
    throw InputError(std::string("\"") + key + "\" must be a positive integer");
  return static_cast<Index>(j.get<long long>());
}

Vector<double> vector_field(const json& obj, const std::string& key, Index size) {
  if (!obj.contains(key)) throw InputError("missing field \"" + key + "\"");
  const json& j = obj.at(key);
  if (!j.is_array()) throw InputError("\"" + key + "\" must be an array");
  if (static_cast<Index>(j.size()) != size)
    throw InputError("\"" + key + "\" has length " + std::to_string(j.size()) +
                     ", expected " + std::to_string(size));
  Vector<double> v(size);
  for (Index i = 0; i < size; ++i)
    v(i) = number(j[static_cast<std::size_t>(i)], key + "[" + std::to_string(i) + "]");
  return v;
}

DenseMatrix<double> matrix_field(const json& obj, Index m, Index n) {
  if (!obj.contains("a")) throw InputError("missing field \"a\"");
  const json& a = obj.at("a");
  DenseMatrix<double> out = DenseMatrix<double>::Zero(m, n);
  if (a.is_array()) {
    if (static_cast<Index>(a.size()) != m)
      throw InputError("\"a\" has " + std::to_string(a.size()) + " rows, expected " +
                       std::to_string(m));
    for (Index i = 0; i < m; ++i) {
      const json& row = a[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Index>(row.size()) != n)
        throw InputError("row " + std::to_string(i) + " of \"a\" must have " +
                         std::to_string(n) + " entries");
      for (Index j = 0; j < n; ++j)
        out(i, j) = number(row[static_cast<std::size_t>(j)],
                           "a[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    return out;
  }
  if (!a.is_object() || a.value("format", "") != "coo")
    throw InputError("\"a\" must be an array of rows or {\"format\": \"coo\", ...}");
  for (const char* key : {"rows", "cols", "vals"})
    if (!a.contains(key) || !a.at(key).is_array())
      throw InputError(std::string("coo \"a\" needs array \"") + key + "\"");
  const json &rows = a.at("rows"), &cols = a.at("cols"), &vals = a.at("vals");
  if (rows.size() != cols.size() || rows.size() != vals.size())
    throw InputError("coo arrays rows, cols and vals differ in length");
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (!rows[t].is_number_integer() || !cols[t].is_number_integer())
      throw InputError("coo index " + std::to_string(t) + " is not an integer");
    const long long i = rows[t].get<long long>(), j = cols[t].get<long long>();
    if (i < 0 || i >= m || j < 0 || j >= n)
      throw InputError("coo entry " + std::to_string(t) + " out of range");
    out(i, j) += number(vals[t], "vals[" + std::to_string(t) + "]");
  }
  return out;
}

json vec_json(const Vector<double>& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = line_column(text, offset);
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at line ...: " prefix.
    if (const auto p = msg.find(": syntax error"); p != std::string::npos)
      msg = msg.substr(p + 2);
    throw InputError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + msg,
                     line, col);
  }
}

void csv_number(std::ostream& os, double v) {
  if (std::isnan(v))
    os << "nan";
  else
    os << v;
}

}  // namespace

std::pair<std::size_t, std::size_t> line_column(const std::string& text,
                                                std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

LpFile parse_lp(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw InputError("LP document must be a JSON object");
  if (doc.contains("schema_version")) {
    const json& v = doc.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != kLpSchemaVersion)
      throw InputError("unsupported schema_version (expected " +
                       std::to_string(kLpSchemaVersion) + ")");
  } else {
    throw InputError("missing field \"schema_version\"");
  }
  const Index m = count(doc, "m"), n = count(doc, "n");
  LpFile f;
  f.lp.a = matrix_field(doc, m, n);
  f.lp.b = vector_field(doc, "b", m);
  f.lp.c = vector_field(doc, "c", n);
  if (doc.contains("init") && !doc.at("init").is_null()) {
    const json& init = doc.at("init");
    if (!init.is_object()) throw InputError("\"init\" must be an object");
    PrimalDualPoint<double> pt;
    pt.x = vector_field(init, "x", n);
    pt.y = vector_field(init, "y", m);
    pt.s = vector_field(init, "s", n);
    try {
      require_interior(pt);
    } catch (const LeftInteriorError& e) {
      throw InputError(std::string("init is not strictly interior: ") + e.what());
    }
    f.init = std::move(pt);
  }
  if (doc.contains("provenance") && doc.at("provenance").is_object()) {
    const json& p = doc.at("provenance");
    if (p.contains("generator") && p.at("generator").is_string())
      f.generator = p.at("generator").get<std::string>();
    if (p.contains("seed") && p.at("seed").is_number_unsigned())
      f.seed = p.at("seed").get<std::uint64_t>();
  }
  return f;
}

LpFile load_lp(const std::string& path) { return parse_lp(read_file(path)); }

std::string lp_to_json(const LpFile& f) {
  if (f.lp.b.size() != f.lp.m() || f.lp.c.size() != f.lp.n())
    throw DimensionError("b or c does not match A");
  if (f.init) check_dimensions(f.lp, *f.init);
  json doc;
  doc["schema_version"] = kLpSchemaVersion;
  doc["m"] = f.lp.m();
  doc["n"] = f.lp.n();
  json rows = json::array();
  for (Index i = 0; i < f.lp.m(); ++i) rows.push_back(vec_json(f.lp.a.row(i).transpose()));
  doc["a"] = std::move(rows);
  doc["b"] = vec_json(f.lp.b);
  doc["c"] = vec_json(f.lp.c);
  if (f.init) doc["init"] = {{"x", vec_json(f.init->x)},
                             {"y", vec_json(f.init->y)},
                             {"s", vec_json(f.init->s)}};
  if (f.generator || f.seed) {
    json p = json::object();
    if (f.generator) p["generator"] = *f.generator;
    if (f.seed) p["seed"] = *f.seed;
    doc["provenance"] = std::move(p);
  }
  return doc.dump() + "\n";
}

void save_lp(const std::string& path, const LpFile& f) { write_file(path, lp_to_json(f)); }

std::string solution_to_json(const SolveOutcome<double>& out, const IpmConfig& cfg) {
  json doc;
  doc["converged"] = out.converged;
  doc["mode"] = mode_name(cfg.mode);
  doc["solver"] = solver_name(cfg.solver);
  doc["epsilon"] = cfg.epsilon;
  doc["tolerance"] = out.tolerance;
  doc["seed"] = cfg.seed;
  doc["outer_iterations"] = out.outer_iterations;
  doc["mu"] = out.residuals.duality_measure;
  doc["residuals"] = {{"primal", out.residuals.primal_infeasibility},
                      {"dual", out.residuals.dual_infeasibility},
                      {"mu", out.residuals.duality_measure}};
  doc["x"] = vec_json(out.point.x);
  doc["y"] = vec_json(out.point.y);
  doc["s"] = vec_json(out.point.s);
  doc["monitor_violations"] = out.trace.monitor_violations;
  return doc.dump(1) + "\n";
}

PrimalDualPoint<double> parse_solution_point(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw InputError("solution document must be a JSON object");
  for (const char* key : {"x", "y", "s"})
    if (!doc.contains(key) || !doc.at(key).is_array())
      throw InputError(std::string("solution is missing array \"") + key + "\"");
  PrimalDualPoint<double> pt;
  pt.x = vector_field(doc, "x", static_cast<Index>(doc.at("x").size()));
  pt.y = vector_field(doc, "y", static_cast<Index>(doc.at("y").size()));
  pt.s = vector_field(doc, "s", static_cast<Index>(doc.at("s").size()));
  return pt;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  os << std::setprecision(17);
  os << "k,mu,alpha,backtracks,tolerance,predictor_inner,corrector_inner,"
        "predictor_matvecs,corrector_matvecs,predictor_v_norm,corrector_v_norm,"
        "predictor_pinv_f,corrector_pinv_f,predictor_cross,predictor_cross_bound,"
        "corrector_cross,corrector_cross_bound,predictor_distance_bound,"
        "corrector_distance_bound,mu_identity_error,predictor_mu,predictor_distance,"
        "predictor_member,mu_next,corrector_distance,corrector_member,tolerances_hold,"
        "near_boundary,recurrence_holds,primal_infeas,dual_infeas\n";
  for (const auto& r : trace.records) {
    os << r.k << ',';
    for (double v : {r.mu, r.alpha}) csv_number(os, v), os << ',';
    os << r.backtracks << ',';
    csv_number(os, r.tolerance);
    os << ',' << r.predictor_inner << ',' << r.corrector_inner << ','
       << r.predictor_matvecs << ',' << r.corrector_matvecs << ',';
    for (double v : {r.predictor_v_norm, r.corrector_v_norm, r.predictor_pinv_f,
                     r.corrector_pinv_f, r.predictor_cross, r.predictor_cross_bound,
                     r.corrector_cross, r.corrector_cross_bound,
                     r.predictor_distance_bound, r.corrector_distance_bound,
                     r.mu_identity_error, r.predictor_mu, r.predictor_distance})
      csv_number(os, v), os << ',';
    os << int(r.predictor_member) << ',';
    csv_number(os, r.mu_next);
    os << ',';
    csv_number(os, r.corrector_distance);
    os << ',' << int(r.corrector_member) << ',' << int(r.tolerances_hold) << ','
       << int(r.near_boundary) << ',' << int(r.recurrence_holds) << ',';
    csv_number(os, r.primal_infeasibility);
    os << ',';
    csv_number(os, r.dual_infeasibility);
    os << '\n';
  }
}

void write_trials_csv(std::ostream& os, const ExperimentResult& res) {
  os << std::setprecision(17);
  os << "regressor,n,m,eps,seed,outer_iters,primal_infeas,dual_infeas,mean_inner_iters,"
        "converged\n";
  for (const auto& t : res.trials) {
    os << t.regressor << ',' << t.n << ',' << t.m << ',' << t.eps << ',' << t.seed << ','
       << t.outer_iters << ',' << t.primal_infeas << ',' << t.dual_infeas << ','
       << t.mean_inner_iters << ',' << int(t.converged) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const ExperimentResult& res) {
  os << std::setprecision(17);
  os << "regressor,n,eps,median,q10,q90,mean_primal_infeas,mean_inner_iters,failures,"
        "trials,flagged,slope,intercept,pearson_r,fit_degenerate\n";
  for (const auto& g : res.grid) {
    os << g.regressor << ',' << g.n << ',' << g.eps << ',' << g.median << ',' << g.q10
       << ',' << g.q90 << ',' << g.mean_primal_infeas << ',' << g.mean_inner_iters << ','
       << g.failures << ',' << g.trials << ',' << int(g.flagged) << ',' << res.fit.slope
       << ',' << res.fit.intercept << ',' << res.fit.pearson_r << ','
       << int(res.fit.degenerate) << '\n';
  }
}

std::string record_to_json(const ReductionRecord<double>& rec) {
  json doc;
  doc["kind"] = rec.kind == ReductionKind::dual_split ? "dual" : "lowrank";
  doc["original_m"] = rec.original_m;
  doc["original_n"] = rec.original_n;
  doc["kept_rows"] = rec.kept_rows;
  if (rec.z) {
    json rows = json::array();
    for (Index i = 0; i < rec.z->rows(); ++i) rows.push_back(vec_json(rec.z->row(i).transpose()));
    doc["z"] = std::move(rows);
  }
  return doc.dump(1) + "\n";
}

ReductionRecord<double> parse_record(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw InputError("reduction record must be a JSON object");
  ReductionRecord<double> rec;
  const std::string kind = doc.value("kind", "");
  if (kind == "dual")
    rec.kind = ReductionKind::dual_split;
  else if (kind == "lowrank")
    rec.kind = ReductionKind::low_rank;
  else
    throw InputError("record \"kind\" must be \"dual\" or \"lowrank\"");
  rec.original_m = count(doc, "original_m");
  rec.original_n = count(doc, "original_n");
  if (doc.contains("kept_rows")) {
    for (const auto& v : doc.at("kept_rows")) {
      if (!v.is_number_integer()) throw InputError("kept_rows must hold integers");
      rec.kept_rows.push_back(static_cast<Index>(v.get<long long>()));
    }
  }
  if (doc.contains("z")) {
    const json& z = doc.at("z");
    if (!z.is_array() || z.empty() || !z[0].is_array())
      throw InputError("\"z\" must be an array of rows");
    const Index rows = static_cast<Index>(z.size()), cols = static_cast<Index>(z[0].size());
    DenseMatrix<double> mz(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      const json& row = z[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Index>(row.size()) != cols)
        throw InputError("\"z\" rows differ in length");
      for (Index j = 0; j < cols; ++j)
        mz(i, j) = number(row[static_cast<std::size_t>(j)], "z");
    }
    rec.z = std::move(mz);
  }
  return rec;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
  if (!out) throw InputError("write failed for " + path);
}

}  // namespace ipmlab
