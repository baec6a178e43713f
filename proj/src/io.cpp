#include "resbvp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace resbvp {

namespace {

[[noreturn]] void schema(const std::string& what) {
  throw Error(ErrorKind::Input, "problem file: " + what);
}

double number_at(const json& v, const std::string& where) {
  if (!v.is_number()) schema(where + " must be a number");
  return v.get<double>();
}

int integer_at(const json& doc, const char* key) {
  if (!doc.contains(key)) schema(std::string("missing field '") + key + "'");
  const json& v = doc.at(key);
  if (!v.is_number_integer()) schema(std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

Mat matrix_at(const json& v, int n, const std::string& where) {
  Mat M(n, n);
  if (!v.is_array()) schema(where + " must be an array");
  if (static_cast<int>(v.size()) == n * n && v[0].is_number()) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = number_at(v[static_cast<std::size_t>(i * n + j)], where);
    return M;
  }
  if (static_cast<int>(v.size()) != n) schema(where + " must be n x n");
  for (int i = 0; i < n; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) schema(where + " must be n x n");
    for (int j = 0; j < n; ++j) M(i, j) = number_at(row[static_cast<std::size_t>(j)], where);
  }
  return M;
}

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write_value(std::string& out, const json& v, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write_value(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(v.begin(), v.end(), [](const json& e) {
        return e.is_array() || e.is_object();
      });
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write_value(out, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      write_number(out, v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

json sets_json(const SignSets& s) {
  return json{{"O++", s.opp}, {"O+-", s.opm}, {"O-+", s.omp}, {"O--", s.omm},
              {"O0", s.o0},   {"O", s.o},     {"ambiguous", s.ambiguous}};
}

}  // namespace

ProblemSpec problem_from_json(const json& doc) {
  if (!doc.is_object()) schema("top level must be an object");
  const int n = integer_at(doc, "n");
  const int N = integer_at(doc, "N");
  const int m = integer_at(doc, "m");
  if (n < 1 || N < 3) schema("need n >= 1 and N >= 3");

  if (!doc.contains("a") || !doc.at("a").is_array()) schema("'a' must be an array of n entries");
  const json& ja = doc.at("a");
  if (static_cast<int>(ja.size()) != n) schema("'a' must have n entries");
  Mat a(n, N);
  for (int j = 0; j < n; ++j) {
    const json& row = ja[static_cast<std::size_t>(j)];
    const std::string where = "a[" + std::to_string(j) + "]";
    if (row.is_number()) {
      a.row(j).setConstant(row.get<double>());
    } else if (row.is_array() && static_cast<int>(row.size()) == N) {
      for (int t = 0; t < N; ++t) a(j, t) = number_at(row[static_cast<std::size_t>(t)], where);
    } else {
      schema(where + " must be a number or an array of length N");
    }
  }

  if (!doc.contains("B") || !doc.at("B").is_array()) schema("'B' must be an array");
  const json& jb = doc.at("B");
  if (static_cast<int>(jb.size()) != N + 1) schema("'B' must hold N+1 matrices");
  std::vector<Mat> B;
  for (int k = 0; k <= N; ++k) {
    B.push_back(matrix_at(jb[static_cast<std::size_t>(k)], n, "B[" + std::to_string(k) + "]"));
  }

  Expr g;
  if (doc.contains("g")) {
    if (!doc.at("g").is_string()) schema("'g' must be a string");
    g = Expr::parse(doc.at("g").get<std::string>());
  }
  return ProblemSpec(n, N, m, std::move(a), std::move(B), std::move(g));
}

json problem_to_json(const ProblemSpec& spec) {
  json a = json::array();
  for (int j = 0; j < spec.n(); ++j) a.push_back(to_json(Vec(spec.a().row(j).transpose())));
  json B = json::array();
  for (const auto& Bk : spec.B()) B.push_back(to_json(Bk));
  return json{{"n", spec.n()}, {"N", spec.N()}, {"m", spec.m()},
              {"a", a},        {"B", B},        {"g", spec.g().str()}};
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Input, "cannot open problem file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, "problem file '" + path + "' is not valid JSON: " + e.what());
  }
  return problem_from_json(doc);
}

void save_problem(const ProblemSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Input, "cannot write '" + path + "'");
  out << dump(problem_to_json(spec)) << '\n';
}

std::string dump(const json& doc, int indent) {
  std::string out;
  write_value(out, doc, indent, 0);
  return out;
}

json to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json to_json(const Mat& M) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) arr.push_back(to_json(Vec(M.row(i).transpose())));
  return arr;
}

json to_json(const GridFunction& f) {
  json arr = json::array();
  for (int t = 0; t < f.size(); ++t) arr.push_back(to_json(Vec(f[t])));
  return arr;
}

json report_json(const LinearAnalysis& la) {
  json phi = json::array();
  for (const auto& P : la.Phi) phi.push_back(to_json(P));
  return json{{"n", la.n},
              {"N", la.N},
              {"m", la.m},
              {"Lambda", to_json(la.Lambda)},
              {"lambda_singular_values", to_json(la.lambda_singular_values)},
              {"kernel_threshold", la.kernel_threshold},
              {"u", to_json(la.u)},
              {"w", to_json(la.w)},
              {"S", to_json(la.S)},
              {"Psi", to_json(la.Psi)},
              {"A_bar", la.A_bar},
              {"A_probe", la.A_probe},
              {"max_phi_condition", la.max_phi_condition},
              {"Phi", phi},
              {"warnings", la.warnings}};
}

json report_json(const ConditionReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back(json{{"name", c.name}, {"passed", c.passed}, {"lhs", c.lhs},
                          {"rhs", c.rhs},   {"detail", c.detail}});
  }
  json values = json::object();
  for (const auto& [k, v] : rep.values) values[k] = v;
  const Certificate& ce = rep.cert;
  json cert{{"c", ce.c},
            {"d", ce.d},
            {"orientation", to_string(ce.orientation)},
            {"indices", ce.indices},
            {"K1", to_json(ce.K1)},
            {"K2", to_json(ce.K2)},
            {"J1", ce.J1},
            {"J2", ce.J2},
            {"s_max", ce.s_max},
            {"s_min", ce.s_min},
            {"g_sup_d", ce.g_sup_d},
            {"A_bar", ce.A_bar},
            {"margin", ce.margin}};
  json out{{"verdict", rep.verdict()}, {"passed", rep.passed}, {"method", rep.method}};
  if (!rep.passed) out["failed"] = rep.failed;
  out["certificate"] = cert;
  out["sets"] = sets_json(rep.sets);
  out["checks"] = checks;
  out["values"] = values;
  out["notes"] = rep.notes;
  return out;
}

json report_json(const SolveResult& res) {
  json hist = json::array();
  for (const auto& h : res.history) hist.push_back(json::array({h.alpha, h.value}));
  return json{{"alpha", res.alpha},
              {"y", to_json(res.y)},
              {"v", to_json(res.v)},
              {"recurrence_residual", res.recurrence_residual},
              {"boundary_residual", res.boundary_residual},
              {"aux_iterations", res.aux_iterations},
              {"bisection_steps", res.bisection_steps},
              {"bracket", json::array({res.alpha_lo, res.alpha_hi, res.B_lo, res.B_hi})},
              {"history", hist},
              {"notes", res.notes}};
}

json report_json(const std::vector<MultistartSolution>& sols, const FullSystem& fs) {
  json arr = json::array();
  for (const auto& s : sols) {
    const Vec r = fs.residual(s.y);
    const int N = fs.spec().N();
    arr.push_back(json{{"start_index", s.start_index},
                       {"iterations", s.iterations},
                       {"residual", s.residual},
                       {"recurrence_residual", r.head(N).cwiseAbs().maxCoeff()},
                       {"boundary_residual", r.tail(fs.spec().n()).cwiseAbs().maxCoeff()},
                       {"y", to_json(s.y)}});
  }
  return json{{"count", sols.size()}, {"solutions", arr}};
}

void write_csv(const ScalarTrajectory& y, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Input, "cannot write '" + path + "'");
  out << "t,y\n";
  char buf[64];
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g\n", static_cast<long long>(t), y(t));
    out << buf;
  }
}

}  // namespace resbvp
