#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "resbvp/conditions.hpp"
#include "resbvp/core.hpp"
#include "resbvp/linear.hpp"
#include "resbvp/oracle.hpp"
#include "resbvp/solver.hpp"

namespace resbvp {

using json = nlohmann::ordered_json;

/// Problem document:
///
///     { "n": 2, "N": 8, "m": 2,
///       "a": [1, [1, 1, 1, 1, 1, 1, 1, 1]],       // a[j] scalar or length-N array
///       "B": [[[1,0],[0,0]], ...],                 // N+1 matrices, nested or flat row-major
///       "g": "sin(x) + 0.1*t" }
///
/// Throws Error(Input) on schema violations and ParseError on a bad g.
ProblemSpec problem_from_json(const json& doc);
json problem_to_json(const ProblemSpec& spec);

ProblemSpec load_problem(const std::string& path);
void save_problem(const ProblemSpec& spec, const std::string& path);

/// Serializes with every float printed as %.17g, so equal inputs give equal
/// bytes and decimal round trips are exact. Non-finite floats become null.
std::string dump(const json& doc, int indent = 2);

json to_json(const Vec& v);
json to_json(const Mat& M);
json to_json(const GridFunction& f);  // list of per-time vectors

json report_json(const LinearAnalysis& la);
json report_json(const ConditionReport& rep);
json report_json(const SolveResult& res);
json report_json(const std::vector<MultistartSolution>& sols, const FullSystem& fs);

/// Writes "t,y" lines for t = 0..len-1.
void write_csv(const ScalarTrajectory& y, const std::string& path);

}  // namespace resbvp
