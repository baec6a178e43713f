#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace resbvp {

struct RunConfig {
  std::string command;  // analyze | check | solve | oracle | example5 | all
  std::string input_path;

  double rank_tol = 1e-10;
  double sign_tol = 1e-10;
  double strict_tol = 1e-9;
  double solve_tol = 1e-10;

  std::optional<double> c;
  std::optional<double> d;
  bool auto_search = false;
  double d_cap = 1e8;
  std::string orientation = "both";  // standard | reversed | both

  std::string method = "main";  // main | same-sign | sublinear | small-linear | landesman-lazer
  std::optional<double> M1, M2, beta, R, g_plus, g_minus;

  int starts = 64;
  std::optional<double> box;
  std::uint64_t seed = 1;
  bool warm = false;

  bool json = false;
  std::string out_path;
  std::string csv_path;
};

/// Exit status: 0 success/PASS, 1 FAIL verdict, 2 input error, 3 numerical error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace resbvp
