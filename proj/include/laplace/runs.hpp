#pragma once

#include "laplace/builtins.hpp"
#include "laplace/coefficients.hpp"
#include "laplace/json_io.hpp"
#include "laplace/oracle.hpp"
#include "laplace/remainder.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace laplace {

inline constexpr const char* kReportSchemaVersion = "1.0.0";

// Fully resolved settings of one CLI run; echoed verbatim into every report.
struct RunConfig {
  std::string subcommand = "expand";  // expand | bound | verify | quartic | glm | chaos
  // problem source: exactly one of builtin / problem_path
  std::string builtin;
  std::string problem_path;
  int d = 2;
  double n = 64.0;
  int L = 1;
  std::string g = "constant";
  std::uint64_t seed = 1;
  std::string link = "logistic";  // glm

  std::string coeff_method = "auto";  // auto | explicit | mc
  std::size_t coeff_samples = 1'000'000;

  double R = 0.0;  // 0 selects the default radius
  double tau = 1.0;
  bool refined = false;

  bool oracle = false;  // expand only; verify and glm always run it
  std::string oracle_mode = "auto";
  double oracle_tol = 1e-9;
  std::size_t oracle_budget = 1'000'000;
  std::vector<double> sweep_n;

  std::vector<int> Ls{1, 2, 3};  // quartic
  std::vector<int> dims{2, 4, 8};
  std::vector<double> n_factors{16.0, 64.0, 256.0};

  std::vector<int> chaos_dims{2, 4, 8, 16};
  std::string chaos_tensor = "e1-complement";  // e1-complement | e1-identity | ones
  int chaos_q = 4;
  std::size_t chaos_samples = 200'000;
  int restricted_d = 16;
  double restricted_n = 4096.0;
  std::vector<double> restricted_R{1.0, 2.0, 4.0, 8.0};

  int threads = 0;
  std::string out;  // JSON path, empty for stdout
  std::string csv;  // CSV path, "-" for stdout

  Json to_json() const;
  void validate() const;
};

struct RunOutcome {
  Json report;
  std::string csv;  // empty when the subcommand has no table
  int exit_code = 0;
  std::vector<std::string> log;
};

RunOutcome run_expand(const RunConfig& cfg);
RunOutcome run_bound(const RunConfig& cfg);
RunOutcome run_verify(const RunConfig& cfg);
RunOutcome run_quartic(const RunConfig& cfg);
RunOutcome run_glm(const RunConfig& cfg);
RunOutcome run_chaos(const RunConfig& cfg);
RunOutcome run(const RunConfig& cfg);

// Pieces shared by the subcommands.
ProblemInput resolve_problem(const RunConfig& cfg);
std::vector<CoefficientResult> expansion_terms(const ProblemInput& in, const RunConfig& cfg);
Json coefficient_to_json(const CoefficientResult& c, double n);
Json oracle_to_json(const OracleResult& r);
Json true_remainder_to_json(const TrueRemainder& t);

// log of (2 pi / n)^{d/2} e^{-n u(x0)} / sqrt(det H): converts normalized values to raw integrals.
double log_prefactor(const ProblemSpec& p);

// sym(e1 (x) I), whose cubic form is x1 ||x||^2 with operator norm 1.
SymTensor e1_identity_tensor(int d);
// Every entry equal to 1 / d^{3/2}.
SymTensor ones_tensor(int d);
// sym(e1 (x) (I - e1 e1^T)): cubic form x1 (x2^2 + ... + xd^2), operator norm 2/(3 sqrt 3).
SymTensor e1_complement_tensor(int d);
SymTensor chaos_tensor(const std::string& kind, int d);
double chaos_tensor_norm(const std::string& kind);

}  // namespace laplace
