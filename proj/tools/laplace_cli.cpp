#include "laplace/runs.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using laplace::RunConfig;

void add_common(CLI::App* s, RunConfig& cfg) {
  s->add_option("--seed", cfg.seed, "Seed for every stochastic path")->capture_default_str();
  s->add_option("--threads", cfg.threads, "Worker cap (0: hardware concurrency)")
      ->envname("LAPLACE_THREADS")
      ->capture_default_str();
  s->add_option("--out", cfg.out, "Write the JSON report here instead of stdout");
  s->add_option("--csv", cfg.csv, "Write the CSV table here ('-' prints it to stdout instead of the JSON)");
}

void add_oracle(CLI::App* s, RunConfig& cfg) {
  s->add_option("--oracle-mode", cfg.oracle_mode, "auto, deterministic or mc")->capture_default_str();
  s->add_option("--oracle-tol", cfg.oracle_tol, "Deterministic absolute tolerance")->capture_default_str();
  s->add_option("--oracle-budget", cfg.oracle_budget, "MC sample budget")->capture_default_str();
  s->add_option("--sweep-n", cfg.sweep_n, "Repeat for each n and emit the sweep CSV")->delimiter(',');
}

void add_problem(CLI::App* s, RunConfig& cfg) {
  auto* b = s->add_option("--builtin", cfg.builtin, "quartic, gaussian, stirling1d, glm-logistic or glm-quadratic");
  auto* p = s->add_option("--problem", cfg.problem_path, "Problem JSON (builtin parameters or explicit jets)");
  b->excludes(p);
  s->add_option("--d", cfg.d, "Dimension")->capture_default_str();
  s->add_option("--n", cfg.n, "Sample size / large parameter")->capture_default_str();
  s->add_option("--L", cfg.L, "Expansion order")->capture_default_str();
  s->add_option("--g", cfg.g, "Prefactor g: constant, linear or quadratic")->capture_default_str();
  s->add_option("--coeff-method", cfg.coeff_method, "auto, explicit or mc")->capture_default_str();
  s->add_option("--coeff-samples", cfg.coeff_samples, "Samples for MC coefficients")->capture_default_str();
  s->add_option("--R", cfg.R, "Radius R (0: default rule)")->capture_default_str();
  s->add_option("--tau", cfg.tau, "Growth parameter tau")->capture_default_str();
  s->add_flag("--refined", cfg.refined, "Use the refined odd-order alpha ladder");
}

int emit(const RunConfig& cfg, const laplace::RunOutcome& out) {
  for (const auto& line : out.log) std::cerr << line << "\n";
  const std::string json = out.report.dump(2) + "\n";
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) throw std::runtime_error("out: cannot write '" + cfg.out + "'");
    f << json;
  }
  if (cfg.csv == "-") {
    std::cout << out.csv;
  } else {
    if (!cfg.csv.empty()) {
      std::ofstream f(cfg.csv);
      if (!f) throw std::runtime_error("csv: cannot write '" + cfg.csv + "'");
      f << out.csv;
    }
    if (cfg.out.empty()) std::cout << json;
  }
  if (out.exit_code == 2) std::cerr << "oracle result inconclusive: error exceeds 25% of the remainder\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laplace expansion terms, remainder certificates and oracle checks"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* expand = app.add_subcommand("expand", "Expansion terms and remainder certificate");
  add_problem(expand, cfg);
  add_common(expand, cfg);
  add_oracle(expand, cfg);
  expand->add_flag("--oracle", cfg.oracle, "Also measure the true remainder");

  auto* bound = app.add_subcommand("bound", "Remainder certificate and growth-condition checks");
  add_problem(bound, cfg);
  add_common(bound, cfg);

  auto* verify = app.add_subcommand("verify", "Expansion plus oracle-measured true remainder");
  add_problem(verify, cfg);
  add_common(verify, cfg);
  add_oracle(verify, cfg);

  auto* quartic = app.add_subcommand("quartic", "Quartic tightness table");
  add_common(quartic, cfg);
  quartic->add_option("--Ls", cfg.Ls, "Orders L")->delimiter(',')->capture_default_str();
  quartic->add_option("--dims", cfg.dims, "Dimensions")->delimiter(',')->capture_default_str();
  quartic->add_option("--n-factors", cfg.n_factors, "n = factor * d^2")->delimiter(',')->capture_default_str();

  auto* glm = app.add_subcommand("glm", "GLM certificate, A2 and oracle comparison");
  add_common(glm, cfg);
  add_oracle(glm, cfg);
  glm->add_option("--d", cfg.d, "Dimension")->capture_default_str();
  glm->add_option("--n", cfg.n, "Number of design rows")->capture_default_str();
  glm->add_option("--L", cfg.L, "Expansion order")->capture_default_str();
  glm->add_option("--g", cfg.g, "Prefactor g: constant, linear or quadratic")->capture_default_str();
  glm->add_option("--link", cfg.link, "logistic or quadratic")->capture_default_str();
  glm->add_option("--R", cfg.R, "Radius R (0: default rule)")->capture_default_str();
  glm->add_option("--coeff-method", cfg.coeff_method, "auto, explicit or mc")->capture_default_str();

  auto* chaos = app.add_subcommand("chaos", "Gaussian chaos moments and restricted-exponential bounds");
  add_common(chaos, cfg);
  chaos->add_option("--dims", cfg.chaos_dims, "Dimensions")->delimiter(',')->capture_default_str();
  chaos->add_option("--tensor", cfg.chaos_tensor, "e1-complement, e1-identity or ones")->capture_default_str();
  chaos->add_option("--q", cfg.chaos_q, "Moment order")->capture_default_str();
  chaos->add_option("--samples", cfg.chaos_samples, "MC samples per point")->capture_default_str();
  chaos->add_option("--restricted-d", cfg.restricted_d, "Dimension of the restricted-exponential check")
      ->capture_default_str();
  chaos->add_option("--restricted-n", cfg.restricted_n, "n of the restricted-exponential check")->capture_default_str();
  chaos->add_option("--restricted-R", cfg.restricted_R, "Radii")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  for (auto* s : app.get_subcommands()) cfg.subcommand = s->get_name();
  try {
    return emit(cfg, laplace::run(cfg));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
