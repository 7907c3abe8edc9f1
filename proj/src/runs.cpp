#include "laplace/runs.hpp"

#include "laplace/glm.hpp"
#include "laplace/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace laplace {

namespace {

const std::vector<std::string> kSubcommands{"expand", "bound", "verify", "quartic", "glm", "chaos"};

bool needs_problem(const std::string& s) { return s == "expand" || s == "bound" || s == "verify"; }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

OracleOptions oracle_options(const RunConfig& cfg) {
  OracleOptions o;
  o.mode = parse_oracle_mode(cfg.oracle_mode);
  o.tol = cfg.oracle_tol;
  o.budget = cfg.oracle_budget;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  return o;
}

double resolved_radius(const RunConfig& cfg, int d, double n, int L) {
  return cfg.R > 0.0 ? cfg.R : radius_default(d, n, L);
}

struct Profiles {
  DerivNormProfile p0, pR;
};

Profiles profiles_for(const ProblemInput& in, int L, double R) {
  if (in.builtin == "quartic" && in.g == "constant")
    return {quartic_profile(in.d, in.n, 0.0, L), quartic_profile(in.d, in.n, R, L)};
  if (in.builtin == "stirling") {
    // |u^(k)(x)| = (k-1)!/(1+x)^k, largest at x = -rho; infinite once the ball leaves (-1, inf)
    auto make = [&](double r) {
      DerivNormProfile p;
      p.r = r;
      p.method = "analytic";
      p.c.assign(static_cast<std::size_t>(2 * L + 3), 0.0);
      p.cg.assign(static_cast<std::size_t>(2 * L + 1), 0.0);
      p.cg[0] = 1.0;
      const double rho = r / std::sqrt(in.n);
      for (int k = 3; k <= 2 * L + 2; ++k)
        p.c[static_cast<std::size_t>(k)] = rho < 1.0 ? std::tgamma(k) / std::pow(1.0 - rho, k)
                                                     : std::numeric_limits<double>::infinity();
      return p;
    };
    return {make(0.0), make(R)};
  }
  if (in.spec) {
    Profiles p;
    p.p0 = deriv_norms(*in.spec, 0.0, L);
    p.pR = deriv_norms(*in.spec, R, L, {}, &p.p0);
    return p;
  }
  DerivNormProfile j = jet_profile(in.jet, L);
  DerivNormProfile jR = j;
  jR.r = R;
  return {j, jR};
}

std::vector<std::string> caveats_for(const RemainderCertificate& c) {
  std::vector<std::string> out;
  out.push_back("implied constants C_L are not tracked; kernels use C_L = 1 and are meaningful up to scaling");
  if (c.profile0.method == "sampled" || c.profileR.method == "sampled")
    out.push_back("derivative norms are sampled lower bounds of a supremum; the certificate is not rigorous");
  if (!std::isfinite(c.kappa_kernel))
    out.push_back("kappa kernel overflows (unbounded norms on the radius-R ball or a huge exponent factor); "
                  "the certificate is vacuous at this (d, n, R)");
  if (c.profileR.method == "jet")
    out.push_back("jets only: c_k(R) is taken equal to c_k(0)");
  return out;
}

Json problem_json(const ProblemInput& in) {
  Json j{{"name", in.builtin.empty() ? std::string("jets") : in.builtin}, {"d", in.d}, {"n", in.n}, {"L", in.L}};
  j["g"] = in.g;
  j["evaluable"] = in.spec.has_value();
  j["envelope"] = in.spec ? in.spec->envelope : false;
  return j;
}

double g_at_x0(const ProblemInput& in) {
  if (in.spec) return in.spec->g(std::span<const double>(in.spec->x0.data(), static_cast<std::size_t>(in.d)));
  return in.jet.f(0).values()[0];
}

Json base_report(const RunConfig& cfg) {
  return Json{{"schema_version", kReportSchemaVersion}, {"kind", cfg.subcommand}, {"config", cfg.to_json()}};
}

std::vector<double> term_values(const std::vector<CoefficientResult>& cs, double n) {
  std::vector<double> out;
  for (const auto& c : cs) out.push_back(c.value * std::pow(n, -c.k / 2));
  return out;
}

const char* kSweepHeader = "d,n,L,epsilon,kappa_kernel,tauL_kernel,tauUc,true_remainder,ci_low,ci_high\n";

std::string sweep_row(const RemainderCertificate& c, const TrueRemainder& t) {
  return std::to_string(c.d) + "," + fmt(c.n) + "," + std::to_string(c.L) + "," + fmt(c.epsilon) + "," +
         fmt(c.kappa_kernel) + "," + fmt(c.tauL_kernel) + "," + fmt(c.tauUc_bound) + "," + fmt(t.rem) + "," +
         fmt(t.lo) + "," + fmt(t.hi) + "\n";
}

struct VerifyPoint {
  Json report;
  std::string row;
  bool inconclusive = false;
};

// Expansion, certificate and oracle truth for one problem.
VerifyPoint verify_point(const RunConfig& cfg, const ProblemInput& in, const RemainderCertificate& cert) {
  if (!in.spec) throw std::invalid_argument("verify needs an evaluable problem: jets alone cannot be integrated");
  const auto cs = expansion_terms(in, cfg);
  const OracleResult o = integrate_reference(*in.spec, oracle_options(cfg));
  const TrueRemainder t = true_remainder(g_at_x0(in), in.L, o, term_values(cs, in.n));
  VerifyPoint v;
  v.report = Json{{"oracle", oracle_to_json(o)}, {"true_remainder", true_remainder_to_json(t)}};
  v.row = sweep_row(cert, t);
  v.inconclusive = t.inconclusive;
  return v;
}

}  // namespace

Json RunConfig::to_json() const {
  Json j{{"subcommand", subcommand}, {"seed", seed}, {"threads", threads}};
  if (needs_problem(subcommand) || subcommand == "glm") {
    if (!problem_path.empty())
      j["problem_path"] = problem_path;
    else
      j["builtin"] = subcommand == "glm" ? "glm-" + link : builtin;
    j["d"] = d;
    j["n"] = n;
    j["L"] = L;
    j["g"] = g;
    j["coeff_method"] = coeff_method;
    j["coeff_samples"] = coeff_samples;
    j["R"] = R;
    j["tau"] = tau;
    j["refined"] = refined;
    j["oracle"] = Json{{"enabled", oracle || subcommand == "verify" || subcommand == "glm"},
                       {"mode", oracle_mode},
                       {"tol", oracle_tol},
                       {"budget", oracle_budget}};
    j["sweep_n"] = sweep_n;
  }
  if (subcommand == "quartic") {
    j["Ls"] = Ls;
    j["dims"] = dims;
    j["n_factors"] = n_factors;
  }
  if (subcommand == "chaos") {
    j["chaos"] = Json{{"dims", chaos_dims}, {"tensor", chaos_tensor}, {"q", chaos_q}, {"samples", chaos_samples}};
    j["restricted"] = Json{{"d", restricted_d}, {"n", restricted_n}, {"R", restricted_R}};
  }
  return j;
}

void RunConfig::validate() const {
  if (std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) == kSubcommands.end())
    throw std::invalid_argument("subcommand: unknown value '" + subcommand + "'");
  if (L < 1) throw std::invalid_argument("L: must be at least 1");
  if (needs_problem(subcommand) && builtin.empty() == problem_path.empty())
    throw std::invalid_argument("problem source: give exactly one of --builtin or --problem");
  if (!(n > 0.0)) throw std::invalid_argument("n: must be positive");
  if (d < 1) throw std::invalid_argument("d: must be at least 1");
  if (coeff_method != "auto" && coeff_method != "explicit" && coeff_method != "mc")
    throw std::invalid_argument("coeff-method: expected auto, explicit or mc");
  parse_oracle_mode(oracle_mode);
  if (!(oracle_tol > 0.0)) throw std::invalid_argument("oracle-tol: must be positive");
  if (R < 0.0) throw std::invalid_argument("R: must be non-negative");
  if (!(tau > 0.0)) throw std::invalid_argument("tau: must be positive");
  for (double v : sweep_n)
    if (!(v > 0.0)) throw std::invalid_argument("sweep-n: values must be positive");
  chaos_tensor_norm(chaos_tensor);
  if (chaos_tensor != "e1-complement" && chaos_tensor != "e1-identity" && chaos_tensor != "ones")
    throw std::invalid_argument("tensor: expected e1-complement, e1-identity or ones");
  if (chaos_q < 1) throw std::invalid_argument("q: must be at least 1");
}

ProblemInput resolve_problem(const RunConfig& cfg) {
  if (!cfg.problem_path.empty()) {
    std::ifstream f(cfg.problem_path);
    if (!f) throw std::invalid_argument("problem: cannot open '" + cfg.problem_path + "'");
    Json doc;
    try {
      doc = Json::parse(f);
    } catch (const Json::parse_error& e) {
      throw std::invalid_argument("problem: invalid JSON in '" + cfg.problem_path + "': " + e.what());
    }
    return load_problem(doc);
  }
  BuiltinRequest r;
  r.name = cfg.builtin;
  r.d = cfg.d;
  r.n = cfg.n;
  r.L = cfg.L;
  r.g = cfg.g;
  r.seed = cfg.seed;
  return make_builtin(r);
}

std::vector<CoefficientResult> expansion_terms(const ProblemInput& in, const RunConfig& cfg) {
  std::vector<CoefficientResult> out;
  McOptions mc;
  mc.samples = cfg.coeff_samples;
  mc.seed = cfg.seed;
  mc.threads = cfg.threads;
  for (int k = 2; k <= 2 * (in.L - 1); k += 2) {
    if (cfg.coeff_method == "mc") {
      out.push_back(coeff_mc(in.jet, k, mc));
      continue;
    }
    try {
      out.push_back(in.exact_jet ? coeff_explicit(*in.exact_jet, k) : coeff_explicit(in.jet, k));
    } catch (const EnumerationTooLarge&) {
      if (cfg.coeff_method == "explicit") throw;
      out.push_back(coeff_mc(in.jet, k, mc));
    }
  }
  return out;
}

Json coefficient_to_json(const CoefficientResult& c, double n) {
  Json j{{"k", c.k}, {"A", c.value}, {"term", c.value * std::pow(n, -c.k / 2)}, {"method", c.method}};
  if (c.method == "mc") j["stderr"] = c.mc_stderr;
  if (c.exact) j["exact"] = c.exact->get_str();
  return j;
}

Json oracle_to_json(const OracleResult& r) {
  Json j{{"value", r.value},     {"error", r.error},           {"method", r.method},
         {"budget_spent", r.budget_spent}, {"heuristic_tail", r.heuristic_tail}, {"converged", r.converged},
         {"warnings", r.warnings}};
  j["tail_bound"] = std::isfinite(r.tail_bound) ? Json(r.tail_bound) : Json(nullptr);
  j["box"] = std::isfinite(r.box) ? Json(r.box) : Json(nullptr);
  return j;
}

Json true_remainder_to_json(const TrueRemainder& t) {
  return Json{{"L", t.L},
              {"integral", t.integral},
              {"partial_sum", t.partial_sum},
              {"rem", t.rem},
              {"ci", Json::array({t.lo, t.hi})},
              {"inconclusive", t.inconclusive}};
}

double log_prefactor(const ProblemSpec& p) {
  const double u0 = p.u(std::span<const double>(p.x0.data(), static_cast<std::size_t>(p.d)));
  const double logdet_inv_sqrt = Eigen::MatrixXd(p.H.inv_sqrt()).ldlt().vectorD().array().log().sum();
  // det H = det(H^{-1/2})^{-2}
  return 0.5 * p.d * std::log(2.0 * std::numbers::pi / p.n) - p.n * u0 + logdet_inv_sqrt;
}

SymTensor e1_identity_tensor(int d) {
  return symmetrize(3, d, [](std::span<const int> t) { return (t[0] == 0 && t[1] == t[2]) ? 1.0 : 0.0; });
}

SymTensor e1_complement_tensor(int d) {
  return symmetrize(3, d, [](std::span<const int> t) { return (t[0] == 0 && t[1] == t[2] && t[1] != 0) ? 1.0 : 0.0; });
}

double chaos_tensor_norm(const std::string& kind) {
  // sup over the unit sphere of t (1 - t^2), attained at t = 1/sqrt 3
  return kind == "e1-complement" ? 2.0 / (3.0 * std::sqrt(3.0)) : 1.0;
}

SymTensor chaos_tensor(const std::string& kind, int d) {
  if (kind == "ones") return ones_tensor(d);
  if (kind == "e1-identity") return e1_identity_tensor(d);
  if (kind == "e1-complement") return e1_complement_tensor(d);
  throw std::invalid_argument("tensor: expected e1-complement, e1-identity or ones");
}

SymTensor ones_tensor(int d) {
  SymTensor t(3, d);
  for (auto& v : t.values()) v = std::pow(static_cast<double>(d), -1.5);
  return t;
}

RunOutcome run_expand(const RunConfig& cfg) {
  cfg.validate();
  const ProblemInput in = resolve_problem(cfg);
  const double R = resolved_radius(cfg, in.d, in.n, in.L);
  const auto cs = expansion_terms(in, cfg);
  const Profiles pr = profiles_for(in, in.L, R);
  const RemainderCertificate cert = certificate(pr.p0, pr.pR, in.d, in.n, in.L, R, false, cfg.refined);
  RunOutcome out;
  Json& rep = out.report = base_report(cfg);
  rep["config"]["problem"] = in.echo;
  rep["config"]["R"] = R;
  rep["problem"] = problem_json(in);
  const double g0 = g_at_x0(in);
  rep["g0"] = g0;
  rep["epsilon"] = cert.epsilon;
  rep["R"] = R;
  Json terms = Json::array();
  double partial = g0;
  for (const auto& c : cs) {
    terms.push_back(coefficient_to_json(c, in.n));
    partial += c.value * std::pow(in.n, -c.k / 2);
  }
  rep["terms"] = terms;
  rep["partial_sum"] = partial;
  rep["certificate"] = certificate_to_json(cert);
  rep["caveats"] = caveats_for(cert);
  out.csv = coefficients_csv(cs);
  if (in.spec) {
    const double lp = log_prefactor(*in.spec);
    rep["log_prefactor"] = lp;
    if (partial > 0.0) rep["raw_log_integral_estimate"] = lp + std::log(partial);
  }
  if (cfg.oracle) {
    const VerifyPoint v = verify_point(cfg, in, cert);
    rep["oracle"] = v.report["oracle"];
    rep["true_remainder"] = v.report["true_remainder"];
    if (in.spec && v.report["oracle"]["value"].get<double>() > 0.0)
      rep["raw_log_integral_oracle"] = log_prefactor(*in.spec) + std::log(v.report["oracle"]["value"].get<double>());
    if (v.inconclusive) out.exit_code = 2;
  }
  for (const auto& c : rep["caveats"]) out.log.push_back("caveat: " + c.get<std::string>());
  return out;
}

RunOutcome run_bound(const RunConfig& cfg) {
  cfg.validate();
  const ProblemInput in = resolve_problem(cfg);
  const double R = resolved_radius(cfg, in.d, in.n, in.L);
  const Profiles pr = profiles_for(in, in.L, R);
  const RemainderCertificate cert = certificate(pr.p0, pr.pR, in.d, in.n, in.L, R, false, cfg.refined);
  const GrowthReport g = check_growth_conditions(pr.p0, pr.pR, in.d, in.n, in.L, cfg.tau, R);
  RunOutcome out;
  Json& rep = out.report = base_report(cfg);
  rep["config"]["problem"] = in.echo;
  rep["config"]["R"] = R;
  rep["problem"] = problem_json(in);
  rep["epsilon"] = cert.epsilon;
  rep["R"] = R;
  rep["certificate"] = certificate_to_json(cert);
  rep["growth"] = growth_to_json(g);
  rep["caveats"] = caveats_for(cert);
  for (const auto& c : rep["caveats"]) out.log.push_back("caveat: " + c.get<std::string>());
  if (!g.ok) out.log.push_back("growth conditions violated with unit constants");
  return out;
}

RunOutcome run_verify(const RunConfig& cfg) {
  cfg.validate();
  RunConfig base = cfg;
  base.oracle = true;
  RunOutcome out = run_expand(base);
  if (!cfg.sweep_n.empty()) {
    if (!cfg.problem_path.empty()) throw std::invalid_argument("sweep-n: sweeps need a builtin problem");
    Json rows = Json::array();
    std::string csv = kSweepHeader;
    bool inconclusive = false;
    for (double n : cfg.sweep_n) {
      RunConfig c = cfg;
      c.n = n;
      const ProblemInput in = resolve_problem(c);
      const double R = resolved_radius(c, in.d, in.n, in.L);
      const Profiles pr = profiles_for(in, in.L, R);
      const RemainderCertificate cert = certificate(pr.p0, pr.pR, in.d, in.n, in.L, R, false, cfg.refined);
      const VerifyPoint v = verify_point(c, in, cert);
      csv += v.row;
      inconclusive = inconclusive || v.inconclusive;
      rows.push_back(Json{{"n", n},
                          {"epsilon", cert.epsilon},
                          {"kappa_kernel", cert.kappa_kernel},
                          {"tauL_kernel", cert.tauL_kernel},
                          {"tauUc_bound", cert.tauUc_bound},
                          {"true_remainder", v.report["true_remainder"]}});
    }
    out.report["sweep"] = rows;
    out.csv = csv;
    if (inconclusive) out.exit_code = 2;
  }
  return out;
}

RunOutcome run_quartic(const RunConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<int, double>> grid;
  for (int d : cfg.dims)
    for (double f : cfg.n_factors) grid.emplace_back(d, f * d * d);
  const TightnessTable t = tightness_experiment(cfg.Ls, grid);
  RunOutcome out;
  Json& rep = out.report = base_report(cfg);
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back(Json{{"L", r.L},
                        {"d", r.d},
                        {"n", r.n},
                        {"eps2", r.eps2},
                        {"rem", r.rem},
                        {"error", r.error},
                        {"ratio", r.ratio},
                        {"precision", r.precision}});
  Json sum = Json::array();
  for (const auto& s : t.summary)
    sum.push_back(Json{{"L", s.L}, {"band", s.band}, {"slope", s.slope}, {"band_ok", s.band_ok}, {"slope_ok", s.slope_ok}});
  rep["rows"] = rows;
  rep["summary"] = sum;
  Json coeffs = Json::array();
  for (int d : cfg.dims)
    for (int k = 1; k <= 3; ++k)
      coeffs.push_back(Json{{"d", d}, {"k", 2 * k}, {"exact", quartic_coeff<Rational>(k, d).get_str()}});
  rep["coefficients"] = coeffs;
  out.csv = tightness_csv(t);
  return out;
}

RunOutcome run_glm(const RunConfig& cfg) {
  cfg.validate();
  const LinkKind link = parse_link(cfg.link);
  if (cfg.n != std::floor(cfg.n)) throw std::invalid_argument("n: glm needs an integer sample size");
  const GBuiltin g = parse_g_builtin(cfg.g);
  RunOutcome out;
  Json& rep = out.report = base_report(cfg);
  std::vector<double> ns = cfg.sweep_n.empty() ? std::vector<double>{cfg.n} : cfg.sweep_n;
  std::string csv = kSweepHeader;
  Json points = Json::array();
  bool inconclusive = false;
  for (double n : ns) {
    if (n != std::floor(n)) throw std::invalid_argument("sweep-n: glm needs integer sample sizes");
    auto inst = std::make_shared<const GlmInstance>(make_glm_instance(static_cast<int>(n), cfg.d, cfg.seed, link));
    RunConfig c = cfg;
    c.n = n;
    c.builtin = "glm-" + cfg.link;
    c.problem_path.clear();
    const ProblemInput in = resolve_problem(c);
    const double R = resolved_radius(cfg, cfg.d, n, cfg.L);
    const GlmNormProfile prof = empirical_norm_profile(inst, 2 * cfg.L + 2, R, cfg.L, g);
    const RemainderCertificate cert = certificate(prof.profile0, prof.profileR, cfg.d, n, cfg.L, R, false, cfg.refined);
    const VerifyPoint v = verify_point(c, in, cert);
    const double a2_formula = glm_a2(*inst, g_jet(g, cfg.d));
    Json pt{{"n", n},
            {"lambda_min", prof.lambda_min},
            {"A2_formula", a2_formula},
            {"A2_explicit", coeff_explicit(in.jet, 2).value},
            {"certificate", certificate_to_json(cert)},
            {"oracle", v.report["oracle"]},
            {"true_remainder", v.report["true_remainder"]},
            {"caveats", caveats_for(cert)}};
    pt["terms"] = Json::array();
    for (const auto& cr : expansion_terms(in, c)) pt["terms"].push_back(coefficient_to_json(cr, n));
    points.push_back(pt);
    csv += v.row;
    inconclusive = inconclusive || v.inconclusive;
  }
  rep["points"] = points;
  out.csv = csv;
  if (inconclusive) out.exit_code = 2;
  return out;
}

RunOutcome run_chaos(const RunConfig& cfg) {
  cfg.validate();
  RunOutcome out;
  Json& rep = out.report = base_report(cfg);
  std::string csv = "d,empirical,stderr,norm,bound_shape,ratio\n";
  Json rows = Json::array();
  std::vector<double> ld, lr;
  for (int d : cfg.chaos_dims) {
    if (d < 2 && cfg.chaos_tensor == "e1-complement") throw std::invalid_argument("dims: e1-complement needs d >= 2");
    const ChaosReport c = chaos_moment_check(chaos_tensor(cfg.chaos_tensor, d), cfg.chaos_q, cfg.chaos_samples,
                                             cfg.seed, cfg.threads, chaos_tensor_norm(cfg.chaos_tensor));
    rows.push_back(Json{{"d", d},
                        {"empirical", c.empirical},
                        {"stderr", c.stderr_},
                        {"norm", c.norm},
                        {"bound_shape", c.bound_shape},
                        {"ratio", c.ratio}});
    csv += std::to_string(d) + "," + fmt(c.empirical) + "," + fmt(c.stderr_) + "," + fmt(c.norm) + "," +
           fmt(c.bound_shape) + "," + fmt(c.ratio) + "\n";
    ld.push_back(std::log(static_cast<double>(d)));
    lr.push_back(std::log(c.empirical / c.norm));
  }
  rep["moments"] = rows;
  rep["fitted_exponent"] = ld.size() >= 2 ? fit_slope(ld, lr) : 0.0;
  Json rx = Json::array();
  const SymTensor t = e1_identity_tensor(cfg.restricted_d);
  for (double R : cfg.restricted_R) {
    const RestrictedExpReport r =
        restricted_exp_check(t, cfg.restricted_d, cfg.restricted_n, R, cfg.chaos_samples, cfg.seed, cfg.threads, 1.0);
    rx.push_back(Json{{"R", R},
                      {"empirical", r.empirical},
                      {"stderr", r.empirical_stderr},
                      {"gradient_bound", r.gradient_bound},
                      {"naive_bound", r.naive_bound},
                      {"gradient_smaller", r.gradient_smaller},
                      {"bound_holds", r.bound_holds}});
  }
  rep["restricted_exp"] = Json{{"d", cfg.restricted_d}, {"n", cfg.restricted_n}, {"tensor_norm", 1.0}, {"rows", rx}};
  out.csv = csv;
  return out;
}

RunOutcome run(const RunConfig& cfg) {
  if (cfg.subcommand == "expand") return run_expand(cfg);
  if (cfg.subcommand == "bound") return run_bound(cfg);
  if (cfg.subcommand == "verify") return run_verify(cfg);
  if (cfg.subcommand == "quartic") return run_quartic(cfg);
  if (cfg.subcommand == "glm") return run_glm(cfg);
  if (cfg.subcommand == "chaos") return run_chaos(cfg);
  throw std::invalid_argument("subcommand: unknown value '" + cfg.subcommand + "'");
}

}  // namespace laplace
