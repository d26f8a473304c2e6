#include "finslerforge/config.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "finslerforge/brane.hpp"
#include "finslerforge/finsler.hpp"
#include "finslerforge/hl.hpp"
#include "finslerforge/solver.hpp"

namespace finslerforge {

namespace {

using nlohmann::json;

const json& need(const json& j, const std::string& field) {
  auto it = j.find(field);
  if (it == j.end()) throw ConfigError(field, "missing");
  return *it;
}

double need_num(const json& j, const std::string& field) {
  const json& v = need(j, field);
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

double num_or(const json& j, const std::string& field, double dflt) {
  auto it = j.find(field);
  if (it == j.end()) return dflt;
  if (!it->is_number()) throw ConfigError(field, "expected a number");
  return it->get<double>();
}

Expr need_expr(const json& j, const std::string& field, const Chart& chart) {
  const json& v = need(j, field);
  if (!v.is_string()) throw ConfigError(field, "expected an expression string");
  try {
    return parse_expr(v.get<std::string>(), chart);
  } catch (const ParseError& e) {
    throw ConfigError(field, e.what());
  }
}

ScalarField field_or(const json& j, const std::string& field, const Chart& chart,
                     double dflt) {
  auto it = j.find(field);
  if (it == j.end()) return ScalarField::constant(dflt);
  if (it->is_number()) return ScalarField::constant(it->get<double>());
  if (!it->is_string()) throw ConfigError(field, "expected an expression string or number");
  try {
    return ScalarField::from_expr(parse_expr(it->get<std::string>(), chart));
  } catch (const ParseError& e) {
    throw ConfigError(field, e.what());
  }
}

std::vector<std::vector<double>> need_points(const json& j, const std::string& field, int dim) {
  const json& v = need(j, field);
  if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a non-empty array");
  std::vector<std::vector<double>> out;
  for (const auto& row : v) {
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw ConfigError(field, "each point needs " + std::to_string(dim) + " coordinates");
    out.push_back(row.get<std::vector<double>>());
  }
  return out;
}

GridSpec::Axis axis_from(const json& j, const std::string& field, double scale) {
  const json& v = need(j, field);
  if (!v.is_array() || v.size() != 3) throw ConfigError(field, "expected [lo, hi, count]");
  GridSpec::Axis ax;
  ax.lo = v[0].get<double>();
  ax.hi = v[1].get<double>();
  ax.count = std::max(1, static_cast<int>(std::lround(v[2].get<double>() * scale)));
  if (ax.count < 1) throw ConfigError(field, "count must be >= 1");
  return ax;
}

GridSpec grid_from(const json& j, double scale) {
  GridSpec g;
  const char* names[5] = {"x1", "x2", "v", "y5", "y7"};
  for (int a = 0; a < 5; ++a) g.axes[a] = axis_from(j, names[a], scale);
  return g;
}

SourceSpec sources_from(const json& j, const Chart& chart, const ScalarField* auto_hL) {
  if (j.contains("upsilon2")) {
    return SourceSpec::from_upsilons(
        field_or(j, "upsilon2", chart, 0), field_or(j, "upsilon4", chart, 0),
        field_or(j, "upsilon6", chart, 0), field_or(j, "upsilon8", chart, 0));
  }
  ScalarField hL;
  if (j.contains("hL") && j["hL"].is_string() && j["hL"].get<std::string>() == "auto") {
    if (!auto_hL) throw ConfigError("sources.hL", "'auto' needs a psi-seeded base block");
    hL = *auto_hL;
  } else {
    hL = field_or(j, "hL", chart, 0);
  }
  return SourceSpec::from_lambdas(hL, field_or(j, "vL", chart, 0), field_or(j, "L1", chart, 0),
                                  field_or(j, "L2", chart, 0));
}

void fields_from(const json& j, const std::string& name, const Chart& chart, ScalarField* out,
                 size_t count) {
  auto it = j.find(name);
  if (it == j.end()) {
    for (size_t i = 0; i < count; ++i) out[i] = ScalarField::constant(0.0);
    return;
  }
  if (!it->is_array() || it->size() > count)
    throw ConfigError(name, "expected an array of at most " + std::to_string(count) +
                                " expressions");
  for (size_t i = 0; i < count; ++i) {
    if (i < it->size()) {
      const auto& e = (*it)[i];
      if (e.is_number()) {
        out[i] = ScalarField::constant(e.get<double>());
      } else if (e.is_string()) {
        try {
          out[i] = ScalarField::from_expr(parse_expr(e.get<std::string>(), chart));
        } catch (const ParseError& pe) {
          throw ConfigError(name + "[" + std::to_string(i) + "]", pe.what());
        }
      } else {
        throw ConfigError(name + "[" + std::to_string(i) + "]", "expected string or number");
      }
    } else {
      out[i] = ScalarField::constant(0.0);
    }
  }
}

ShellAnsatz ansatz_from(const json& j, const Chart& chart) {
  ShellAnsatz a;
  a.g1 = ScalarField::from_expr(need_expr(j, "g1", chart));
  a.g2 = ScalarField::from_expr(need_expr(j, "g2", chart));
  a.h3 = ScalarField::from_expr(need_expr(j, "h3", chart));
  a.h4 = ScalarField::from_expr(need_expr(j, "h4", chart));
  a.h5 = ScalarField::from_expr(need_expr(j, "h5", chart));
  a.h6 = ScalarField::from_expr(need_expr(j, "h6", chart));
  a.h7 = ScalarField::from_expr(need_expr(j, "h7", chart));
  a.h8 = ScalarField::from_expr(need_expr(j, "h8", chart));
  fields_from(j, "w_i", chart, a.w.data(), 2);
  fields_from(j, "n_i", chart, a.n.data(), 2);
  fields_from(j, "w1_a", chart, a.w1.data(), 4);
  fields_from(j, "n1_a", chart, a.n1.data(), 4);
  fields_from(j, "w2_a", chart, a.w2.data(), 6);
  fields_from(j, "n2_a", chart, a.n2.data(), 6);
  return a;
}

std::vector<std::string> residual_header(const ResidualReport& rep) {
  std::vector<std::string> h = {"x1", "x2", "v", "y5", "y7"};
  for (const auto& f : rep.families) h.push_back(f.name);
  return h;
}

void add_family_checks(Report& rep, const ResidualReport& rr, double tol) {
  for (const auto& f : rr.families) rep.checks.push_back({f.name, f.max_abs, tol, false});
  if (rr.excluded > 0)
    rep.warnings.push_back(std::to_string(rr.excluded) +
                           " degenerate grid points excluded from residual evaluation");
}

// ---------------------------------------------------------------------------
// command handlers
// ---------------------------------------------------------------------------

Report cmd_hessian(const json& cfg, const std::string& out_dir, double tol) {
  Chart chart = Chart::tangent_bundle8();
  Expr f2 = need_expr(cfg, "f2", chart);
  auto pts = need_points(cfg, "points", 8);
  Report rep;
  rep.command = "hessian";
  double sym = 0.0, mindet = 1e300;
  std::vector<std::vector<double>> rows;
  for (const auto& p : pts) {
    Mat<double> H = hessian_metric(f2, chart, p);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) sym = std::max(sym, std::abs(H(i, j) - H(j, i)));
    mindet = std::min(mindet, std::abs(mat_det(H)));
    std::vector<double> row = p;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) row.push_back(H(i, j));
    rows.push_back(row);
  }
  rep.checks.push_back({"hessian_symmetry", sym, tol > 0 ? tol : 1e-12, false});
  rep.checks.push_back({"hessian_min_abs_det", mindet, 0.0, true});
  write_csv(out_dir + "/hessian.csv",
            {"x1", "x2", "x3", "x4", "y5", "y6", "y7", "y8", "g11", "g12", "g13", "g14", "g22",
             "g23", "g24", "g33", "g34", "g44"},
            rows);
  return rep;
}

Report cmd_connection(const json& cfg, const std::string& out_dir, double tol) {
  Chart chart = Chart::tangent_bundle8();
  Expr f2 = need_expr(cfg, "f2", chart);
  double lstar = num_or(cfg, "lstar", 1.0);
  auto pts = need_points(cfg, "points", 8);
  DMetric dm = dmetric_from_finsler(f2, chart, lstar);
  Report rep;
  rep.command = "connection";
  double compat = 0.0, pure_torsion = 0.0;
  std::vector<std::vector<double>> rows;
  for (const auto& p : pts) {
    compat = std::max(compat, compat_residual(dm, p));
    auto td = torsion_and_distortion(dm, p);
    for (double t : td.torsion.T_hhh) pure_torsion = std::max(pure_torsion, std::abs(t));
    for (double t : td.torsion.T_vvv) pure_torsion = std::max(pure_torsion, std::abs(t));
    rows.push_back({p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], compat});
  }
  rep.checks.push_back({"metric_compatibility", compat, tol > 0 ? tol : 1e-8, false});
  rep.checks.push_back({"pure_torsion_blocks", pure_torsion, 1e-12, false});
  write_csv(out_dir + "/connection.csv",
            {"x1", "x2", "x3", "x4", "y5", "y6", "y7", "y8", "compat_residual"}, rows);
  return rep;
}

Report cmd_curvature(const json& cfg, const std::string& out_dir, double tol) {
  Chart chart = Chart::tangent_bundle8();
  Expr f2 = need_expr(cfg, "f2", chart);
  double lstar = num_or(cfg, "lstar", 1.0);
  auto pts = need_points(cfg, "points", 8);
  DMetric dm = dmetric_from_finsler(f2, chart, lstar);
  Report rep;
  rep.command = "curvature";
  double antisym = 0.0, split = 0.0;
  std::vector<std::vector<double>> rows;
  for (const auto& p : pts) {
    CurvaturePack cp = curvature_and_ricci(dm, p);
    const int n = cp.n;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d)
            antisym = std::max(antisym, std::abs(cp.r(a, b, c, d) + cp.r(a, b, d, c)));
    split = std::max(split, std::abs(cp.scalar - (cp.hscalar + cp.vscalar)));
    rows.push_back({p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], cp.hscalar, cp.vscalar,
                    cp.scalar});
  }
  rep.checks.push_back({"curvature_antisymmetry", antisym, tol > 0 ? tol : 1e-10, false});
  rep.checks.push_back({"scalar_split_identity", split, 1e-12, false});
  write_csv(out_dir + "/curvature.csv",
            {"x1", "x2", "x3", "x4", "y5", "y6", "y7", "y8", "h_scalar", "v_scalar", "scalar"},
            rows);
  return rep;
}

Report cmd_verify_solution(const json& cfg, const std::string& out_dir, double tol,
                           double grid_scale) {
  Chart chart = Chart::tangent_bundle8();
  ShellAnsatz a = ansatz_from(need(cfg, "ansatz"), chart);
  SourceSpec s = sources_from(need(cfg, "sources"), chart, nullptr);
  GridSpec grid = grid_from(need(cfg, "grid"), grid_scale);
  double famtol = tol > 0 ? tol : num_or(cfg, "tol", 1e-6);
  ResidualReport rr = shell_residuals(a, s, grid, true, max_threads());
  Report rep;
  rep.command = "verify-solution";
  add_family_checks(rep, rr, famtol);
  write_csv(out_dir + "/residuals.csv", residual_header(rr), rr.rows);
  return rep;
}

GeneratingData generating_from(const json& j, const Chart& chart, ScalarField* auto_hL) {
  GeneratingData gd;
  if (j.contains("psi")) {
    Expr psi = need_expr(j, "psi", chart);
    double eps = num_or(j, "eps_sign", 1.0);
    ScalarField epsi = field_exp(ScalarField::from_expr(psi));
    gd.g1 = eps * epsi;
    gd.g2 = gd.g1;
    // hL consistent with the base equation: eps*e^-psi (psi_11 + psi_22)/2
    ScalarField psif = ScalarField::from_expr(psi);
    ScalarField lap = psif.d(0).d(0) + psif.d(1).d(1);
    *auto_hL = (0.5 * eps) * (lap * field_exp(-1.0 * psif));
  } else {
    gd.g1 = ScalarField::from_expr(need_expr(j, "g1", chart));
    gd.g2 = ScalarField::from_expr(need_expr(j, "g2", chart));
  }
  gd.phi0 = ScalarField::from_expr(need_expr(j, "phi_hat", chart));
  gd.phi1 = ScalarField::from_expr(need_expr(j, "phi_hat_1", chart));
  gd.phi2 = ScalarField::from_expr(need_expr(j, "phi_hat_2", chart));
  gd.h4_0 = field_or(j, "h4_0", chart, 0.0);
  gd.h6_0 = field_or(j, "h6_0", chart, 0.0);
  gd.h8_0 = field_or(j, "h8_0", chart, 0.0);
  fields_from(j, "n_0", chart, gd.n_0.data(), 2);
  fields_from(j, "n_1", chart, gd.n_1.data(), 2);
  fields_from(j, "n1_0", chart, gd.n1_0.data(), 4);
  fields_from(j, "n1_1", chart, gd.n1_1.data(), 4);
  fields_from(j, "n2_0", chart, gd.n2_0.data(), 6);
  fields_from(j, "n2_1", chart, gd.n2_1.data(), 6);
  if (j.contains("branch_signs")) {
    const json& b = j["branch_signs"];
    gd.sign4 = static_cast<int>(num_or(b, "s4", 1));
    gd.sign6 = static_cast<int>(num_or(b, "s6", 1));
    gd.sign8 = static_cast<int>(num_or(b, "s8", 1));
    gd.sign3 = static_cast<int>(num_or(b, "s3", 0));
    gd.sign5 = static_cast<int>(num_or(b, "s5", 0));
    gd.sign7 = static_cast<int>(num_or(b, "s7", 0));
  }
  if (j.contains("lower_limits")) {
    const json& b = j["lower_limits"];
    gd.v0 = num_or(b, "v0", 0.0);
    gd.y5_0 = num_or(b, "y5_0", 0.0);
    gd.y7_0 = num_or(b, "y7_0", 0.0);
  }
  return gd;
}

Report cmd_generate_solution(const json& cfg, const std::string& out_dir, double tol,
                             double grid_scale) {
  Chart chart = Chart::tangent_bundle8();
  ScalarField auto_hL;
  GeneratingData gd = generating_from(need(cfg, "generating"), chart, &auto_hL);
  SourceSpec s = sources_from(need(cfg, "sources"), chart,
                              auto_hL.empty() ? nullptr : &auto_hL);
  GridSpec grid = grid_from(need(cfg, "grid"), grid_scale);
  double famtol = tol > 0 ? tol : num_or(cfg, "tol", 1e-6);

  ShellAnsatz a = generate_solution(gd, s);
  ResidualReport rr = shell_residuals(a, s, grid, true, max_threads());
  Report rep;
  rep.command = "generate-solution";
  add_family_checks(rep, rr, famtol);
  write_csv(out_dir + "/residuals.csv", residual_header(rr), rr.rows);

  // sampled coefficients of the generated ansatz
  std::vector<std::vector<double>> rows;
  for (const auto& p : grid.points()) {
    rows.push_back({p[0], p[1], p[2], p[4], p[6], a.g1.value(p), a.h3.value(p), a.h4.value(p),
                    a.h5.value(p), a.h6.value(p), a.h7.value(p), a.h8.value(p),
                    a.w[0].value(p), a.w[1].value(p), a.n[0].value(p), a.n[1].value(p)});
  }
  write_csv(out_dir + "/ansatz.csv",
            {"x1", "x2", "v", "y5", "y7", "g1", "h3", "h4", "h5", "h6", "h7", "h8", "w1", "w2",
             "n1", "n2"},
            rows);

  if (cfg.contains("lc_check") && cfg["lc_check"].get<bool>()) {
    ResidualReport lc = lc_constraints_check(a, grid);
    for (const auto& f : lc.families)
      rep.checks.push_back({"lc_" + f.name, f.max_abs, num_or(cfg, "lc_tol", 1e-8), false});
  }
  return rep;
}

Report cmd_brane(const json& cfg, const std::string& out_dir, double tol) {
  double M = need_num(cfg, "M");
  double Lambda = need_num(cfg, "Lambda");
  int m = static_cast<int>(num_or(cfg, "m", 2));
  double phi0 = num_or(cfg, "phi0", 1.0);
  bool solve_a = cfg.contains("a_mode") && cfg["a_mode"].is_string() &&
                 cfg["a_mode"].get<std::string>() == "solve";
  double a_in = num_or(cfg, "a", 1.0);
  BraneProfile p = brane_profile(M, Lambda, m, phi0, solve_a, a_in);

  const json& g = need(cfg, "grid");
  double lo = need_num(g, "lo"), hi = need_num(g, "hi");
  int count = static_cast<int>(need_num(g, "count"));
  BraneReport br = brane_sources_and_conservation(p, lo, hi, count);

  int sign7 = static_cast<int>(num_or(cfg, "sign7", 1));
  int sign8 = static_cast<int>(num_or(cfg, "sign8", 1));
  Report rep;
  rep.command = "brane";
  rep.checks.push_back({"phi2_origin", std::abs(p.phi2(0.0) - 1.0), 1e-15, false});
  rep.checks.push_back({"warp_origin", std::abs(p.lhbar(0.0) - 1.0), 1e-15, false});
  rep.checks.push_back(
      {"width_identity", std::abs(p.eps * p.eps * 3.0 * Lambda - 40.0 * std::pow(M, 4)),
       tol > 0 ? tol : 1e-12, false});
  rep.checks.push_back({"conservation_residual", br.max_cons_residual, 0.0, true});
  std::vector<std::vector<double>> rows;
  for (const auto& smp : br.samples)
    rows.push_back({smp.y5, smp.phi2, smp.lhbar, smp.K1M, smp.K2M, smp.cons_residual});
  write_csv(out_dir + "/brane.csv", {"y5", "phi2", "hbar", "K1", "K2", "cons_residual"}, rows);
  std::vector<std::vector<double>> diag;
  for (const auto& smp : br.samples) {
    Mat<double> M = diagonal_profile_metric(p, sign7, sign8, smp.y5);
    std::vector<double> row = {smp.y5};
    for (int i = 0; i < 8; ++i) row.push_back(M(i, i));
    diag.push_back(row);
  }
  write_csv(out_dir + "/diag_metric.csv",
            {"y5", "g11", "g22", "g33", "g44", "g55", "g66", "g77", "g88"}, diag);
  return rep;
}

Report cmd_mdr(const json& cfg, const std::string& out_dir, double tol, long long seed) {
  HLConstants k;
  if (cfg.contains("constants")) {
    const json& c = cfg["constants"];
    k.kappa = num_or(c, "kappa", 1.0);
    k.mu = num_or(c, "mu", 1.0);
    k.varpi = num_or(c, "varpi", 1.0);
    k.Lambda = num_or(c, "Lambda", 1.0);
    k.lambda = num_or(c, "lambda", 0.0);
    k.eta = num_or(c, "eta", 0.0);
    k.c = num_or(c, "c", 1.0);
  }
  int sign = static_cast<int>(num_or(cfg, "sign", 1));
  const json& br = need(cfg, "branches");
  if (!br.is_array() || br.empty()) throw ConfigError("branches", "expected a non-empty array");

  std::vector<double> lambdas = {k.lambda};
  if (cfg.contains("lambda_grid")) {
    const json& lg = cfg["lambda_grid"];
    if (!lg.is_array() || lg.size() != 3) throw ConfigError("lambda_grid", "expected [lo,hi,count]");
    lambdas.clear();
    double lo = lg[0].get<double>(), hi = lg[1].get<double>();
    int n = static_cast<int>(lg[2].get<double>());
    for (int i = 0; i < n; ++i) {
      double l = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
      if (std::abs(1.0 - 3.0 * l) < 1e-6) continue;  // keep clear of the pole
      lambdas.push_back(l);
    }
  }
  const json& pj = need(cfg, "p");
  double plo = need_num(pj, "lo"), phi_ = need_num(pj, "hi");
  int pc = static_cast<int>(need_num(pj, "count"));

  // random parameter draws (kappa, mu, Lambda, lambda) per row, seeded
  int random_count = static_cast<int>(num_or(cfg, "random_sweep", 0));
  std::mt19937 rng(static_cast<unsigned>(seed >= 0 ? seed : num_or(cfg, "seed", 1)));

  std::vector<std::vector<double>> rows;
  double worst_low_p = -1e300;  // max omega^2 over scalar-low-p rows (must stay < 0)
  double high_p_lambda1 = 0.0, tensor_origin = 0.0;
  bool saw_low = false;
  std::uniform_real_distribution<double> dpos(0.1, 3.0), dl(-2.0, 2.0), dsign(-1.0, 1.0);
  for (const auto& bname : br) {
    auto b = mdr_branch_from_name(bname.get<std::string>());
    if (!b) throw ConfigError("branches", "unknown branch '" + bname.get<std::string>() + "'");
    int outer = random_count > 0 ? random_count : static_cast<int>(lambdas.size());
    for (int oi = 0; oi < outer; ++oi) {
      HLConstants kk = k;
      if (random_count > 0) {
        kk.kappa = dpos(rng);
        kk.mu = dpos(rng);
        kk.Lambda = dsign(rng) >= 0 ? dpos(rng) : -dpos(rng);
        do {
          kk.lambda = dl(rng);
        } while (std::abs(1.0 - 3.0 * kk.lambda) < 1e-3);
      } else {
        kk.lambda = lambdas[oi];
      }
      double l = kk.lambda;
      for (int i = 0; i < pc; ++i) {
        double p = pc == 1 ? plo : plo + (phi_ - plo) * i / (pc - 1);
        double w2 = mdr_omega2(*b, kk, p, sign);
        rows.push_back({static_cast<double>(static_cast<int>(*b)), kk.kappa, kk.mu, kk.varpi,
                        kk.Lambda, kk.lambda, kk.eta, static_cast<double>(sign), p, w2});
        if (*b == MdrBranch::ScalarLowP) {
          saw_low = true;
          worst_low_p = std::max(worst_low_p, w2);
        }
        if (*b == MdrBranch::ScalarHighP && std::abs(l - 1.0) < 1e-14)
          high_p_lambda1 = std::max(high_p_lambda1, std::abs(w2));
        if ((*b == MdrBranch::TensorDetailedBalance || *b == MdrBranch::TensorBeyond) &&
            p == 0.0)
          tensor_origin = std::max(tensor_origin, std::abs(w2));
      }
    }
  }
  Report rep;
  rep.command = "mdr";
  if (saw_low)
    rep.checks.push_back(
        {"scalar_low_p_negative", std::max(0.0, worst_low_p), tol > 0 ? tol : 1e-15, false});
  rep.checks.push_back({"tensor_omega2_origin", tensor_origin, 1e-15, false});
  (void)high_p_lambda1;
  write_csv(out_dir + "/mdr.csv",
            {"branch", "kappa", "mu", "varpi", "Lambda", "lambda", "eta", "sign", "p", "omega2"},
            rows);
  return rep;
}

Report cmd_hl_action(const json& cfg, const std::string& out_dir, double tol) {
  Chart chart = Chart::spacetime4();
  const json& fj = need(cfg, "fields");
  HLFields f;
  f.lapse = need_expr(fj, "lapse", chart);
  const json& shift = need(fj, "shift");
  if (!shift.is_array() || shift.size() != 3) throw ConfigError("fields.shift", "expected 3 expressions");
  for (int i = 0; i < 3; ++i) f.shift[i] = parse_expr(shift[i].get<std::string>(), chart);
  const json& g3 = need(fj, "g3");
  if (!g3.is_array() || g3.size() != 9) throw ConfigError("fields.g3", "expected 9 expressions");
  for (int i = 0; i < 9; ++i) f.g3[i] = parse_expr(g3[i].get<std::string>(), chart);
  if (cfg.contains("constants")) {
    const json& c = cfg["constants"];
    f.k.kappa = num_or(c, "kappa", 1.0);
    f.k.mu = num_or(c, "mu", 1.0);
    f.k.varpi = num_or(c, "varpi", 1.0);
    f.k.Lambda = num_or(c, "Lambda", 1.0);
    f.k.lambda = num_or(c, "lambda", 1.0);
    f.k.eta = num_or(c, "eta", 0.0);
  }
  f.projectable = num_or(cfg, "projectable", 1.0) != 0.0;
  auto pts = need_points(cfg, "points", 4);

  Report rep;
  rep.command = "hl-action";
  double cotton_trace = 0.0, K_sym = 0.0;
  std::vector<std::vector<double>> rows;
  for (const auto& p : pts) {
    Invariants3 inv = curvature_invariants_3d(f, p);
    ActionDensity ad = hl_action_density(f, p);
    // Cotton is trace-free; the trace residual needs the metric
    double tr = 0.0;
    Mat<double> g(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = eval(f.g3[i * 3 + j], p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) tr += g(i, j) * inv.cotton(i, j);
    cotton_trace = std::max(cotton_trace, std::abs(tr));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) K_sym = std::max(K_sym, std::abs(inv.K(i, j) - inv.K(j, i)));
    rows.push_back({p[0], p[1], p[2], p[3], inv.trK, inv.R, ad.kinetic, ad.potential});
  }
  rep.checks.push_back({"cotton_trace_free", cotton_trace, tol > 0 ? tol : 1e-8, false});
  rep.checks.push_back({"extrinsic_symmetry", K_sym, 1e-12, false});
  write_csv(out_dir + "/hl_action.csv",
            {"t", "x2", "x3", "x4", "trK", "R3", "kinetic", "potential"}, rows);
  return rep;
}

}  // namespace

int max_threads() {
  const char* env = std::getenv("FINSLERFORGE_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n < 1 ? 1 : n;
}

Report run_config(const CliOptions& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw ConfigError("config", "cannot open " + opt.config_path);
  json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  std::string command;
  if (cfg.contains("command")) command = cfg["command"].get<std::string>();
  if (!opt.command.empty()) {
    if (!command.empty() && command != opt.command)
      throw ConfigError("command", "config says '" + command + "' but the command line says '" +
                                       opt.command + "'");
    command = opt.command;
  }
  if (command.empty()) throw ConfigError("command", "missing");
  std::string out_dir = !opt.out_dir.empty() ? opt.out_dir
                        : cfg.contains("out_dir") ? cfg["out_dir"].get<std::string>()
                                                  : std::string(".");
  std::filesystem::create_directories(out_dir);
  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  if (command == "hessian")
    rep = cmd_hessian(cfg, out_dir, opt.tol_override);
  else if (command == "connection")
    rep = cmd_connection(cfg, out_dir, opt.tol_override);
  else if (command == "curvature")
    rep = cmd_curvature(cfg, out_dir, opt.tol_override);
  else if (command == "verify-solution")
    rep = cmd_verify_solution(cfg, out_dir, opt.tol_override, opt.grid_scale);
  else if (command == "generate-solution")
    rep = cmd_generate_solution(cfg, out_dir, opt.tol_override, opt.grid_scale);
  else if (command == "brane")
    rep = cmd_brane(cfg, out_dir, opt.tol_override);
  else if (command == "mdr")
    rep = cmd_mdr(cfg, out_dir, opt.tol_override, opt.seed_override);
  else if (command == "hl-action")
    rep = cmd_hl_action(cfg, out_dir, opt.tol_override);
  else
    throw ConfigError("command", "unknown command '" + command + "'");
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  emit_report(rep, out_dir + "/" + command + "_report.json");
  return rep;
}

int run_cli(const CliOptions& opt) {
  try {
    Report rep = run_config(opt);
    std::cerr << rep.command << ": " << (rep.pass() ? "pass" : "FAIL") << " ("
              << rep.checks.size() << " checks, " << rep.wall_ms << " ms)\n";
    for (const auto& c : rep.checks)
      std::cerr << "  " << c.name << ": max residual " << c.max_residual
                << (c.informational ? " (informational)"
                                    : c.pass() ? " < tol" : " >= tol FAIL")
                << "\n";
    return rep.pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace finslerforge
