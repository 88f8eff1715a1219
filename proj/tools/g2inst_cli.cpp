// Command-line driver.  Verbs: fixed-points | tune-metric | integrate |
// shoot | sweep | verify | plot.  Flags: --config PATH, --out DIR, --seed N,
// --tol X, --jobs N; flags override the corresponding config keys.  Exit
// codes: 0 success, 1 numeric failure, 2 configuration error.
//
// Every command writes its artifacts under --out and finishes by writing
// manifest.json atomically (config snapshot, version, timing, result
// summary).  All CSV numbers carry 17 significant digits so a rerun with the
// same config and seed is byte-identical.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "g2inst/cone.hpp"
#include "g2inst/instanton.hpp"
#include "g2inst/io.hpp"
#include "g2inst/metric.hpp"
#include "g2inst/reference.hpp"
#include "g2inst/su2.hpp"
#include "g2inst/types.hpp"
#include "g2inst/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace g2inst;

namespace {

constexpr const char* kVersion = "1.0.0";

// All recognized config keys; anything else is rejected up front so a typo
// cannot silently fall back to a default.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "m",       "n",        "r0",          "beta",       "j",         "f0",
      "h0",      "t0",       "t_max",       "tau_end",    "rtol",      "atol",
      "tol_h0",  "eps_conv", "escape_norm", "series_n",   "scan_lo",   "scan_hi",
      "scan_points", "f0_grid", "seed",     "jobs",       "quick",     "nudge",
      "csv",     "beta_lo",  "beta_hi"};
  return keys;
}

struct RunConfig {
  io::Config raw;
  MetricParams params{1, 1, 1.0, 1.0};
  bool tune_beta = true;  // beta key absent or "tune"
  int j = 1;
  double f0 = 0.1;
  double h0 = std::numeric_limits<double>::quiet_NaN();  // NaN: shoot for it
  double t0 = 0.0;      // 0: engine default 1e-3 r0
  double t_max = 0.0;   // trajectory horizon for `integrate`; 0: 100 r0
  double rtol = 0.0, atol = 0.0;
  ShootOptions shoot;
  std::vector<double> f0_grid;
  unsigned seed = 20260815;
  int jobs = 0;
  bool quick = false;
  double nudge = 0.0;
  double beta_lo = 0.2, beta_hi = 3.0;
  std::string csv;  // input trajectory for `plot`
  fs::path out = "out";
};

RunConfig load_config(const std::string& config_path, const std::string& out_dir, int seed_flag,
                      double tol_flag, int jobs_flag) {
  RunConfig rc;
  if (!config_path.empty()) rc.raw = io::Config::parse_file(config_path);
  rc.raw.require_known(known_keys());

  rc.params.m = rc.raw.integer("m", 1);
  rc.params.n = rc.raw.integer("n", 1);
  rc.params.r0 = rc.raw.number("r0", 1.0);
  const std::string beta = rc.raw.str("beta", "tune");
  if (beta != "tune") {
    rc.tune_beta = false;
    rc.params.beta = rc.raw.number("beta", 1.0);
  }
  rc.j = rc.raw.integer("j", 1);
  rc.f0 = rc.raw.number("f0", 0.1);
  if (rc.raw.has("h0")) rc.h0 = rc.raw.number("h0", 0.0);
  rc.t0 = rc.raw.number("t0", 0.0);
  rc.t_max = rc.raw.number("t_max", 0.0);
  rc.rtol = rc.raw.number("rtol", 0.0);
  rc.atol = rc.raw.number("atol", 0.0);
  rc.shoot.t0 = rc.t0;
  rc.shoot.tau_end = rc.raw.number("tau_end", rc.shoot.tau_end);
  rc.shoot.tol_h0 = rc.raw.number("tol_h0", rc.shoot.tol_h0);
  rc.shoot.eps_conv = rc.raw.number("eps_conv", rc.shoot.eps_conv);
  rc.shoot.escape_norm = rc.raw.number("escape_norm", rc.shoot.escape_norm);
  rc.shoot.series_N = rc.raw.integer("series_n", rc.shoot.series_N);
  rc.shoot.scan_lo = rc.raw.number("scan_lo", rc.shoot.scan_lo);
  rc.shoot.scan_hi = rc.raw.number("scan_hi", rc.shoot.scan_hi);
  rc.shoot.scan_points = rc.raw.integer("scan_points", rc.shoot.scan_points);
  rc.f0_grid = rc.raw.number_list("f0_grid", {0.02, 0.035, 0.05, 0.075, 0.1, 0.15, 0.2, 0.25, 0.3});
  rc.seed = static_cast<unsigned>(rc.raw.integer("seed", 20260815));
  rc.jobs = rc.raw.integer("jobs", 0);
  rc.quick = rc.raw.flag("quick", false);
  rc.nudge = rc.raw.number("nudge", 0.0);
  rc.beta_lo = rc.raw.number("beta_lo", rc.beta_lo);
  rc.beta_hi = rc.raw.number("beta_hi", rc.beta_hi);
  rc.csv = rc.raw.str("csv", "");

  if (seed_flag >= 0) {
    rc.seed = static_cast<unsigned>(seed_flag);
    rc.raw.set("seed", std::to_string(seed_flag));
  }
  if (tol_flag > 0.0) {
    rc.rtol = tol_flag;
    rc.raw.set("rtol", io::fmt17(tol_flag));
  }
  if (jobs_flag > 0) {
    rc.jobs = jobs_flag;
    rc.raw.set("jobs", std::to_string(jobs_flag));
  }
  rc.out = out_dir;
  if (rc.rtol > 0.0 && rc.atol == 0.0) rc.atol = rc.rtol * 1e-2;
  validate(rc.params);
  return rc;
}

json config_snapshot(const RunConfig& rc) {
  json j = json::object();
  for (const auto& [k, v] : rc.raw.entries()) j[k] = v;
  return j;
}

void write_manifest(const RunConfig& rc, const std::string& command, double seconds,
                    json results) {
  json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config_snapshot(rc);
  m["seconds"] = seconds;
  m["results"] = std::move(results);
  io::write_text_atomic(rc.out / "manifest.json", m.dump(2) + "\n");
}

double elapsed(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Builds the working profile: beta from the config when given numerically,
// otherwise tuned to the asymptotically conical value first.
IntegratedProfile make_profile(RunConfig& rc, double t_need = 0.0) {
  TuneOptions topt;
  topt.beta_lo = rc.beta_lo;
  topt.beta_hi = rc.beta_hi;
  topt.t0 = rc.t0;
  if (rc.rtol > 0.0) topt.rtol = rc.rtol;
  if (rc.tune_beta) rc.params.beta = tune_beta_ac(rc.params, topt);
  ProfileOptions po;
  po.t0 = rc.t0;
  if (rc.rtol > 0.0) po.rtol = rc.rtol;
  if (t_need > 0.0) po.T_max = std::max(2e5 * rc.params.r0, 1.05 * t_need);
  return integrate_ac_profile(rc.params, po);
}

// Trajectory export shared by `integrate` and `shoot`: columns
// (t, f, fp, g, h, residual, curvature_norm) at the accepted steps, where
// residual is the sup-norm defect of the reduced flow at the dense sample.
void write_trajectory_csv(const fs::path& path, const ConnectionTrajectory& traj,
                          const MetricProfile& prof) {
  const MetricParams& p = prof.params();
  io::CsvWriter csv(path, {"t", "f", "fp", "g", "h", "residual", "curvature_norm"});
  for (size_t k = 0; k < traj.ts.size(); ++k) {
    const double t = traj.ts[k];
    const ConnectionState z = traj.zs[k];
    const ConnectionState zd = traj.state_dot(t);
    const MetricSample s = prof.at(t);
    const ConnectionState rhs = reduced_rhs(z, s, p);
    const double residual = std::max({std::abs(rhs.f - zd.f), std::abs(rhs.fp - zd.fp),
                                      std::abs(rhs.g - zd.g), std::abs(rhs.h - zd.h)});
    const double curv = curvature_norm(embed_reduced(z), embed_reduced(zd), s, p);
    csv.row(std::vector<double>{t, z.f, z.fp, z.g, z.h, residual, curv});
  }
  csv.flush();
}

void write_trajectory_svg(const fs::path& path, const ConnectionTrajectory& traj) {
  io::SvgSeries sf{"f", {}, {}, "#1f6fb2"}, sfp{"f'", {}, {}, "#b2471f"},
      sg{"g", {}, {}, "#2a8f3c"}, sh{"h", {}, {}, "#7a3cb2"};
  for (size_t k = 0; k < traj.ts.size(); ++k) {
    const double t = traj.ts[k];
    sf.x.push_back(t);
    sfp.x.push_back(t);
    sg.x.push_back(t);
    sh.x.push_back(t);
    sf.y.push_back(traj.zs[k].f);
    sfp.y.push_back(traj.zs[k].fp);
    sg.y.push_back(traj.zs[k].g);
    sh.y.push_back(traj.zs[k].h);
  }
  io::SvgOptions o;
  o.title = "reduced connection components";
  o.xlabel = "log10 t";
  o.ylabel = "value";
  o.xlog = true;
  io::write_svg_lines(path, {sf, sfp, sg, sh}, o);
}

const char* fp_name(ConeFixedPoint w) {
  switch (w) {
    case ConeFixedPoint::origin: return "origin";
    case ConeFixedPoint::plus: return "plus";
    default: return "minus";
  }
}

// ---------------------------------------------------------------------------
// Commands

int cmd_fixed_points(RunConfig rc) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(rc.out);
  json recs = json::array();
  double worst_fd = 0.0;
  for (ConeFixedPoint w : {ConeFixedPoint::origin, ConeFixedPoint::plus, ConeFixedPoint::minus}) {
    const FixedPointRecord rec = linearize(w);
    json r;
    r["which"] = fp_name(w);
    for (int i = 0; i < 4; ++i) r["z"].push_back(rec.z[i]);
    for (int i = 0; i < 4; ++i) {
      json row = json::array();
      for (int jcol = 0; jcol < 4; ++jcol) row.push_back(rec.DF(i, jcol));
      r["DF"].push_back(row);
    }
    for (int i = 0; i < 4; ++i) r["eigenvalues"].push_back(rec.eigenvalues[i]);
    for (int i = 0; i < 4; ++i) {
      json row = json::array();
      for (int jcol = 0; jcol < 4; ++jcol) row.push_back(rec.eigenvectors(i, jcol));
      r["eigenvectors"].push_back(row);
    }
    r["stable"] = rec.stable;
    r["unstable"] = rec.unstable;
    r["fd_error"] = rec.fd_error;
    recs.push_back(r);
    worst_fd = std::max(worst_fd, rec.fd_error);
    std::printf("%-6s  z = (%s, %s, %s, %s)\n", fp_name(w), io::fmt17(rec.z[0]).c_str(),
                io::fmt17(rec.z[1]).c_str(), io::fmt17(rec.z[2]).c_str(),
                io::fmt17(rec.z[3]).c_str());
    std::printf("        eigenvalues:");
    for (int i = 0; i < 4; ++i) std::printf(" %s", io::fmt17(rec.eigenvalues[i]).c_str());
    std::printf("  (fd gap %.3g)\n", rec.fd_error);
  }
  const fs::path jpath = rc.out / "fixed_points.json";
  io::write_text_atomic(jpath, recs.dump(2) + "\n");

  // Round-trip audit: the file parses back to the exact same values.
  std::ifstream in(jpath);
  const json back = json::parse(in);
  const bool round_trip = back == recs;
  std::printf("round-trip %s; analytic vs finite-difference Jacobian gap %.3g (< 1e-6: %s)\n",
              round_trip ? "ok" : "MISMATCH", worst_fd, worst_fd < 1e-6 ? "yes" : "NO");

  json results;
  results["round_trip"] = round_trip;
  results["fd_error"] = worst_fd;
  write_manifest(rc, "fixed-points", elapsed(start), results);
  if (!round_trip || !(worst_fd < 1e-6)) throw NumericError("fixed-point report failed its audit");
  return 0;
}

int cmd_tune_metric(RunConfig rc) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(rc.out);
  std::unique_ptr<IntegratedProfile> prof;
  try {
    prof = std::make_unique<IntegratedProfile>(make_profile(rc));
  } catch (const NoBracket&) {
    // Surface the scan the user needs: how each beta endpoint classifies.
    std::printf("no bracket in [%s, %s]; classification scan:\n", io::fmt17(rc.beta_lo).c_str(),
                io::fmt17(rc.beta_hi).c_str());
    for (int i = 0; i < 9; ++i) {
      const double beta = rc.beta_lo + (rc.beta_hi - rc.beta_lo) * i / 8.0;
      MetricParams p = rc.params;
      p.beta = beta;
      const ProfileClass c = classify_profile(p, rc.t0);
      const char* name = c == ProfileClass::difference_hits_zero ? "difference_hits_zero"
                         : c == ProfileClass::difference_slow     ? "difference_slow"
                                                                  : "difference_decays";
      std::printf("  beta = %-20s  %s\n", io::fmt17(beta).c_str(), name);
    }
    throw;
  }

  const DecayFit fit = fit_difference_decay(*prof);
  const InequalityAudit audit = audit_inequalities(*prof);

  // Profile export on a log grid (the seed series handles t below handoff).
  const double t_lo = std::max(prof->handoff_time(), 1e-3 * rc.params.r0);
  const double t_hi = prof->t_max();
  io::CsvWriter csv(rc.out / "profile.csv", {"t", "a", "b", "da", "db"});
  const int n = 2001;
  for (int i = 0; i < n; ++i) {
    const double t =
        std::min(std::exp(std::log(t_lo) + (std::log(t_hi) - std::log(t_lo)) * i / (n - 1)), t_hi);
    const MetricSample s = prof->at(t);
    csv.row(std::vector<double>{s.t, s.a, s.b, s.da, s.db});
  }
  csv.flush();

  std::printf("beta%s = %s\n", rc.tune_beta ? " (tuned)" : "", io::fmt17(rc.params.beta).c_str());
  std::printf("cone translation c0 = %s, decay exponent = %s (model %s)\n",
              io::fmt17(fit.c0).c_str(), io::fmt17(fit.nu_fit).c_str(),
              io::fmt17(nu_infinity).c_str());
  std::printf("inequality audit over [%g, %g], %d samples:\n", audit.t_lo, audit.t_hi,
              audit.samples);
  for (const AuditRow& row : audit.rows)
    std::printf("  %-44s  min margin %11.4g at t = %-10.4g %s\n", row.name.c_str(),
                row.min_margin, row.argmin_t, row.pass ? "pass" : "FAIL");

  json results;
  results["beta"] = rc.params.beta;
  results["tuned"] = rc.tune_beta;
  results["m"] = rc.params.m;
  results["n"] = rc.params.n;
  results["r0"] = rc.params.r0;
  results["tol"] = rc.rtol > 0.0 ? rc.rtol : 1e-12;
  results["t0"] = prof->handoff_time();
  results["T_max"] = prof->t_max();
  results["c0"] = fit.c0;
  results["nu_fit"] = fit.nu_fit;
  results["difference_amplitude"] = fit.amplitude;
  results["audit_all_pass"] = audit.all_pass;
  for (const AuditRow& row : audit.rows)
    results["audit"].push_back(
        {{"name", row.name}, {"min_margin", row.min_margin}, {"argmin_t", row.argmin_t},
         {"pass", row.pass}});
  write_manifest(rc, "tune-metric", elapsed(start), results);
  if (!audit.all_pass) throw NumericError("inequality audit failed on the tuned profile");
  return 0;
}

int cmd_integrate(RunConfig rc) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(rc.out);
  const double T = rc.t_max > 0.0 ? rc.t_max : 100.0 * rc.params.r0;
  IntegratedProfile prof = make_profile(rc, T);
  const BundleIndex idx{rc.params.m, rc.params.n, rc.j};
  const LocalData d{rc.f0, std::isnan(rc.h0) ? 0.0 : rc.h0};
  IntegrateOptions iopt;
  if (rc.rtol > 0.0) iopt.rtol = rc.rtol;
  if (rc.atol > 0.0) iopt.atol = rc.atol;
  const double t0 = rc.t0 > 0.0 ? rc.t0 : 1e-3 * rc.params.r0;
  const ConnectionTrajectory traj =
      integrate_from_local(idx, d, prof, t0, T, rc.shoot.series_N, iopt);
  write_trajectory_csv(rc.out / "trajectory.csv", traj, prof);

  const char* exit_name = traj.exit == ConnectionTrajectory::Exit::reached_end ? "reached_end"
                          : traj.exit == ConnectionTrajectory::Exit::escaped   ? "escaped"
                                                                               : "step_failure";
  std::printf("integrated (m, n, j) = (%d, %d, %d), f0 = %s, h0 = %s: %zu steps to t = %s (%s)\n",
              idx.m, idx.n, idx.j, io::fmt17(d.f0).c_str(), io::fmt17(d.h0).c_str(),
              traj.ts.size(), io::fmt17(traj.t_end).c_str(), exit_name);

  json results;
  results["m"] = idx.m;
  results["n"] = idx.n;
  results["j"] = idx.j;
  results["f0"] = d.f0;
  results["h0"] = d.h0;
  results["beta"] = rc.params.beta;
  results["t0"] = traj.t0;
  results["t_end"] = traj.t_end;
  results["rtol"] = iopt.rtol;
  results["atol"] = iopt.atol;
  results["steps"] = traj.ts.size();
  results["exit"] = exit_name;
  results["trajectory_csv"] = "trajectory.csv";
  write_manifest(rc, "integrate", elapsed(start), results);
  if (traj.exit == ConnectionTrajectory::Exit::step_failure)
    throw NumericError("trajectory integration failed before t = " + io::fmt17(T));
  return 0;
}

int cmd_shoot(RunConfig rc) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(rc.out);
  IntegratedProfile prof = make_profile(rc, std::exp(rc.shoot.tau_end));
  ShootOptions sopt = rc.shoot;
  if (rc.rtol > 0.0) sopt.rtol = rc.rtol;
  if (rc.atol > 0.0) sopt.atol = rc.atol;

  ShootResult shot;
  if (rc.f0 == 0.0) {
    // Degenerate family member: f = f' = 0 forces the abelian solution and
    // bounded curvature needs h0 = 0 exactly, so there is nothing to tune.
    shot.f0 = 0.0;
    shot.h0 = 0.0;
    const BundleIndex idx{rc.params.m, rc.params.n, rc.j};
    IntegrateOptions iopt;
    iopt.rtol = sopt.rtol;
    iopt.atol = sopt.atol;
    const double t0 = rc.t0 > 0.0 ? rc.t0 : 1e-3 * rc.params.r0;
    shot.trajectory = integrate_from_local(idx, {0.0, 0.0}, prof, t0,
                                           std::exp(sopt.tau_end), sopt.series_N, iopt);
    shot.outcome = classify_trajectory(shot.trajectory, sopt.eps_conv, sopt.escape_norm);
  } else {
    shot = shoot_h0(rc.f0, prof, sopt, rc.jobs > 0 ? rc.jobs : io::hardware_jobs());
  }

  write_trajectory_csv(rc.out / "trajectory.csv", shot.trajectory, prof);
  write_trajectory_svg(rc.out / "trajectory.svg", shot.trajectory);

  double translate_dist = std::numeric_limits<double>::quiet_NaN();
  if (shot.outcome.cls == ShotClass::converged_plus ||
      shot.outcome.cls == ShotClass::converged_minus) {
    const int sign = shot.outcome.cls == ShotClass::converged_plus ? +1 : -1;
    translate_dist =
        far_field_translate_distance(shot.trajectory, sign, std::exp(shot.outcome.exit_tau));
  }

  std::printf("f0 = %s -> h0 = %s  [%s]\n", io::fmt17(shot.f0).c_str(),
              io::fmt17(shot.h0).c_str(), to_string(shot.outcome.cls));
  std::printf("distance to target %s at tau = %s; %d bisections, bracket width %s\n",
              io::fmt17(shot.outcome.distance).c_str(), io::fmt17(shot.outcome.exit_tau).c_str(),
              shot.bisections, io::fmt17(shot.bracket.second - shot.bracket.first).c_str());
  if (!std::isnan(translate_dist))
    std::printf("far-field C0 distance to a heteroclinic translate (last decade): %s\n",
                io::fmt17(translate_dist).c_str());

  json results;
  results["f0"] = shot.f0;
  results["h0"] = shot.h0;
  results["classification"] = to_string(shot.outcome.cls);
  results["distance"] = shot.outcome.distance;
  results["exit_tau"] = shot.outcome.exit_tau;
  results["bisections"] = shot.bisections;
  results["beta"] = rc.params.beta;
  if (!std::isnan(translate_dist)) results["translate_distance"] = translate_dist;
  results["trajectory_csv"] = "trajectory.csv";
  results["trajectory_svg"] = "trajectory.svg";
  write_manifest(rc, "shoot", elapsed(start), results);
  return 0;
}

int cmd_sweep(RunConfig rc) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(rc.out);
  IntegratedProfile prof = make_profile(rc, std::exp(rc.shoot.tau_end));
  ShootOptions sopt = rc.shoot;
  if (rc.rtol > 0.0) sopt.rtol = rc.rtol;
  if (rc.atol > 0.0) sopt.atol = rc.atol;
  const std::vector<SweepRow> rows = family_sweep(rc.f0_grid, prof, sopt, rc.jobs);

  io::CsvWriter csv(rc.out / "sweep.csv",
                    {"f0", "h0", "classification", "exit_tau", "distance", "max_curvature"});
  bool all_converged = true;
  for (const SweepRow& row : rows) {
    csv.raw_row({io::fmt17(row.f0), io::fmt17(row.h0), to_string(row.cls),
                 io::fmt17(row.exit_tau), io::fmt17(row.distance),
                 io::fmt17(row.max_curvature)});
    std::printf("f0 = %-22s h0 = %-22s %-16s dist %-12.4g |F_A| %.4g\n",
                io::fmt17(row.f0).c_str(), io::fmt17(row.h0).c_str(), to_string(row.cls),
                row.distance, row.max_curvature);
    if (row.cls != ShotClass::converged_plus && row.cls != ShotClass::converged_minus)
      all_converged = false;
  }
  csv.flush();

  json results;
  results["rows"] = rows.size();
  results["beta"] = rc.params.beta;
  results["all_converged"] = all_converged;
  results["sweep_csv"] = "sweep.csv";
  write_manifest(rc, "sweep", elapsed(start), results);
  return 0;
}

int cmd_verify(RunConfig rc) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(rc.out);
  verify::VerifyOptions vo;
  vo.seed = rc.seed;
  vo.jobs = rc.jobs;
  vo.quick = rc.quick;
  vo.coefficient_nudge = rc.nudge;
  const std::vector<verify::CheckResult> checks = verify::run_verification(vo);
  std::fputs(verify::render_table(checks).c_str(), stdout);

  json results = json::array();
  bool all_pass = true;
  for (const verify::CheckResult& c : checks) {
    results.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"measured", c.measured},
                       {"tolerance", c.tolerance},
                       {"seconds", c.seconds},
                       {"detail", c.detail}});
    all_pass = all_pass && c.pass;
  }
  write_manifest(rc, "verify", elapsed(start), results);
  return all_pass ? 0 : 1;
}

int cmd_plot(RunConfig rc) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(rc.out);
  if (rc.csv.empty()) throw ConfigError("plot needs csv=PATH in the config");
  const io::CsvTable table = io::read_csv(rc.csv);
  if (table.header.size() < 5 || table.header[0] != "t")
    throw ConfigError("plot input must be a trajectory CSV starting with (t, f, fp, g, h)");
  io::SvgSeries sf{"f", {}, {}, "#1f6fb2"}, sfp{"f'", {}, {}, "#b2471f"},
      sg{"g", {}, {}, "#2a8f3c"}, sh{"h", {}, {}, "#7a3cb2"};
  for (const std::vector<double>& row : table.rows) {
    sf.x.push_back(row[0]);
    sfp.x.push_back(row[0]);
    sg.x.push_back(row[0]);
    sh.x.push_back(row[0]);
    sf.y.push_back(row[1]);
    sfp.y.push_back(row[2]);
    sg.y.push_back(row[3]);
    sh.y.push_back(row[4]);
  }
  io::SvgOptions o;
  o.title = "reduced connection components";
  o.xlabel = "log10 t";
  o.ylabel = "value";
  o.xlog = true;
  io::write_svg_lines(rc.out / "plot.svg", {sf, sfp, sg, sh}, o);
  std::printf("plotted %zu rows from %s\n", table.rows.size(), rc.csv.c_str());

  json results;
  results["rows"] = table.rows.size();
  results["input"] = rc.csv;
  results["plot_svg"] = "plot.svg";
  write_manifest(rc, "plot", elapsed(start), results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cohomogeneity-one instanton constructor"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  int seed_flag = -1, jobs_flag = 0;
  double tol_flag = 0.0;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed_flag, "random seed for property-style checks");
  app.add_option("--tol", tol_flag, "relative tolerance for the integrators");
  app.add_option("--jobs", jobs_flag, "worker threads (0: hardware count)");

  CLI::App* c_fp = app.add_subcommand("fixed-points", "linearizations of the cone flow");
  CLI::App* c_tune = app.add_subcommand("tune-metric", "tune beta and export the profile");
  CLI::App* c_int = app.add_subcommand("integrate", "integrate one local solution");
  CLI::App* c_shoot = app.add_subcommand("shoot", "tune h0 for one f0");
  CLI::App* c_sweep = app.add_subcommand("sweep", "shoot a whole f0 grid");
  CLI::App* c_verify = app.add_subcommand("verify", "run the verification suite");
  CLI::App* c_plot = app.add_subcommand("plot", "replot a trajectory CSV");
  for (CLI::App* sub : {c_fp, c_tune, c_int, c_shoot, c_sweep, c_verify, c_plot})
    sub->fallthrough();  // let the shared flags appear after the verb

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig rc = load_config(config_path, out_dir, seed_flag, tol_flag, jobs_flag);
    if (c_fp->parsed()) return cmd_fixed_points(std::move(rc));
    if (c_tune->parsed()) return cmd_tune_metric(std::move(rc));
    if (c_int->parsed()) return cmd_integrate(std::move(rc));
    if (c_shoot->parsed()) return cmd_shoot(std::move(rc));
    if (c_sweep->parsed()) return cmd_sweep(std::move(rc));
    if (c_verify->parsed()) return cmd_verify(std::move(rc));
    if (c_plot->parsed()) return cmd_plot(std::move(rc));
    return 2;  // unreachable with require_subcommand(1)
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
