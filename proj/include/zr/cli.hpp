#pragma once

// Command implementations behind the zrlab binary: coefficient tables,
// soliton profiles, simulation runs, the verification certificates, and
// energy monitoring. Kept in a header so the test suite can drive the
// commands directly.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "zr/config.hpp"
#include "zr/diagnostics.hpp"
#include "zr/initial.hpp"
#include "zr/snapshot.hpp"

namespace zr {

struct CliOptions {
  std::string config_path;
  std::string out_dir;  // overrides the config's output dir when set
  std::uint64_t seed = 1;
  bool quiet = false;
};

namespace cli_detail {

inline RunConfig load_config(const CliOptions& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw IoError("cannot open config " + opt.config_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  RunConfig cfg = parse_config(text);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  return cfg;
}

inline std::string num(double x) { return detail::fmt_double(x); }

inline FieldState initial_state(const RunConfig& cfg, const Scenario& sc) {
  using IK = RunConfig::InitialKind;
  IK kind = cfg.initial.kind;
  if (kind == IK::def) kind = sc.is_perturbed() ? IK::zero : IK::trig;
  switch (kind) {
    case IK::zero:
      return FieldState(sc.grid);
    case IK::trig:
      return make_trig_state(sc.grid, cfg.initial.amplitude);
    case IK::bump:
      return make_bump_state(sc.grid, cfg.initial.amplitude, cfg.initial.conc,
                             cfg.initial.carrier);
    case IK::random:
      return make_random_state(sc.grid, cfg.initial.amplitude,
                               cfg.initial.seed);
    case IK::soliton:
      return soliton_initial_state(cfg.resolve_soliton(sc.coeffs), sc.grid,
                                   false);
    case IK::file:
      return read_snapshot_file(cfg.initial.file);
    default:
      throw ConfigError("initial: unresolved kind");
  }
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir);
}

inline std::ofstream open_out(const std::string& dir, const std::string& name) {
  ensure_dir(dir);
  std::ofstream os(dir + "/" + name);
  if (!os) throw IoError("cannot open " + dir + "/" + name);
  return os;
}

}  // namespace cli_detail

// --- coeffs ----------------------------------------------------------------

inline int cmd_coeffs(const CliOptions& opt, std::ostream& out = std::cout) {
  const RunConfig cfg = cli_detail::load_config(opt);
  const ZRCoefficients zc = cfg.resolve_coeffs();
  using cli_detail::num;
  out << "sigma1 = " << num(zc.sigma1) << "\n"
      << "sigma2 = " << num(zc.sigma2) << "\n"
      << "sigma3 = " << num(zc.sigma3) << "\n"
      << "delta = " << num(zc.delta) << "\n"
      << "W = " << num(zc.W) << "\n"
      << "D = " << num(zc.D) << "\n"
      << "M = " << num(zc.M) << "\n"
      << "eps = " << num(zc.eps) << "\n"
      << "c1 = " << num(zc.c1) << "\n"
      << "c2 = " << num(zc.c2) << "\n"
      << "c3 = " << num(zc.c3) << "\n"
      << "elliptic = " << (zc.elliptic ? "true" : "false") << "\n";
  if (cfg.physical) {
    const auto om =
        omega_derivatives(cfg.physical->k, cfg.physical->gamma, cfg.physical->mu);
    const auto fc =
        focusing_condition(cfg.physical->k, cfg.physical->gamma, cfg.physical->mu);
    out << "omega = " << num(om.omega) << "\n"
        << "omega_prime = " << num(om.omega_prime) << "\n"
        << "omega_double_prime = " << num(om.omega_double_prime) << "\n"
        << "focusing_exact = " << (fc.exact ? "true" : "false") << "\n"
        << "focusing_asymptotic = " << (fc.asymptotic ? "true" : "false")
        << "\n";
  }
  return 0;
}

// --- soliton ---------------------------------------------------------------

inline int cmd_soliton(const CliOptions& opt, std::ostream& log = std::cout) {
  const RunConfig cfg = cli_detail::load_config(opt);
  const ZRCoefficients zc = cfg.resolve_coeffs();
  if (!cfg.soliton) throw ConfigError("soliton: config needs a [soliton] section");
  const SolitonClass cls = classify(cfg.soliton->c, cfg.soliton->lambda, zc);
  if (cls == SolitonClass::none) {
    log << "verdict = none\n";
    return 1;
  }
  const SolitonSpec s = cfg.resolve_soliton(zc);
  log << "verdict = " << (s.family == SolitonFamily::bright ? "bright" : "dark")
      << "\n"
      << "a = " << cli_detail::num(s.a) << "\n"
      << "b = " << cli_detail::num(s.b) << "\n"
      << "amp = " << cli_detail::num(s.amp) << "\n"
      << "width = " << cli_detail::num(s.width) << "\n"
      << "phase_rate = " << cli_detail::num(s.phase_rate) << "\n";

  std::ofstream os = cli_detail::open_out(cfg.out_dir, "profile.csv");
  os << "x,re_psi,im_psi,rho,dphi\n";
  const Grid g = cfg.dim == 1 ? cfg.resolve_grid()
                              : Grid::line(cfg.nx, cfg.lx);
  for (int i = 0; i < g.nx; ++i) {
    const double u = g.x(i) - g.lx / 2.0;
    const LineSolitonValue v = line_soliton(s, u, 0.0, false);
    os << cli_detail::num(u) << ',' << cli_detail::num(v.psi.real()) << ','
       << cli_detail::num(v.psi.imag()) << ',' << cli_detail::num(v.rho) << ','
       << cli_detail::num(v.dphi) << "\n";
  }
  return 0;
}

// --- simulate / energy -----------------------------------------------------

namespace cli_detail {

inline void write_diag_header(std::ostream& os) {
  os << "time,mass,hamiltonian,perturbed_energy,coercivity_ok,eps_star,"
     << "mass_drift,hamiltonian_drift,perturbed_drift";
  for (int i = 1; i <= 9; ++i) os << ",term" << i;
  os << "\n";
}

inline void write_diag_row(std::ostream& os, const EnergyReport& r,
                           const EnergyReport& base) {
  os << num(r.time) << ',' << num(r.mass) << ',' << num(r.hamiltonian) << ',';
  if (r.perturbed_energy) os << num(*r.perturbed_energy);
  os << ',' << (r.coercivity_ok ? 1 : 0) << ',';
  if (r.eps_star) os << num(*r.eps_star);
  os << ',' << num(relative_drift(r.mass, base.mass)) << ','
     << num(relative_drift(r.hamiltonian, base.hamiltonian)) << ',';
  if (r.perturbed_energy && base.perturbed_energy)
    os << num(relative_drift(*r.perturbed_energy, *base.perturbed_energy));
  for (double t : r.perturbed_terms) os << ',' << num(t);
  os << "\n";
}

struct MonitoredRun {
  RunResult result;
  std::vector<EnergyReport> series;
};

inline MonitoredRun monitored_run(const RunConfig& cfg, bool with_coercivity) {
  const Scenario sc = cfg.to_scenario();
  const FieldState fs0 = initial_state(cfg, sc);
  const SolitonBackground* bg =
      sc.background ? &*sc.background : nullptr;
  const double lambda = bg ? bg->spec.lambda : 0.0;
  // Coercivity applies in the stationary dark regime only.
  bool coer = with_coercivity && bg && bg->gauged &&
              bg->spec.family == SolitonFamily::dark &&
              sc.coeffs.sigma2 > sc.coeffs.W * (sq(sc.coeffs.M) + sq(sc.coeffs.D)) &&
              sq(sc.coeffs.sigma3) / (4.0 * sc.coeffs.delta) - lambda > 0.0;
  MonitoredRun mr;
  RunOptions ro;
  ro.diag_cadence = cfg.cadence;
  ro.snapshot_times = cfg.snapshot_times;
  ro.observer = [&](const FieldState& fs) {
    mr.series.push_back(energy_report(fs, sc.coeffs, bg, lambda, coer));
  };
  mr.result = run(sc, fs0, ro);
  return mr;
}

}  // namespace cli_detail

inline int cmd_simulate(const CliOptions& opt, std::ostream& log = std::cout) {
  const RunConfig cfg = cli_detail::load_config(opt);
  cli_detail::MonitoredRun mr = cli_detail::monitored_run(cfg, true);

  std::ofstream os = cli_detail::open_out(cfg.out_dir, "diagnostics.csv");
  cli_detail::write_diag_header(os);
  for (const EnergyReport& r : mr.series)
    cli_detail::write_diag_row(os, r, mr.series.front());
  for (std::size_t i = 0; i < mr.result.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%03zu.snap", i);
    write_snapshot_file(mr.result.snapshots[i],
                        cfg.out_dir + "/" + name);
  }
  if (!opt.quiet) {
    log << "steps = " << mr.result.steps << "\n"
        << "snapshots = " << mr.result.snapshots.size() << "\n"
        << "blow_up = " << (mr.result.blew_up ? "true" : "false") << "\n";
  }
  return mr.result.blew_up ? 1 : 0;
}

inline int cmd_energy(const CliOptions& opt, std::ostream& log = std::cout) {
  const RunConfig cfg = cli_detail::load_config(opt);
  cli_detail::MonitoredRun mr = cli_detail::monitored_run(cfg, true);
  std::ofstream os = cli_detail::open_out(cfg.out_dir, "energy.csv");
  cli_detail::write_diag_header(os);
  for (const EnergyReport& r : mr.series)
    cli_detail::write_diag_row(os, r, mr.series.front());
  const DriftSummary ds = drift_report(mr.series);
  if (!opt.quiet) {
    log << "mass_drift = " << cli_detail::num(ds.mass_drift) << "\n"
        << "hamiltonian_drift = " << cli_detail::num(ds.hamiltonian_drift)
        << "\n"
        << "perturbed_drift = " << cli_detail::num(ds.perturbed_drift) << "\n"
        << "coercivity_all = " << (ds.coercivity_all ? "true" : "false") << "\n"
        << "kappa = " << cli_detail::num(ds.kappa) << "\n";
  }
  return (ds.coercivity_all && !mr.result.blew_up) ? 0 : 1;
}

// --- verify ----------------------------------------------------------------

struct CertRow {
  std::string check;
  std::string grid;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Runs the reformulation certificates on the config's coefficient set:
// matrix structure, the matrix-assembled right-hand-side identity, the
// intensity-transport identity's convergence order, the prepared-V
// divergence constraint, and the recovery-chain equivalence.
inline std::vector<CertRow> run_verification(const RunConfig& cfg,
                                             std::uint64_t seed) {
  std::vector<CertRow> rows;
  const ZRCoefficients zc = cfg.resolve_coeffs();
  Grid g = cfg.resolve_grid();
  if (g.dim != 2) throw ConfigError("verify: needs a 2d grid");
  char gbuf[32];
  std::snprintf(gbuf, sizeof gbuf, "%dx%d", g.nx, g.ny);
  const std::string gs = gbuf;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  // Background for the perturbed-side checks, when configured.
  std::optional<SolitonBackground> bg;
  if (cfg.soliton) {
    SolitonSpec spec = cfg.resolve_soliton(zc);
    if (spec.c == 0.0) bg = make_background(spec, g, true);
  }

  // Matrix structure at random samples.
  {
    std::vector<std::array<double, 9>> us(1000);
    for (auto& u : us)
      for (double& x : u) x = unif(rng);
    std::vector<BackgroundPoint> bps;
    if (bg) {
      const HyperbolicState Ur = background_hyperbolic_state(*bg, zc);
      const double s = std::sqrt(zc.delta * zc.sigma1);
      const RealField dxxfr = deriv(Ur.u[4], 0, 2);
      const RealField dxdr = dx(Ur.u[6]);
      for (int i = 0; i < g.nx; i += std::max(1, g.nx / 64)) {
        BackgroundPoint bp;
        bp.fr = Ur.u[4].at(i, 0);
        bp.gr = 0.0;
        bp.hr1 = Ur.u[0].at(i, 0) / s;
        bp.dxxfr = dxxfr.at(i, 0);
        bp.dr = Ur.u[6].at(i, 0);
        bp.dxdr = dxdr.at(i, 0);
        bps.push_back(bp);
      }
    }
    const StructureCertificate c =
        verify_matrix_structure(us, bps, zc, cfg.eps.value_or(zc.eps),
                                zc.sigma3);
    rows.push_back({"matrix_symmetry", gs, c.max_asymmetry, 0.0,
                    c.symmetry_ok});
    rows.push_back({"matrix_skew", gs, c.max_skew_defect, 0.0, c.skew_ok});
    rows.push_back({"matrix_pattern", gs,
                    (c.a1_pattern_ok && c.b1_pattern_ok) ? 0.0 : 1.0, 0.0,
                    c.a1_pattern_ok && c.b1_pattern_ok});
  }

  // The materialized matrices must reassemble the right-hand side.
  {
    HyperbolicState U(g);
    for (auto& f : U.u) f = detail::random_band_real(g, 0.5, rng);
    const double eps = cfg.eps.value_or(zc.eps);
    const HyperbolicState direct = symmetric_rhs(U, nullptr, zc, eps, zc.sigma3);
    const HyperbolicState assembled =
        symmetric_rhs_assembled(U, nullptr, zc, eps, zc.sigma3);
    double diff = 0.0, scale = 1e-30;
    for (int k = 0; k < 9; ++k) {
      for (std::size_t i = 0; i < direct.u[k].size(); ++i)
        diff = std::max(diff,
                        std::abs(direct.u[k].v[i] - assembled.u[k].v[i]));
      scale = std::max(scale, linf(direct.u[k]));
    }
    rows.push_back(
        {"rhs_matrix_identity_free", gs, diff / scale, 1e-9, diff / scale <= 1e-9});
    if (bg) {
      const HyperbolicState dp = symmetric_rhs(U, &*bg, zc, 1.0, zc.sigma3);
      const HyperbolicState ap =
          symmetric_rhs_assembled(U, &*bg, zc, 1.0, zc.sigma3);
      double d2 = 0.0, s2 = 1e-30;
      for (int k = 0; k < 9; ++k) {
        for (std::size_t i = 0; i < dp.u[k].size(); ++i)
          d2 = std::max(d2, std::abs(dp.u[k].v[i] - ap.u[k].v[i]));
        s2 = std::max(s2, linf(dp.u[k]));
      }
      rows.push_back({"rhs_matrix_identity_perturbed", gs, d2 / s2, 1e-9,
                      d2 / s2 <= 1e-9});
    }
  }

  // Intensity-transport identity converges at the scheme's order.
  {
    Scenario sc;
    sc.kind = ScenarioKind::free_run;
    sc.coeffs = zc;
    sc.grid = g;
    sc.eps = cfg.eps.value_or(zc.eps);
    sc.t_end = 0.2;
    const FieldState fs0 = make_trig_state(g, 0.3);
    std::array<double, 3> res{};
    double dt = sc.t_end / 8.0;
    for (int k = 0; k < 3; ++k) {
      sc.dt = dt;
      RunOptions ro;
      ro.store_trajectory = true;
      const RunResult rr = run(sc, fs0, ro);
      res[static_cast<std::size_t>(k)] =
          identity_star_residual(rr.trajectory, zc, sc.eps, sc.sigma3_eff());
      dt /= 2.0;
    }
    const double order = std::log2(res[1] / res[2]);
    rows.push_back({"identity_star_order", gs, order, 1.8, order >= 1.8});
  }

  // Prepared-V divergence constraint on random smooth data.
  {
    FieldState fs = make_random_state(g, 0.7, seed + 17);
    const auto V0 = init_V(fs, zc);
    const RealField div = dx(V0[0]) + dy(V0[1]);
    const RealField lap_phi = laplacian(fs.phi);
    const RealField rho_x = dx(fs.rho);
    double diff = 0.0, scale = 1e-30;
    for (std::size_t i = 0; i < div.size(); ++i) {
      const double want =
          zc.W * zc.M * (-lap_phi.v[i] - zc.D / sq(zc.M) * rho_x.v[i]);
      diff = std::max(diff, std::abs(div.v[i] - want));
      scale = std::max(scale, std::abs(want));
    }
    rows.push_back(
        {"v0_constraint", gs, diff / scale, 1e-10, diff / scale <= 1e-10});
  }

  // Recovery chain: symmetric-form evolution matches the direct one.
  {
    Scenario sc;
    sc.kind = ScenarioKind::free_run;
    sc.coeffs = zc;
    sc.grid = g;
    sc.eps = cfg.eps.value_or(zc.eps);
    sc.dt = 0.4 * Scenario::default_dt(g, zc);
    sc.t_end = 25 * sc.dt;
    const FieldState fs0 = make_trig_state(g, 0.25);
    const RunResult direct = run(sc, fs0);
    Scenario scs = sc;
    scs.kind = ScenarioKind::symmetric_form;
    const RunResult sym = run(scs, fs0);
    Scenario half = sc;
    half.dt = sc.dt / 2.0;
    Scenario shalf = scs;
    shalf.dt = scs.dt / 2.0;
    // Each evolution's own dt-refinement error bounds its distance to the
    // exact semidiscrete flow; the two runs must agree within that budget.
    const double selfconv =
        state_l2_diff(direct.final_state, run(half, fs0).final_state) +
        state_l2_diff(sym.final_state, run(shalf, fs0).final_state);
    const double diff =
        state_l2_diff(direct.final_state, sym.final_state);
    rows.push_back({"reconstruction_equivalence", gs, diff, 10.0 * selfconv,
                    diff <= 10.0 * selfconv});
    double wmax = 0.0;
    for (double w : sym.w_norms) wmax = std::max(wmax, w);
    rows.push_back({"w_consistency", gs, wmax, 1e-8, wmax <= 1e-8});
  }
  return rows;
}

inline int cmd_verify(const CliOptions& opt, std::ostream& log = std::cout) {
  const RunConfig cfg = cli_detail::load_config(opt);
  const std::vector<CertRow> rows = run_verification(cfg, opt.seed);
  std::ofstream os = cli_detail::open_out(cfg.out_dir, "certificates.csv");
  os << "check,grid,value,tolerance,pass\n";
  bool all = true;
  for (const CertRow& r : rows) {
    os << r.check << ',' << r.grid << ',' << cli_detail::num(r.value) << ','
       << cli_detail::num(r.tolerance) << ',' << (r.pass ? 1 : 0) << "\n";
    all = all && r.pass;
    if (!opt.quiet)
      log << (r.pass ? "pass " : "FAIL ") << r.check << " value=" <<
          cli_detail::num(r.value) << " tol=" << cli_detail::num(r.tolerance)
          << "\n";
  }
  return all ? 0 : 1;
}

}  // namespace zr
