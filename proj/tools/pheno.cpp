// pheno: command-line front end for the phenotype-structured tumour model.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pheno/asymptotics.hpp"
#include "pheno/errors.hpp"
#include "pheno/io.hpp"
#include "pheno/model.hpp"
#include "pheno/ocp_direct.hpp"
#include "pheno/ode_reduce.hpp"
#include "pheno/pmp.hpp"
#include "pheno/strategies.hpp"

namespace fs = std::filesystem;
using namespace pheno;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kInfeasible = 3, kNumerical = 4 };

struct Global {
  std::string preset;
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  std::size_t nx = 0;
  double dt = 0;
};

// Resolved run settings: CLI flags win over the config file, which wins over defaults.
struct Ctx {
  std::string preset_name;
  ModelParams params;
  std::size_t nx = 201;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  RunConfig cfg;
  fs::path out;
};

Ctx resolve(const Global& g) {
  Ctx c;
  json raw = json::object();
  if (!g.config.empty()) {
    std::ifstream in(g.config);
    if (!in) throw ConfigError("config: cannot open '" + g.config + "'");
    try {
      in >> raw;
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: parse error: ") + e.what());
    }
  }
  if (!g.preset.empty()) raw["preset"] = g.preset;
  c.cfg = config_from_json(raw);
  c.preset_name = c.cfg.preset;
  c.params = c.cfg.params;
  c.nx = g.nx ? g.nx : c.cfg.nx;
  c.dt = g.dt > 0 ? g.dt : c.cfg.dt;
  c.seed = g.seed ? g.seed : c.cfg.seed;
  c.out = g.out;
  return c;
}

RunManifest manifest(const Ctx& c, const std::string& cmd) {
  RunManifest m;
  m.command = cmd;
  m.preset = c.preset_name;
  m.params = params_to_json(c.params);
  m.nx = c.nx;
  m.dt = c.dt;
  m.seed = c.seed;
  return m;
}

void emit_trajectory(const fs::path& dir, const Trajectory& tr, RunManifest& m) {
  fs::create_directories(dir);
  std::ostringstream a, b, p;
  write_totals_csv(a, tr);
  write_snapshots_csv(b, tr);
  write_plot_bundle(p, tr);
  write_text(dir / "totals.csv", a.str());
  write_text(dir / "snapshots.csv", b.str());
  write_text(dir / "plot_data.csv", p.str());
  m.artifacts.insert(m.artifacts.end(), {"totals.csv", "snapshots.csv", "plot_data.csv"});
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const auto& sn = tr.snapshots[k];
    std::ostringstream os;
    os << "# t=" << fmt_num(sn.t) << "\nx[phenotype],n_H[cells/phenotype],n_C[cells/phenotype]\n";
    for (std::size_t i = 0; i < sn.n_H.size(); ++i)
      os << fmt_num(sn.n_H.grid->x(i)) << ',' << fmt_num(sn.n_H.values[i]) << ',' << fmt_num(sn.n_C.values[i]) << '\n';
    const std::string name = "snapshot_" + std::to_string(k) + ".csv";
    write_text(dir / name, os.str());
    m.artifacts.push_back(name);
  }
}

void finish(const fs::path& dir, RunManifest& m, std::chrono::steady_clock::time_point t0) {
  fs::create_directories(dir);
  m.artifacts.push_back("manifest.json");
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.write(dir);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--T: malformed number '" + item + "'");
    }
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phenotype-structured tumour model: simulation, asymptotics and optimal dosing"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--preset", g.preset, "Parameter preset (lorz2013-modified, lorz2013-legacy)");
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--seed", g.seed, "Seed for randomized multistarts");
  app.add_option("--nx", g.nx, "Phenotype grid nodes");
  app.add_option("--dt", g.dt, "Time step");

  std::function<int()> action;
  const auto t0 = std::chrono::steady_clock::now();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Integrate the IDE system under a constant dose");
  double s_u1 = 0, s_u2 = 0, s_T = 10;
  int s_snap = 200;
  bool s_corr = false;
  sim->add_option("--u1", s_u1, "Cytotoxic dose");
  sim->add_option("--u2", s_u2, "Cytostatic dose");
  sim->add_option("--T", s_T, "Horizon");
  sim->add_option("--snapshots", s_snap, "Number of density snapshots");
  sim->add_flag("--corrector", s_corr, "Heun corrector on the totals");
  sim->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      if (c.cfg.dose && !sim->count("--u1") && !sim->count("--u2")) {
        s_u1 = c.cfg.dose->u1;
        s_u2 = c.cfg.dose->u2;
      }
      if (c.cfg.T && !sim->count("--T")) s_T = *c.cfg.T;
      auto [h, cc] = paper_initial(make_grid(c.nx));
      SimOptions so;
      so.dt = c.dt;
      so.n_snapshots = s_snap;
      so.corrector = s_corr;
      const auto tr = simulate(c.params, h, cc, ControlSchedule::constant({s_u1, s_u2}, s_T), s_T, so);
      RunManifest m = manifest(c, "simulate");
      m.extra = {{"u", {s_u1, s_u2}}, {"T", s_T}, {"corrector", s_corr}};
      emit_trajectory(c.out, tr, m);
      finish(c.out, m, t0);
      std::cout << json{{"rho_H_final", tr.rho_H.back()}, {"rho_C_final", tr.rho_C.back()}}.dump() << "\n";
      return kOk;
    };
  });

  // asymptotics
  auto* asy = app.add_subcommand("asymptotics", "Limit intensities, equilibria and Lyapunov data");
  double a_u1 = 0, a_u2 = 0;
  bool a_scan = false;
  asy->add_option("--u1", a_u1);
  asy->add_option("--u2", a_u2);
  asy->add_flag("--scan", a_scan, "5x5 dose grid of equilibria");
  asy->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      json out;
      if (a_scan) {
        out = json::array();
        for (int i = 0; i < 5; ++i)
          for (int j = 0; j < 5; ++j) out.push_back(equilibrium(c.params, {c.params.u1_max * i / 4, c.params.u2_max * j / 4}).to_json());
      } else {
        out = equilibrium(c.params, {a_u1, a_u2}).to_json();
        const auto M = lyapunov_matrix(c.params);
        out["lyapunov"] = {{"M", {{M[0][0], M[0][1]}, {M[1][0], M[1][1]}}},
                           {"det", det2(M)},
                           {"det_formula", lyapunov_det_formula(c.params)}};
      }
      std::cout << out.dump(2) << "\n";
      return kOk;
    };
  });

  // reduce
  auto* red = app.add_subcommand("reduce", "IDE vs two-Dirac ODE comparison and curability check");
  double r_u1 = 0, r_u2 = 0.5, r_T1 = 40, r_T2 = 5;
  std::string r_phase2 = "mtd";
  red->add_option("--u1", r_u1);
  red->add_option("--u2", r_u2);
  red->add_option("--T1", r_T1, "Burn-in at u_bar");
  red->add_option("--T2", r_T2, "Second phase length");
  red->add_option("--phase2", r_phase2, "Second phase dosing: mtd | holiday")->check(CLI::IsMember({"mtd", "holiday"}));
  red->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      GapOptions go;
      go.nx = c.nx;
      go.dt = c.dt;
      const auto sched = r_phase2 == "mtd" ? mtd_schedule(c.params, r_T2) : constant_schedule({r_u1, r_u2}, r_T2);
      const auto gap = reduction_gap(c.params, {r_u1, r_u2}, r_T1, sched, r_T2, go);
      const auto cr = check_decreasing(c.params, {r_u1, r_u2});
      json out{{"sup_gap", gap.sup_gap}, {"x_H", gap.x_H}, {"x_C", gap.x_C},
               {"curability", {{"drho_H", cr.drho_H}, {"drho_C", cr.drho_C}, {"dratio", cr.dratio}, {"ok", cr.ok()}}}};
      if (!c.out.empty()) {
        fs::create_directories(c.out);
        std::ostringstream os;
        os << "t[time],gap_H[cells],gap_C[cells]\n";
        for (std::size_t k = 0; k < gap.t.size(); ++k)
          os << fmt_num(gap.t[k]) << ',' << fmt_num(gap.gap_H[k]) << ',' << fmt_num(gap.gap_C[k]) << '\n';
        write_text(c.out / "gap.csv", os.str());
        RunManifest m = manifest(c, "reduce");
        m.artifacts.push_back("gap.csv");
        m.extra = out;
        finish(c.out, m, t0);
      }
      std::cout << out.dump(2) << "\n";
      return kOk;
    };
  });

  // strategy
  auto* str = app.add_subcommand("strategy", "Run a dosing strategy");
  std::string st_name = "two-phase";
  double st_T = 60, st_T2 = 20, st_u1 = 0, st_u2 = 0.5;
  const auto kinds = CLI::IsMember({"mtd", "mtd-open", "constant", "qp1", "qp2", "two-phase"});
  auto* st_pos = str->add_option("name", st_name, "mtd | mtd-open | constant | qp1 | qp2 | two-phase")->check(kinds);
  auto* st_kind = str->add_option("--kind", st_name, "Same as the positional name")->check(kinds);
  st_pos->excludes(st_kind);
  str->add_option("--T", st_T);
  str->add_option("--T2-max", st_T2);
  str->add_option("--u1", st_u1, "Holiday / phase-1 cytotoxic dose");
  str->add_option("--u2", st_u2, "Holiday / phase-1 cytostatic dose");
  str->callback([&] {
    action = [&] {
      if (!st_pos->count() && !st_kind->count()) throw ConfigError("strategy: a kind is required");
      Ctx c = resolve(g);
      auto [h, cc] = paper_initial(make_grid(c.nx));
      SimOptions so;
      so.dt = c.dt;
      RunManifest m = manifest(c, "strategy " + st_name);
      std::vector<ArcKind> arc_kinds{ArcKind::holiday};
      const DosePair u{st_u1, st_u2};
      Trajectory tr;
      json extra{{"T", st_T}, {"u", {st_u1, st_u2}}};
      if (st_name == "two-phase") {
        TwoPhaseOptions o;
        o.nx = c.nx;
        o.dt = c.dt;
        const auto plan = two_phase_plan(c.params, h, cc, u, st_T, st_T2, o);
        tr = plan.traj;
        extra["plan"] = plan.arcs_json();
        arc_kinds = {ArcKind::phase1, ArcKind::hc_boundary, ArcKind::mtd, ArcKind::h_boundary};
      } else if (st_name == "mtd") {
        tr = simulate_closed_loop(c.params, h, cc, mtd_policy(c.params), st_T, so);
        arc_kinds = {ArcKind::mtd, ArcKind::h_boundary};
      } else if (st_name == "mtd-open") {
        tr = simulate(c.params, h, cc, mtd_schedule(c.params, st_T), st_T, so);
        arc_kinds = {ArcKind::mtd};
      } else if (st_name == "constant") {
        tr = simulate(c.params, h, cc, ControlSchedule::constant(u, st_T), st_T, so);
      } else if (st_name == "qp1" || st_name == "qp2") {
        const Policy pol = st_name == "qp1" ? quasi_periodic_policy_1(c.params, u) : quasi_periodic_policy_2(c.params, u);
        tr = simulate_closed_loop(c.params, h, cc, pol, st_T, so);
        extra["cycle_minima"] = cycle_minima(tr);
        arc_kinds = {ArcKind::holiday, ArcKind::mtd, ArcKind::h_boundary};
        extra["hysteresis"] = pol.hysteresis;
      } else {
        throw ConfigError("strategy: unknown name '" + st_name + "'");
      }
      const auto rep = constraint_report(tr, c.params, 1e-4);
      extra["rho_C_final"] = tr.rho_C.back();
      extra["min_g1_margin"] = rep.min_g1_margin;
      extra["min_g2_margin"] = rep.min_g2_margin;
      m.extra = extra;
      emit_trajectory(c.out, tr, m);
      json arcs = json::array();
      for (const auto& a : extract_arcs(tr, arc_kinds))
        arcs.push_back({{"kind", arc_name(a.kind)}, {"t_start", a.t_start}, {"t_end", a.t_end}});
      write_json(c.out / "arcs.json", arcs);
      m.artifacts.push_back("arcs.json");
      finish(c.out, m, t0);
      std::cout << extra.dump(2) << "\n";
      return kOk;
    };
  });

  // pmp
  auto* pmp = app.add_subcommand("pmp", "ODE optimal-control layer");
  pmp->require_subcommand(1);
  auto* pchk = pmp->add_subcommand("check", "Evaluate the structural hypotheses at u_bar");
  double p_u1 = 0, p_u2 = 0.5, p_rho_H0 = -1, p_T2 = 3;
  bool p_force = false;
  pchk->add_option("--u1", p_u1);
  pchk->add_option("--u2", p_u2);
  pchk->add_option("--rho-H0", p_rho_H0, "Healthy reference total (default: equilibrium)");
  pchk->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      std::optional<double> r0;
      if (p_rho_H0 > 0) r0 = p_rho_H0;
      std::cout << check_hypotheses(c.params, {p_u1, p_u2}, r0).to_json().dump(2) << "\n";
      return kOk;
    };
  });
  auto* pph = pmp->add_subcommand("phase2", "Second-phase arc synthesis");
  pph->add_option("--u1", p_u1);
  pph->add_option("--u2", p_u2);
  pph->add_option("--T2", p_T2);
  pph->add_flag("--force", p_force, "Proceed when hypotheses fail");
  pph->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      SynthesisOptions so;
      so.require_hypotheses = !p_force;
      so.dt = c.dt;
      const auto r = synthesize_second_phase(c.params, {p_u1, p_u2}, p_T2, so);
      fs::create_directories(c.out);
      std::ostringstream os;
      os << "t[time],rho_H[cells],rho_C[cells],u1[dose],u2[dose],arc[-],p_H[-],p_C[-],phi_1[-]\n";
      const char* names[] = {"", "hc-boundary", "mtd", "h-boundary"};
      for (std::size_t k = 0; k < r.traj.size(); ++k)
        os << fmt_num(r.traj.t[k]) << ',' << fmt_num(r.traj.rho_H[k]) << ',' << fmt_num(r.traj.rho_C[k]) << ','
           << fmt_num(r.traj.u1[k]) << ',' << fmt_num(r.traj.u2[k]) << ',' << names[r.traj.mode[k]] << ','
           << fmt_num(r.p_H[k]) << ',' << fmt_num(r.p_C[k]) << ',' << fmt_num(r.phi_1[k]) << '\n';
      write_text(c.out / "phase2.csv", os.str());
      write_json(c.out / "phase2.json", r.to_json());
      RunManifest m = manifest(c, "pmp phase2");
      m.artifacts = {"phase2.csv", "phase2.json"};
      m.extra = {{"u_bar", {p_u1, p_u2}}, {"T2", p_T2}, {"force", p_force}};
      finish(c.out, m, t0);
      json arcs = r.to_json()["arcs"];
      std::cout << json{{"arcs", arcs}, {"final_rho_C", r.final_rho_C}, {"t_f", r.t_f}}.dump(2) << "\n";
      return kOk;
    };
  });
  auto* ptoy = pmp->add_subcommand("toy", "Single-population toy problems");
  std::string toy = "c1";
  double t_r = 1, t_d = 1, t_mu = 1, t_rho0 = 0.5, t_T = 5, t_B = 1, t_umax = 2;
  ptoy->add_option("which", toy, "c1 | c2")->required()->check(CLI::IsMember({"c1", "c2"}));
  ptoy->add_option("--r", t_r);
  ptoy->add_option("--d", t_d);
  ptoy->add_option("--mu", t_mu);
  ptoy->add_option("--rho0", t_rho0);
  ptoy->add_option("--T", t_T);
  ptoy->add_option("--budget", t_B);
  ptoy->add_option("--umax", t_umax);
  ptoy->callback([&] {
    action = [&] {
      json out;
      if (toy == "c1") {
        const auto r = toy_c1(t_r, t_d, t_mu, t_rho0, t_T, t_B);
        out = {{"rho_free", r.rho_free}, {"inf_value", r.inf_value}, {"epsilons", r.epsilons},
               {"values", r.epsilon_values}};
      } else {
        const auto r = toy_c2(t_r, t_d, t_mu, t_rho0, t_T, t_B, t_umax);
        out = {{"T1", r.T1}, {"value", r.value}, {"saturated", r.saturated}, {"switch_numeric", r.switch_numeric},
               {"value_numeric", r.value_numeric}};
        if (!r.note.empty()) out["note"] = r.note;
      }
      std::cout << out.dump(2) << "\n";
      return kOk;
    };
  });
  auto* pdir = pmp->add_subcommand("dirac", "Instantaneously optimal concentrated cancer population");
  double d_rc = 0.5, d_rh = 2.7;
  pdir->add_option("--rho-C0", d_rc);
  pdir->add_option("--rho-H0", d_rh);
  pdir->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      const auto r = dirac_optimality(c.params, d_rc, d_rh, c.nx);
      std::cout << json{{"x_C", r.x_C}, {"value", r.value}, {"node", r.node}, {"unique", r.unique}}.dump(2) << "\n";
      return kOk;
    };
  });

  // ocp
  auto* ocp = app.add_subcommand("ocp", "Direct transcription of the full control problem");
  ocp->require_subcommand(1);
  auto* osol = ocp->add_subcommand("solve", "Solve on [0,T]");
  double o_T = 60;
  std::size_t o_nt = 0;
  std::string o_Ts = "30,60";
  osol->add_option("--T", o_T);
  osol->add_option("--nt", o_nt, "Time steps (default 20 per time unit)");
  osol->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      const std::size_t nx = g.nx ? g.nx : 101;
      const std::size_t nt = o_nt ? o_nt : static_cast<std::size_t>(std::llround(20 * o_T));
      const auto pr = transcribe(c.params, o_T, nt, nx);
      OptimizerConfig cfg;
      cfg.seed = c.seed;
      const auto sol = solve_ocp(pr, cfg);
      fs::create_directories(c.out);
      std::ostringstream u, tot;
      u << "t[time],u1[dose],u2[dose]\n";
      for (std::size_t k = 0; k < nt; ++k) u << fmt_num(sol.t[k]) << ',' << fmt_num(sol.u1[k]) << ',' << fmt_num(sol.u2[k]) << '\n';
      tot << "t[time],rho_H[cells],rho_C[cells],g1[1],g2[1]\n";
      for (std::size_t k = 0; k <= nt; ++k)
        tot << fmt_num(sol.t[k]) << ',' << fmt_num(sol.rho_H[k]) << ',' << fmt_num(sol.rho_C[k]) << ','
            << fmt_num(sol.g1[k]) << ',' << fmt_num(sol.g2[k]) << '\n';
      write_text(c.out / "u_opt.csv", u.str());
      write_text(c.out / "totals.csv", tot.str());
      write_json(c.out / "activity.json", sol.activity_json());
      RunManifest m = manifest(c, "ocp solve");
      m.nx = nx;
      m.dt = o_T / nt;
      m.tolerances = {{"feas_tol", cfg.feas_tol}, {"kkt_tol", cfg.kkt_tol}};
      m.artifacts = {"u_opt.csv", "totals.csv", "activity.json"};
      m.extra = sol.to_json();
      finish(c.out, m, t0);
      std::cout << json{{"rho_C_final", sol.rho_C_final}, {"max_violation", sol.max_violation}, {"start", sol.start}}.dump(2) << "\n";
      return kOk;
    };
  });
  auto* oscan = ocp->add_subcommand("scan", "Optimal rho_C(T) over several horizons");
  oscan->add_option("--T", o_Ts, "Comma-separated horizons");
  oscan->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      OptimizerConfig cfg;
      cfg.seed = c.seed;
      const auto sc = monotonicity_scan(c.params, parse_list(o_Ts), cfg, 20.0, g.nx ? g.nx : 101);
      std::cout << sc.to_json().dump(2) << "\n";
      return kOk;
    };
  });

  // figure
  auto* fig = app.add_subcommand("figure", "Reproduce a figure's data bundle");
  int f_id = 1;
  fig->add_option("--id", f_id, "Figure 1-7")->required();
  fig->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      FigureOptions fo;
      fo.nx = c.nx;
      fo.dt = c.dt;
      fo.seed = c.seed;
      const auto r = run_figure(f_id, c.out, fo);
      std::cout << nlohmann::json{{"id", r.id}, {"artifacts", r.artifacts}, {"summary", r.summary}}.dump(2) << "\n";
      return kOk;
    };
  });

  // validate
  auto* val = app.add_subcommand("validate", "Check the modelling assumptions of a parameter set");
  val->callback([&] {
    action = [&] {
      Ctx c = resolve(g);
      const auto rep = validate(c.params);
      std::cout << rep.to_json().dump(2) << "\n";
      return rep.ok() ? kOk : kConfig;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  try {
    return action ? action() : kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
