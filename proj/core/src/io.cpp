#include "pheno/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pheno/errors.hpp"
#include "pheno/ocp_direct.hpp"
#include "pheno/strategies.hpp"

namespace pheno {

namespace fs = std::filesystem;

namespace {

double number_at(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  RunConfig c;
  if (j.contains("preset")) {
    if (!j.at("preset").is_string()) throw ConfigError(path + ".preset: expected a string");
    c.preset = j.at("preset").get<std::string>();
  }
  c.params = preset(c.preset);
  std::optional<double> u1, u2;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string k = it.key(), sub = path + "." + k;
    if (k == "preset") continue;
    if (k == "params") {
      c.params = params_from_json(it.value(), c.params, sub);
    } else if (k == "nx") {
      const double v = number_at(it.value(), sub);
      if (!(v >= 2) || v != std::floor(v)) throw ConfigError(sub + ": expected an integer >= 2");
      c.nx = static_cast<std::size_t>(v);
    } else if (k == "dt") {
      c.dt = number_at(it.value(), sub);
      if (!(c.dt > 0)) throw ConfigError(sub + ": must be positive");
    } else if (k == "seed") {
      if (!it.value().is_number_unsigned()) throw ConfigError(sub + ": expected a nonnegative integer");
      c.seed = it.value().get<std::uint64_t>();
    } else if (k == "T") {
      c.T = number_at(it.value(), sub);
      if (!(*c.T > 0)) throw ConfigError(sub + ": must be positive");
    } else if (k == "u1") {
      u1 = number_at(it.value(), sub);
    } else if (k == "u2") {
      u2 = number_at(it.value(), sub);
    } else {
      throw ConfigError(sub + ": unknown key");
    }
  }
  if (u1 || u2) c.dose = DosePair{u1.value_or(0.0), u2.value_or(0.0)};
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open '" + file.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: parse error in '" + file.string() + "': " + e.what());
  }
  return config_from_json(j);
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command}, {"preset", preset},     {"params", params},       {"nx", nx},
          {"dt", dt},           {"tolerances", tolerances}, {"seed", seed},       {"artifacts", artifacts},
          {"extra", extra},     {"wall_time_s", wall_time}};
}

void RunManifest::write(const fs::path& dir) const { write_json(dir / "manifest.json", to_json()); }

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_totals_csv(std::ostream& os, const Trajectory& tr) {
  os << "t[time],rho_H[cells],rho_C[cells],rho_CS[cells],rho_CR[cells],u1[dose],u2[dose],g1[1],g2[1],mode[-]\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << fmt_num(tr.t[k]) << ',' << fmt_num(tr.rho_H[k]) << ',' << fmt_num(tr.rho_C[k]) << ','
       << fmt_num(tr.rho_CS[k]) << ',' << fmt_num(tr.rho_CR[k]) << ',' << fmt_num(tr.u1[k]) << ','
       << fmt_num(tr.u2[k]) << ',' << fmt_num(tr.g1[k]) << ',' << fmt_num(tr.g2[k]) << ',';
    const int m = tr.mode[k];
    if (m >= 0 && static_cast<std::size_t>(m) < tr.mode_names.size())
      os << tr.mode_names[m];
    else
      os << m;
    os << '\n';
  }
}

void write_snapshots_csv(std::ostream& os, const Trajectory& tr) {
  os << "snapshot[-],t[time],x[phenotype],n_H[cells/phenotype],n_C[cells/phenotype]\n";
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
    const auto& sn = tr.snapshots[s];
    const auto& g = *sn.n_H.grid;
    for (std::size_t i = 0; i < g.size(); ++i)
      os << s << ',' << fmt_num(sn.t) << ',' << fmt_num(g.x(i)) << ',' << fmt_num(sn.n_H.values[i]) << ','
         << fmt_num(sn.n_C.values[i]) << '\n';
  }
}

void write_plot_bundle(std::ostream& os, const Trajectory& tr) {
  os << "panel,series,x,y\n";
  for (const auto& sn : tr.snapshots) {
    const auto& g = *sn.n_H.grid;
    const std::string series = "t=" + fmt_num(sn.t);
    for (std::size_t i = 0; i < g.size(); ++i) os << "n_H," << series << ',' << fmt_num(g.x(i)) << ',' << fmt_num(sn.n_H.values[i]) << '\n';
    for (std::size_t i = 0; i < g.size(); ++i) os << "n_C," << series << ',' << fmt_num(g.x(i)) << ',' << fmt_num(sn.n_C.values[i]) << '\n';
  }
  const std::size_t stride = std::max<std::size_t>(1, tr.size() / 2000);
  for (std::size_t k = 0; k < tr.size(); k += stride) os << "totals,rho_H," << fmt_num(tr.t[k]) << ',' << fmt_num(tr.rho_H[k]) << '\n';
  for (std::size_t k = 0; k < tr.size(); k += stride) os << "totals,rho_C," << fmt_num(tr.t[k]) << ',' << fmt_num(tr.rho_C[k]) << '\n';
  for (std::size_t k = 0; k < tr.size(); k += stride) os << "controls,u1," << fmt_num(tr.t[k]) << ',' << fmt_num(tr.u1[k]) << '\n';
  for (std::size_t k = 0; k < tr.size(); k += stride) os << "controls,u2," << fmt_num(tr.t[k]) << ',' << fmt_num(tr.u2[k]) << '\n';
}

void write_json(const fs::path& file, const nlohmann::json& j) { write_text(file, j.dump(2) + "\n"); }

void write_text(const fs::path& file, const std::string& s) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write '" + file.string() + "'");
  out << s;
}

namespace {

void write_trajectory(const fs::path& dir, const Trajectory& tr, std::vector<std::string>& art) {
  {
    std::ostringstream os;
    write_totals_csv(os, tr);
    write_text(dir / "totals.csv", os.str());
    art.push_back("totals.csv");
  }
  {
    std::ostringstream os;
    write_snapshots_csv(os, tr);
    write_text(dir / "snapshots.csv", os.str());
    art.push_back("snapshots.csv");
  }
  {
    std::ostringstream os;
    write_plot_bundle(os, tr);
    write_text(dir / "plot_data.csv", os.str());
    art.push_back("plot_data.csv");
  }
}

nlohmann::json series_summary(const Trajectory& tr) {
  std::size_t imin = 0;
  for (std::size_t k = 0; k < tr.size(); ++k)
    if (tr.rho_C[k] < tr.rho_C[imin]) imin = k;
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : tr.snapshots) snaps.push_back(s.t);
  return {{"rho_C_initial", tr.rho_C.front()}, {"rho_C_final", tr.rho_C.back()}, {"rho_C_min", tr.rho_C[imin]},
          {"t_rho_C_min", tr.t[imin]},         {"rho_H_final", tr.rho_H.back()}, {"snapshot_times", snaps}};
}

}  // namespace

FigureResult run_figure(int fig_id, const fs::path& out_dir, const FigureOptions& opt) {
  if (fig_id < 1 || fig_id > 7) throw DomainError("unknown figure id " + std::to_string(fig_id));
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  FigureResult res;
  res.id = fig_id;
  RunManifest man;
  man.command = "figure " + std::to_string(fig_id);
  man.nx = opt.nx;
  man.dt = opt.dt;
  man.seed = opt.seed;
  std::string preset_name = "lorz2013-modified";
  SimOptions so;
  so.dt = opt.dt;

  if (fig_id == 2) {
    const auto pm = paper_params(MuCVariant::modified), pl = paper_params(MuCVariant::legacy);
    std::ostringstream os;
    os << "x[phenotype],mu_C_modified[1/dose/time],mu_C_legacy[1/dose/time]\n";
    for (int i = 0; i <= 1000; ++i) {
      const double x = i / 1000.0;
      os << fmt_num(x) << ',' << fmt_num(pm.mu_C(x)) << ',' << fmt_num(pl.mu_C(x)) << '\n';
    }
    write_text(out_dir / "mu_C.csv", os.str());
    res.artifacts.push_back("mu_C.csv");
    man.params = params_to_json(pm);
  } else if (fig_id == 1 || fig_id == 3) {
    if (fig_id == 1) preset_name = "lorz2013-legacy";
    const auto p = preset(preset_name);
    auto [h, c] = paper_initial(make_grid(opt.nx));
    const auto tr = simulate(p, h, c, ControlSchedule::constant({3.5, 2.0}, 10.0), 10.0, so);
    write_trajectory(out_dir, tr, res.artifacts);
    res.summary = series_summary(tr);
    man.params = params_to_json(p);
  } else if (fig_id == 6 || fig_id == 7) {
    const auto p = preset(preset_name);
    auto [h, c] = paper_initial(make_grid(opt.nx));
    const double T = fig_id == 6 ? 60.0 : 100.0;
    const Policy pol = fig_id == 6 ? quasi_periodic_policy_1(p) : quasi_periodic_policy_2(p);
    const auto tr = simulate_closed_loop(p, h, c, pol, T, so);
    write_trajectory(out_dir, tr, res.artifacts);
    res.summary = series_summary(tr);
    const auto mins = cycle_minima(tr);
    res.summary["cycle_minima"] = mins;
    std::size_t touches = 0;
    for (std::size_t k = 1; k < tr.size(); ++k)
      if (tr.mode[k] != tr.mode[k - 1]) ++touches;
    res.summary["mode_switches"] = touches;
    res.summary["policy"] = pol.name;
    man.tolerances["hysteresis"] = pol.hysteresis;
    man.params = params_to_json(p);
  } else {
    const auto p = preset(preset_name);
    const double T = fig_id == 4 ? 30.0 : 60.0;
    const auto Nt = static_cast<std::size_t>(std::llround(T * opt.ocp_steps_per_unit));
    const auto pr = transcribe(p, T, Nt, opt.ocp_nx);
    OptimizerConfig cfg;
    cfg.seed = opt.seed;
    const auto sol = solve_ocp(pr, cfg);
    SimOptions s2;
    s2.dt = T / Nt;
    const auto tr = simulate(p, pr.n_H0, pr.n_C0, sol.u_opt, T, s2);
    write_trajectory(out_dir, tr, res.artifacts);
    std::ostringstream os;
    os << "t[time],u1[dose],u2[dose]\n";
    for (std::size_t k = 0; k < Nt; ++k) os << fmt_num(sol.t[k]) << ',' << fmt_num(sol.u1[k]) << ',' << fmt_num(sol.u2[k]) << '\n';
    write_text(out_dir / "u_opt.csv", os.str());
    write_json(out_dir / "activity.json", sol.activity_json());
    res.artifacts.push_back("u_opt.csv");
    res.artifacts.push_back("activity.json");
    res.summary = series_summary(tr);
    res.summary["ocp"] = sol.to_json();
    man.nx = opt.ocp_nx;
    man.dt = T / Nt;
    man.tolerances = {{"feas_tol", cfg.feas_tol}, {"kkt_tol", cfg.kkt_tol}};
    man.params = params_to_json(p);
  }
  write_json(out_dir / "summary.json", res.summary);
  res.artifacts.push_back("summary.json");
  man.preset = preset_name;
  man.artifacts = res.artifacts;
  man.artifacts.push_back("manifest.json");
  man.extra = {{"figure", fig_id}};
  man.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.write(out_dir);
  return res;
}

}  // namespace pheno
