// Command line front end: simulate | compare | design | validate.
// Exit codes: 0 ok, 2 config problem, 3 numerical failure, 4 infeasible
// design.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nqcs/config.hpp"
#include "nqcs/design.hpp"
#include "nqcs/monitor.hpp"
#include "nqcs/sim.hpp"
#include "nqcs/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInfeasible = 4;

struct cli_options {
  std::string config_path;
  std::string out_dir = ".";
  double step = 0.0;        // > 0 overrides the config
  long long seed = -1;      // >= 0 overrides the config
  double tol = 1e-7;
};

std::filesystem::path out_path(const cli_options& cli, const std::string& name) {
  std::filesystem::create_directories(cli.out_dir);
  return std::filesystem::path(cli.out_dir) / name;
}

void apply_overrides(nqcs::run_setup& setup, const cli_options& cli) {
  if (cli.step > 0.0) setup.opts.step = cli.step;
  if (cli.seed >= 0) setup.opts.seed = static_cast<std::uint64_t>(cli.seed);
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

void write_plot_data(const nqcs::trace& tr, std::size_t blocks,
                     const std::filesystem::path& path) {
  std::string body = "t";
  for (std::size_t i = 1; i <= blocks; ++i) body += ",eta_norm_" + std::to_string(i);
  body += "\n";
  char buf[64];
  for (const auto& f : tr.flows) {
    std::snprintf(buf, sizeof buf, "%.17g", f.t);
    body += buf;
    for (double v : f.eta_norms) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      body += buf;
    }
    body += "\n";
  }
  write_text(path, body);
}

nqcs::trace run_once(const nqcs::run_setup& setup) {
  nqcs::simulator sim(setup.model, setup.nets, setup.fns, setup.opts, setup.certs);
  return sim.run(setup.x0, setup.e0);
}

int cmd_simulate(const cli_options& cli) {
  nqcs::run_setup setup = nqcs::load_setup_file(cli.config_path);
  nqcs::require_sim(setup);
  apply_overrides(setup, cli);
  const nqcs::trace tr = run_once(setup);

  {
    std::ofstream os(out_path(cli, "trace.csv"), std::ios::binary);
    nqcs::write_csv(tr, os);
  }
  write_plot_data(tr, setup.model.eta_dims.size(), out_path(cli, "plot.csv"));

  nlohmann::ordered_json js = nqcs::summary_json(tr);
  if (setup.monitor.enabled) {
    const auto problems = nqcs::check_hybrid_domain(tr, setup.model, setup.nets);
    nlohmann::ordered_json mon;
    mon["domain_problems"] = problems;
    if (setup.certs.v_fn) {
      const auto rep = nqcs::check_contraction(tr, setup.model, setup.certs, setup.monitor.tol);
      mon["triggered_samplings"] = rep.triggered_samplings;
      mon["triggered_updates"] = rep.triggered_updates;
      mon["contraction_violations"] = rep.sampling_violations.size();
      mon["arrival_violations"] = rep.update_violations.size();
    }
    mon["saturated_transmissions"] = nqcs::saturated_transmission_count(tr);
    js["monitor"] = std::move(mon);
  }
  write_text(out_path(cli, "summary.json"), js.dump(2) + "\n");

  std::cout << "simulate: " << tr.total_jumps << " jumps, final |eta| = "
            << js["final"]["norm_eta"].dump() << "\n";
  return kExitOk;
}

int cmd_compare(const cli_options& cli) {
  nqcs::run_setup setup = nqcs::load_setup_file(cli.config_path);
  nqcs::require_sim(setup);
  apply_overrides(setup, cli);

  const nqcs::trace etc_tr = run_once(setup);
  nqcs::run_setup baseline = setup;  // same seed, same draws, triggering forced on
  for (auto& nc : baseline.nets) nc.etm.rho = 0.0;
  const nqcs::trace ttc_tr = run_once(baseline);

  nlohmann::ordered_json js;
  js["model"] = setup.model_name;
  js["seed"] = setup.opts.seed;
  js["t_end"] = setup.opts.t_end;
  js["networks"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < setup.nets.size(); ++i) {
    const long long etc_n = etc_tr.counters[i].triggered;
    const long long ttc_n = ttc_tr.counters[i].triggered;
    nlohmann::ordered_json row;
    row["name"] = setup.nets[i].name;
    row["ttc_count"] = ttc_n;
    row["etc_count"] = etc_n;
    row["reduction_ratio"] =
        ttc_n > 0 ? static_cast<double>(etc_n) / static_cast<double>(ttc_n) : 1.0;
    js["networks"].push_back(std::move(row));
  }
  double max_eta_late = 0.0;
  for (const auto& f : etc_tr.flows)
    if (f.t >= 0.5 * setup.opts.t_end) max_eta_late = std::max(max_eta_late, f.norm_eta);
  js["max_eta_after_transient"] = max_eta_late;
  js["saturation_violations"] = nqcs::saturated_transmission_count(etc_tr);

  write_text(out_path(cli, "comparison.json"), js.dump(2) + "\n");
  for (const auto& row : js["networks"])
    std::cout << "compare: " << row["name"].get<std::string>() << " "
              << row["etc_count"].get<long long>() << " of "
              << row["ttc_count"].get<long long>() << " transmissions\n";
  return kExitOk;
}

int cmd_design(const cli_options& cli) {
  nqcs::run_setup setup = nqcs::load_setup_file(cli.config_path);
  nqcs::require_design(setup);

  nlohmann::ordered_json js;
  bool all_feasible = true;
  for (std::size_t i = 0; i < setup.nets.size(); ++i) {
    const nqcs::design_result res = nqcs::max_T_Delta(setup.design[i], 0.2, cli.tol);
    nlohmann::ordered_json row;
    row["feasible"] = res.feasible;
    row["T"] = res.T;
    row["Delta"] = res.Delta;
    row["phi0_0"] = setup.design[i].phi.phi0_init;
    row["phi1_0"] = setup.design[i].phi.phi1_init;
    js[setup.nets[i].name] = std::move(row);
    all_feasible = all_feasible && res.feasible;
    std::cout << "design: " << setup.nets[i].name;
    if (res.feasible)
      std::cout << " T = " << res.T << ", Delta = " << res.Delta << "\n";
    else
      std::cout << " infeasible with the given constants\n";
  }
  write_text(out_path(cli, "design.json"), js.dump(2) + "\n");
  if (!all_feasible) {
    std::cerr << "design: no admissible sampling bound for at least one network\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_validate(const cli_options& cli) {
  const nqcs::run_setup setup = nqcs::load_setup_file(cli.config_path);
  std::cout << "model: " << setup.model_name << ", networks: " << setup.nets.size() << "\n";
  if (setup.sim_problems.empty()) {
    std::cout << "simulate/compare: ready\n";
  } else {
    std::cout << "simulate/compare: not runnable\n";
    for (const auto& p : setup.sim_problems) std::cout << "  - " << p << "\n";
  }
  bool design_ready = !setup.nets.empty() && setup.design_problems.empty();
  for (std::size_t i = 0; i < setup.has_design.size(); ++i)
    design_ready = design_ready && setup.has_design[i];
  if (design_ready) {
    std::cout << "design: ready\n";
  } else {
    std::cout << "design: not runnable\n";
    for (const auto& p : setup.design_problems) std::cout << "  - " << p << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-triggered networked control simulator"};
  app.require_subcommand(1);
  cli_options cli;

  auto add_common = [&cli](CLI::App* cmd, bool with_sim_flags) {
    cmd->add_option("--config", cli.config_path, "config file (.json or .toml)")
        ->required();
    cmd->add_option("--out-dir", cli.out_dir, "output directory");
    if (with_sim_flags) {
      cmd->add_option("--seed", cli.seed, "override the config seed");
      cmd->add_option("--step", cli.step, "override the integrator step");
    }
  };

  CLI::App* sim_cmd = app.add_subcommand("simulate", "run one scenario, write trace data");
  add_common(sim_cmd, true);
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "event-triggered vs time-triggered transmission counts");
  add_common(cmp_cmd, true);
  CLI::App* des_cmd =
      app.add_subcommand("design", "largest sampling period and delay per network");
  add_common(des_cmd, false);
  des_cmd->add_option("--tol", cli.tol, "bisection tolerance");
  CLI::App* val_cmd = app.add_subcommand("validate", "check a config file");
  val_cmd->add_option("--config", cli.config_path, "config file (.json or .toml)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) return cmd_simulate(cli);
    if (cmp_cmd->parsed()) return cmd_compare(cli);
    if (des_cmd->parsed()) return cmd_design(cli);
    return cmd_validate(cli);
  } catch (const nqcs::config_error& ex) {
    std::cerr << ex.what() << "\n";
    return kExitConfig;
  } catch (const nqcs::sim_error& ex) {
    std::cerr << "numerical failure: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitNumerical;
  }
}
