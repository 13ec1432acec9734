#pragma once
// Config ingestion. One schema feeds every subcommand; TOML and JSON files
// produce identical setups. Parsing is lenient about which sections are
// present (a design-only file has no sampling policies, a simulation file may
// omit the design table); the per-command require_* gates then insist on the
// sections that command actually needs and report every missing field at
// once.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nqcs/design.hpp"
#include "nqcs/model.hpp"
#include "nqcs/robot_arm.hpp"
#include "nqcs/sim.hpp"
#include "nqcs/toml_lite.hpp"

namespace nqcs {

struct config_error : std::runtime_error {
  std::vector<std::string> problems;

  explicit config_error(std::vector<std::string> probs)
      : std::runtime_error(join(probs)), problems(std::move(probs)) {}

 private:
  static std::string join(const std::vector<std::string>& probs) {
    std::string out = "config invalid:";
    for (const auto& p : probs) out += "\n  - " + p;
    return out;
  }
};

struct monitor_options {
  bool enabled = false;
  double tol = 1e-9;
};

/// Everything a subcommand needs, built from one parsed file.
struct run_setup {
  std::string model_name;
  system_model model;
  std::vector<network_config> nets;
  std::vector<network_functions> fns;
  certificate_set certs;
  sim_options opts;
  monitor_options monitor;
  vec x0, e0;
  std::vector<design_inputs> design;
  std::vector<bool> has_design;
  // deficiencies that only matter for specific subcommands
  std::vector<std::string> sim_problems;
  std::vector<std::string> design_problems;
};

namespace cfg_detail {

using nlohmann::json;

struct reader {
  const json& j;
  std::string path;
  std::vector<std::string>& errs;

  [[nodiscard]] const json* child(const std::string& key) const {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }
  [[nodiscard]] bool has(const std::string& key) const { return child(key) != nullptr; }

  void fail(const std::string& key, const std::string& what) const {
    errs.push_back(path + key + ": " + what);
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    if (!j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) fail(it.key(), "unknown key");
    }
  }

  [[nodiscard]] double num(const std::string& key, double def) const {
    const json* c = child(key);
    if (!c) return def;
    if (!c->is_number()) {
      fail(key, "expected a number");
      return def;
    }
    return c->get<double>();
  }

  [[nodiscard]] long long integer(const std::string& key, long long def) const {
    const json* c = child(key);
    if (!c) return def;
    if (!c->is_number_integer()) {
      fail(key, "expected an integer");
      return def;
    }
    return c->get<long long>();
  }

  [[nodiscard]] bool flag(const std::string& key, bool def) const {
    const json* c = child(key);
    if (!c) return def;
    if (!c->is_boolean()) {
      fail(key, "expected true or false");
      return def;
    }
    return c->get<bool>();
  }

  [[nodiscard]] std::string text(const std::string& key, const std::string& def) const {
    const json* c = child(key);
    if (!c) return def;
    if (!c->is_string()) {
      fail(key, "expected a string");
      return def;
    }
    return c->get<std::string>();
  }

  [[nodiscard]] vec numbers(const std::string& key) const {
    const json* c = child(key);
    vec out;
    if (!c) return out;
    if (!c->is_array()) {
      fail(key, "expected an array of numbers");
      return out;
    }
    for (const auto& v : *c) {
      if (!v.is_number()) {
        fail(key, "expected an array of numbers");
        return {};
      }
      out.push_back(v.get<double>());
    }
    return out;
  }

  // scalar broadcast or explicit per-entry list
  [[nodiscard]] vec spread(const std::string& key, std::size_t n, double def) const {
    const json* c = child(key);
    if (!c) return vec(n, def);
    if (c->is_number()) return vec(n, c->get<double>());
    vec out = numbers(key);
    if (out.size() != n) {
      fail(key, "expected a number or an array of " + std::to_string(n));
      return vec(n, def);
    }
    return out;
  }

  [[nodiscard]] reader section(const std::string& key) const {
    const json* c = child(key);
    static const json empty = json::object();
    if (c && !c->is_object()) {
      fail(key, "expected a table");
      c = nullptr;
    }
    return reader{c ? *c : empty, path + key + ".", errs};
  }
};

inline void read_etm(const reader& r, etm_params& p, std::vector<std::string>& sim_errs,
                     const std::string& where) {
  r.allow_only({"rho", "lambda", "gamma0", "gamma1", "lbar0"});
  p.rho = r.num("rho", 0.0);
  p.lambda = r.num("lambda", 0.0);
  p.gamma0 = r.num("gamma0", 1.0);
  p.gamma1 = r.num("gamma1", 1.0);
  p.lbar0 = r.num("lbar0", 0.0);
  try {
    validate(p);
  } catch (const std::invalid_argument& ex) {
    sim_errs.push_back(where + ex.what());
  }
}

inline quantizer_params read_quantizer(const reader& r) {
  r.allow_only({"enabled", "range", "err_bound", "dead_zone"});
  quantizer_params q;
  q.enabled = r.flag("enabled", r.has("range") || r.has("err_bound"));
  q.range = r.num("range", q.range);
  q.err_bound = r.num("err_bound", q.err_bound);
  q.dead_zone = r.num("dead_zone", q.err_bound);
  return q;
}

}  // namespace cfg_detail

/// Read a config file; .toml goes through the bundled reader, everything
/// else is parsed as JSON.
[[nodiscard]] inline nlohmann::json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error({"cannot open " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
      return toml_lite::parse(text);
    return nlohmann::json::parse(text);
  } catch (const std::exception& ex) {
    throw config_error({path + ": " + ex.what()});
  }
}

/// Build the full setup from a parsed config. Structural problems throw;
/// subcommand-specific gaps are deferred to require_sim / require_design.
[[nodiscard]] inline run_setup build_setup(const nlohmann::json& root) {
  std::vector<std::string> errs;
  run_setup s;
  cfg_detail::reader top{root, "", errs};
  top.allow_only({"model", "t_end", "seed", "step", "flow_stride", "record_flows", "x0", "e0",
                  "model_params", "monitor", "network", "networks"});

  s.model_name = top.text("model", "");
  const bool robot = s.model_name == "robot_arm_rr" || s.model_name == "robot_arm_tod";
  if (!robot && s.model_name != "zero_dynamics")
    errs.push_back("model: expected robot_arm_rr, robot_arm_tod, or zero_dynamics");

  const nlohmann::json* nets_json = top.child("networks");
  if (!nets_json) nets_json = top.child("network");
  if (!nets_json || !nets_json->is_array() || nets_json->empty()) {
    errs.push_back("networks: expected a non-empty array of network tables");
    throw config_error(errs);
  }
  const std::size_t n_nets = nets_json->size();
  if (robot && n_nets != 2) errs.push_back("networks: the robot model uses exactly 2 networks");

  // model construction
  robot_arm_params rp;
  std::vector<node_partition> zero_nodes;
  {
    auto mp = top.section("model_params");
    if (robot) {
      mp.allow_only({"a1", "a2", "c1", "c2", "b11", "b12", "b21", "b22", "forcing_amp",
                     "forcing_freq"});
      rp.a1 = mp.num("a1", rp.a1);
      rp.a2 = mp.num("a2", rp.a2);
      rp.c1 = mp.num("c1", rp.c1);
      rp.c2 = mp.num("c2", rp.c2);
      rp.b11 = mp.num("b11", rp.b11);
      rp.b12 = mp.num("b12", rp.b12);
      rp.b21 = mp.num("b21", rp.b21);
      rp.b22 = mp.num("b22", rp.b22);
      rp.forcing_amp = mp.num("forcing_amp", rp.forcing_amp);
      rp.forcing_freq = mp.num("forcing_freq", rp.forcing_freq);
    } else {
      mp.allow_only({"n_x"});
    }
  }

  const protocol_kind default_proto =
      s.model_name == "robot_arm_tod" ? protocol_kind::try_once_discard
                                      : protocol_kind::round_robin;

  // per-network pass
  std::vector<double> omegas(n_nets, 0.0);
  std::vector<bool> has_omega(n_nets, false);
  s.design.resize(n_nets);
  s.has_design.assign(n_nets, false);
  for (std::size_t i = 0; i < n_nets; ++i) {
    cfg_detail::reader nr{(*nets_json)[i], "network[" + std::to_string(i + 1) + "].", errs};
    nr.allow_only({"name", "protocol", "node_dims", "masp", "mad", "eps_min", "omega",
                   "sampling", "delay", "etm", "quantizer", "zoom", "zoom_on_trigger_only",
                   "mu0", "delta0", "design"});
    network_config nc;
    nc.name = nr.text("name", "net" + std::to_string(i + 1));

    const std::string proto_text = nr.text("protocol", "");
    nc.protocol = default_proto;
    if (!proto_text.empty()) {
      try {
        nc.protocol = protocol_from_string(proto_text);
      } catch (const std::invalid_argument& ex) {
        nr.fail("protocol", ex.what());
      }
      if (robot && nc.protocol != default_proto)
        nr.fail("protocol", "conflicts with the model name");
    }

    vec dims = nr.numbers("node_dims");
    if (robot) {
      if (!dims.empty() && dims != vec{1.0, 1.0, 1.0})
        nr.fail("node_dims", "the robot networks schedule three scalar nodes");
    } else if (dims.empty()) {
      nr.fail("node_dims", "required for zero_dynamics");
      dims = {1.0};
    }
    if (!robot) {
      node_partition part;
      for (double d : dims) {
        if (d < 1.0 || d != static_cast<double>(static_cast<int>(d))) {
          nr.fail("node_dims", "entries must be positive integers");
          d = 1.0;
        }
        part.dims.push_back(static_cast<int>(d));
      }
      zero_nodes.push_back(std::move(part));
    }
    const std::size_t ell = robot ? 3 : zero_nodes.back().dims.size();

    const std::string w = nc.name + ": ";
    if (nr.has("masp") || nr.has("mad") || nr.has("eps_min")) {
      nc.masp = nr.num("masp", 0.0);
      nc.mad = nr.num("mad", 0.0);
      nc.eps_min = nr.num("eps_min", 0.0);
      if (!(nc.masp > 0.0)) s.sim_problems.push_back(w + "masp must be > 0");
      if (nc.mad < 0.0 || nc.mad > nc.masp)
        s.sim_problems.push_back(w + "mad must lie in [0, masp]");
      if (!(nc.eps_min > 0.0) || nc.eps_min > nc.masp)
        s.sim_problems.push_back(w + "eps_min must lie in (0, masp]");
    } else {
      s.sim_problems.push_back(w + "masp, mad, eps_min are required to simulate");
    }

    {
      auto sr = nr.section("sampling");
      sr.allow_only({"mode", "h", "lo", "hi"});
      const std::string mode = sr.text("mode", "uniform");
      if (mode == "fixed") {
        nc.sampling.m = sampling_policy::mode::fixed;
        nc.sampling.fixed_h = sr.num("h", 0.0);
        if (!(nc.sampling.fixed_h >= nc.eps_min && nc.sampling.fixed_h <= nc.masp))
          s.sim_problems.push_back(w + "fixed sampling interval must lie in [eps_min, masp]");
      } else if (mode == "uniform") {
        nc.sampling.m = sampling_policy::mode::uniform;
        nc.sampling.lo = sr.num("lo", nc.eps_min);
        nc.sampling.hi = sr.num("hi", nc.masp);
        if (nc.sampling.lo < nc.eps_min - 1e-12 || nc.sampling.hi > nc.masp + 1e-12 ||
            nc.sampling.lo > nc.sampling.hi)
          s.sim_problems.push_back(w + "sampling support must lie inside [eps_min, masp]");
      } else {
        sr.fail("mode", "expected fixed or uniform");
      }
    }
    {
      auto dr = nr.section("delay");
      dr.allow_only({"mode", "d"});
      const std::string mode = dr.text("mode", "uniform");
      if (mode == "fixed") {
        nc.delay.m = delay_policy::mode::fixed;
        nc.delay.fixed_d = dr.num("d", 0.0);
        if (nc.delay.fixed_d < 0.0 || nc.delay.fixed_d > nc.mad)
          s.sim_problems.push_back(w + "fixed delay must lie in [0, mad]");
        if (nc.delay.fixed_d >= nc.sampling.min_interval() && nc.delay.fixed_d > 0.0)
          s.sim_problems.push_back(w + "fixed delay must stay below the sampling interval");
      } else if (mode == "uniform") {
        nc.delay.m = delay_policy::mode::uniform;
      } else {
        dr.fail("mode", "expected fixed or uniform");
      }
    }

    cfg_detail::read_etm(nr.section("etm"), nc.etm, s.sim_problems, w);
    nc.quant.assign(ell, cfg_detail::read_quantizer(nr.section("quantizer")));
    for (const auto& q : nc.quant) {
      try {
        q.validate();
      } catch (const std::invalid_argument& ex) {
        s.sim_problems.push_back(w + ex.what());
        break;
      }
    }
    nc.zoom_factor = nr.spread("zoom", ell, 1.0);
    for (double z : nc.zoom_factor)
      if (!(z > 0.0 && z <= 1.0)) {
        s.sim_problems.push_back(w + "zoom factors must lie in (0, 1]");
        break;
      }
    nc.zoom_on_trigger_only = nr.flag("zoom_on_trigger_only", false);
    nc.mu0 = nr.numbers("mu0");
    if (!nc.mu0.empty() && nc.mu0.size() != ell)
      s.sim_problems.push_back(w + "mu0 needs one entry per scheduled node");
    nc.delta0 = nr.num("delta0", 0.0);

    if (nr.has("omega")) {
      omegas[i] = nr.num("omega", 0.0);
      has_omega[i] = omegas[i] > 0.0;
      if (!has_omega[i]) nr.fail("omega", "must be > 0");
    }

    if (nr.has("design")) {
      auto dr = nr.section("design");
      dr.allow_only({"lambda_bar", "l0", "l1", "gamma0", "gamma1", "varrho0", "varrho1",
                     "phi0_init", "phi1_init"});
      design_inputs& di = s.design[i];
      di.lambda_bar = dr.num("lambda_bar", di.lambda_bar);
      di.phi.l0 = dr.num("l0", 0.0);
      di.phi.l1 = dr.num("l1", 0.0);
      di.phi.gamma0 = dr.num("gamma0", 0.0);
      di.phi.gamma1 = dr.num("gamma1", 0.0);
      di.phi.varrho0 = dr.num("varrho0", 0.0);
      di.phi.varrho1 = dr.num("varrho1", 0.0);
      const double mid = di.lambda_bar < 1.0 ? 0.5 * (1.0 + 1.0 / di.lambda_bar) : 1.0;
      di.phi.phi0_init = dr.num("phi0_init", mid);
      di.phi.phi1_init = dr.num("phi1_init", di.phi.phi0_init);
      s.has_design[i] = true;
      try {
        di.validate();
      } catch (const std::invalid_argument& ex) {
        s.design_problems.push_back(w + ex.what());
      }
    }
    s.nets.push_back(std::move(nc));
  }

  // assemble model, trigger functions, certificates
  if (robot) {
    s.model = robot_arm_model(rp);
    s.model.name = s.model_name;
    bool certs_ok = true;
    for (std::size_t i = 0; i < n_nets; ++i) {
      s.fns.push_back({robot_trigger_w(), robot_trigger_phi()});
      certs_ok = certs_ok && has_omega[i];
    }
    if (certs_ok) {
      s.certs.v_fn = robot_arm_v();
      for (std::size_t i = 0; i < n_nets; ++i) {
        const auto& nc = s.nets[i];
        s.certs.w_fns.push_back(make_network_w(nc.protocol, 3, omegas[i], nc.zoom_factor,
                                               protocol_contraction(3)));
        double range = 0.0, err = 0.0, zoom_max = 0.0;
        bool quantized = false;
        for (std::size_t jn = 0; jn < nc.quant.size(); ++jn) {
          quantized = quantized || nc.quant[jn].enabled;
          range = std::max(range, nc.quant[jn].range);
          err = std::max(err, nc.quant[jn].err_bound);
          zoom_max = std::max(zoom_max, nc.zoom_factor[jn]);
        }
        s.certs.lambda.push_back(
            certificate_lambda(3, omegas[i], range, err, zoom_max, quantized));
      }
    }
  } else {
    const long long n_x = top.section("model_params").integer("n_x", 1);
    if (n_x < 1) errs.push_back("model_params.n_x: must be >= 1");
    s.model = zero_dynamics_model(static_cast<int>(std::max(1ll, n_x)), std::move(zero_nodes));
    s.model.name = s.model_name;
    for (std::size_t i = 0; i < n_nets; ++i) {
      network_functions nf;
      nf.trigger_w = [](std::span<const double> e, std::span<const double> mu,
                        std::span<const double>, std::uint64_t, int) {
        double acc = 0.0;
        for (double v : e) acc += v * v;
        for (double v : mu) acc += v * v;
        return std::sqrt(acc);
      };
      nf.trigger_phi = [](std::span<const double> z, int) {
        double acc = 0.0;
        for (double v : z) acc += v * v;
        return acc;
      };
      s.fns.push_back(std::move(nf));
    }
  }

  // run options and initial state
  s.opts.t_end = top.num("t_end", 0.0);
  if (top.has("t_end") && !(s.opts.t_end > 0.0)) errs.push_back("t_end: must be > 0");
  if (!top.has("t_end")) s.sim_problems.push_back("t_end is required to simulate");
  s.opts.step = top.num("step", 0.0);
  if (top.has("step") && !(s.opts.step > 0.0)) errs.push_back("step: must be > 0");
  s.opts.seed = static_cast<std::uint64_t>(top.integer("seed", 1));
  s.opts.flow_stride = static_cast<int>(top.integer("flow_stride", 50));
  if (s.opts.flow_stride < 1) errs.push_back("flow_stride: must be >= 1");
  s.opts.record_flows = top.flag("record_flows", true);

  s.x0 = top.numbers("x0");
  if (s.x0.empty()) s.x0.assign(static_cast<std::size_t>(s.model.n_x), 0.0);
  if (s.x0.size() != static_cast<std::size_t>(s.model.n_x))
    errs.push_back("x0: expected " + std::to_string(s.model.n_x) + " entries");
  s.e0 = top.numbers("e0");
  if (!s.e0.empty() && s.e0.size() != static_cast<std::size_t>(s.model.n_e()))
    errs.push_back("e0: expected " + std::to_string(s.model.n_e()) + " entries");

  {
    auto mr = top.section("monitor");
    mr.allow_only({"enabled", "tol"});
    s.monitor.enabled = mr.flag("enabled", false);
    s.monitor.tol = mr.num("tol", 1e-9);
    if (!(s.monitor.tol > 0.0)) errs.push_back("monitor.tol: must be > 0");
  }

  if (!errs.empty()) throw config_error(errs);
  return s;
}

[[nodiscard]] inline run_setup load_setup_file(const std::string& path) {
  return build_setup(read_config_file(path));
}

/// Simulation and comparison need complete timing data on every network.
inline void require_sim(const run_setup& s) {
  if (!s.sim_problems.empty()) throw config_error(s.sim_problems);
}

/// The design search needs a design table on every network.
inline void require_design(const run_setup& s) {
  std::vector<std::string> probs = s.design_problems;
  for (std::size_t i = 0; i < s.has_design.size(); ++i)
    if (!s.has_design[i])
      probs.push_back(s.nets[i].name + ": design table (l0, l1, gamma0, gamma1, varrho0, "
                      "varrho1, phi0_init, lambda_bar) is required");
  if (!probs.empty()) throw config_error(probs);
}

}  // namespace nqcs
