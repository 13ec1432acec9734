#pragma once
// Run records. A trace interleaves flow samples with jump records; jump
// records carry full copies of the discrete state on both sides of the jump
// so the post-hoc monitors can re-evaluate certificates and check locality
// without re-running the simulation.
//
// Numeric text output goes through "%.17g" so traces are byte-identical
// across runs of the same build with the same seed.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nqcs/vec.hpp"

namespace nqcs {

enum class jump_kind { sample, update };

/// Discrete state of all networks at one instant.
struct discrete_state {
  vec e, mu, m;
  std::vector<double> tau;
  std::vector<std::uint64_t> kappa;
  std::vector<int> b;
  std::vector<char> latch;  // pending-transmission flag per network
};

struct jump_record {
  double t = 0.0;
  long long j = 0;  // jump counter after this jump
  int network = 0;  // 0-based
  jump_kind kind = jump_kind::sample;
  double gamma = std::numeric_limits<double>::quiet_NaN();  // trigger value (samples)
  bool triggered = false;
  int granted_node = 0;  // 1-based; 0 when no transmission happened
  vec z;                 // scheduled signal of the jumping network (samples)
  std::vector<int> saturated_nodes;
  vec x;  // continuous state at the jump (unchanged by it)
  discrete_state pre, post;
  double norm_eta = 0.0, norm_e = 0.0;  // post-jump
  vec certs;                            // post-jump certificate values
};

struct flow_sample {
  double t = 0.0;
  long long j = 0;
  double norm_eta = 0.0, norm_e = 0.0;
  vec eta_norms;  // per tracking-error block, for plot data
  vec certs;
};

struct net_counters {
  long long samples = 0;
  long long triggered = 0;
  long long updates = 0;
  long long saturated_transmissions = 0;
};

struct trace {
  std::string model;
  std::uint64_t seed = 0;
  double t_end = 0.0;
  std::vector<std::string> cert_names;
  std::vector<flow_sample> flows;
  std::vector<jump_record> jumps;
  std::vector<net_counters> counters;
  long long total_jumps = 0;
  double final_t = 0.0;
  vec final_x, final_e;
  double max_norm_eta = 0.0;
};

namespace detail {

inline void put_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline void put_row(std::string& out, double t, long long j, int network, const char* kind,
                    double gamma, int triggered, double norm_eta, double norm_e,
                    const vec& certs, std::size_t n_certs) {
  put_num(out, t);
  out += ',';
  out += std::to_string(j);
  out += ',';
  if (network >= 0) out += std::to_string(network + 1);
  out += ',';
  out += kind;
  out += ',';
  if (!std::isnan(gamma)) put_num(out, gamma);
  out += ',';
  if (triggered >= 0) out += triggered ? '1' : '0';
  out += ',';
  put_num(out, norm_eta);
  out += ',';
  put_num(out, norm_e);
  for (std::size_t k = 0; k < n_certs; ++k) {
    out += ',';
    put_num(out, k < certs.size() ? certs[k] : 0.0);
  }
  out += '\n';
}

}  // namespace detail

/// Chronological CSV of flow samples and jumps.
inline void write_csv(const trace& tr, std::ostream& os) {
  std::string out = "t,j,network,kind,gamma,triggered,norm_eta,norm_e";
  for (const auto& n : tr.cert_names) {
    out += ',';
    out += n;
  }
  out += '\n';
  std::size_t fi = 0, ji = 0;
  const std::size_t nc = tr.cert_names.size();
  auto flow_first = [&] {
    if (fi >= tr.flows.size()) return false;
    if (ji >= tr.jumps.size()) return true;
    const auto& f = tr.flows[fi];
    const auto& jr = tr.jumps[ji];
    return f.t < jr.t || (f.t == jr.t && f.j < jr.j);
  };
  while (fi < tr.flows.size() || ji < tr.jumps.size()) {
    if (flow_first()) {
      const auto& f = tr.flows[fi++];
      detail::put_row(out, f.t, f.j, -1, "flow", std::numeric_limits<double>::quiet_NaN(), -1,
                      f.norm_eta, f.norm_e, f.certs, nc);
    } else {
      const auto& r = tr.jumps[ji++];
      detail::put_row(out, r.t, r.j, r.network, r.kind == jump_kind::sample ? "sample" : "update",
                      r.gamma, r.triggered ? 1 : 0, r.norm_eta, r.norm_e, r.certs, nc);
    }
  }
  os << out;
}

[[nodiscard]] inline nlohmann::ordered_json summary_json(const trace& tr) {
  nlohmann::ordered_json js;
  js["model"] = tr.model;
  js["seed"] = tr.seed;
  js["t_end"] = tr.t_end;
  js["jumps"] = tr.total_jumps;
  js["networks"] = nlohmann::ordered_json::array();
  for (const auto& c : tr.counters) {
    nlohmann::ordered_json n;
    n["samples"] = c.samples;
    n["triggered"] = c.triggered;
    n["updates"] = c.updates;
    n["saturated_transmissions"] = c.saturated_transmissions;
    js["networks"].push_back(n);
  }
  js["final"] = {{"t", tr.final_t},
                 {"norm_eta", tr.flows.empty() ? 0.0 : tr.flows.back().norm_eta},
                 {"norm_e", tr.flows.empty() ? 0.0 : tr.flows.back().norm_e}};
  js["max_norm_eta"] = tr.max_norm_eta;
  return js;
}

inline void write_summary(const trace& tr, std::ostream& os) { os << summary_json(tr).dump(2) << '\n'; }

}  // namespace nqcs
