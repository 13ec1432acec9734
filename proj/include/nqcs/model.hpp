#pragma once
// Plant/controller model interface. A model fixes the continuous state
// layout, the per-network error layouts (node partitions), and the coupled
// flow maps. Per-network quantities are passed as spans over the network's
// slice of the stacked error vector; delta is the per-network exogenous clock
// (it advances at unit rate and never jumps, so callers evaluate it directly).

#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nqcs/protocol.hpp"
#include "nqcs/vec.hpp"

namespace nqcs {

struct system_model {
  std::string name;
  int n_x = 0;
  std::vector<node_partition> nodes;  // scheduled node layout per network
  // Unscheduled trailing error components per network (reference/feedforward
  // channels delivered exactly at every arrival instead of contending for the
  // channel). They ride the same sample/update memory as scheduled blocks but
  // their sampled post-transmission error is zero.
  std::vector<int> e_tail_dims;
  std::vector<int> eta_dims;  // tracking-error block sizes per network

  // flow maps over the full stacked vectors; delta holds one clock per network
  std::function<void(std::span<const double> delta, std::span<const double> x,
                     std::span<const double> e, std::span<double> dx)>
      flow_x;
  std::function<void(std::span<const double> delta, std::span<const double> x,
                     std::span<const double> e, std::span<double> de)>
      flow_e;
  // signal vector actually scheduled on the networks, aligned with e
  std::function<void(std::span<const double> delta, std::span<const double> x,
                     std::span<const double> e, std::span<double> z)>
      z_of;
  // stacked tracking error, blocks per network of size eta_dims[i]
  std::function<void(std::span<const double> x, std::span<double> eta)> eta_of;

  [[nodiscard]] int network_count() const { return static_cast<int>(nodes.size()); }

  [[nodiscard]] int tail_dim(int net) const {
    return e_tail_dims.empty() ? 0 : e_tail_dims[net];
  }

  [[nodiscard]] int e_dim(int net) const { return nodes[net].total_dim() + tail_dim(net); }

  [[nodiscard]] int n_e() const {
    int n = 0;
    for (int i = 0; i < network_count(); ++i) n += e_dim(i);
    return n;
  }

  [[nodiscard]] int n_eta() const { return std::accumulate(eta_dims.begin(), eta_dims.end(), 0); }

  [[nodiscard]] int e_offset(int net) const {
    int off = 0;
    for (int i = 0; i < net; ++i) off += e_dim(i);
    return off;
  }

  [[nodiscard]] int eta_offset(int net) const {
    return std::accumulate(eta_dims.begin(), eta_dims.begin() + net, 0);
  }

  void validate() const {
    if (nodes.empty()) throw std::invalid_argument("model: needs at least one network");
    if (eta_dims.size() != nodes.size())
      throw std::invalid_argument("model: eta_dims must match network count");
    if (!e_tail_dims.empty() && e_tail_dims.size() != nodes.size())
      throw std::invalid_argument("model: e_tail_dims must match network count");
    for (const auto& p : nodes) p.validate();
    for (int i = 0; i < network_count(); ++i)
      if (tail_dim(i) < 0) throw std::invalid_argument("model: tail dims must be >= 0");
    if (!flow_x || !flow_e || !z_of || !eta_of)
      throw std::invalid_argument("model: all flow/output maps must be set");
  }
};

/// Storage-function set evaluated by the runtime monitors: a state certificate
/// V(x) and one network certificate W per network (shared signature with the
/// triggering machinery, but these are the analysis functions, which need not
/// coincide with what the trigger thresholds on).
struct certificate_set {
  std::function<double(std::span<const double> x)> v_fn;
  std::vector<std::function<double(std::span<const double> e, std::span<const double> mu,
                                   std::span<const double> m, std::uint64_t kappa, int b)>>
      w_fns;
  std::vector<double> lambda;  // per-network contraction the monitors check against
};

/// Decoupled all-zero plant: flows vanish and the scheduled signal is
/// identically zero, which isolates the sampling/update machinery in tests.
[[nodiscard]] inline system_model zero_dynamics_model(int n_x,
                                                      std::vector<node_partition> nets) {
  system_model m;
  m.name = "zero_dynamics";
  m.n_x = n_x;
  m.nodes = std::move(nets);
  m.eta_dims.assign(m.nodes.size(), 0);
  if (!m.eta_dims.empty()) m.eta_dims[0] = n_x;  // report |x| as the tracking error
  m.flow_x = [](auto, auto, auto, std::span<double> dx) {
    std::fill(dx.begin(), dx.end(), 0.0);
  };
  m.flow_e = [](auto, auto, auto, std::span<double> de) {
    std::fill(de.begin(), de.end(), 0.0);
  };
  m.z_of = [](auto, auto, auto, std::span<double> z) { std::fill(z.begin(), z.end(), 0.0); };
  m.eta_of = [](std::span<const double> x, std::span<double> eta) {
    std::copy(x.begin(), x.end(), eta.begin());
  };
  return m;
}

}  // namespace nqcs
