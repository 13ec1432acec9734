#pragma once
// Medium-access scheduling. At a sampling event exactly one node per network
// is granted the channel; the granted block of the network-induced error is
// overwritten with the transmission error of that node (zero when the channel
// carries exact values) and every other block is left alone.

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nqcs/vec.hpp"

namespace nqcs {

enum class protocol_kind { round_robin, try_once_discard };

/// Node layout of one network's error vector: node k (1-based) owns the
/// contiguous components [offset(k), offset(k) + dim(k)).
struct node_partition {
  std::vector<int> dims;

  [[nodiscard]] int node_count() const { return static_cast<int>(dims.size()); }

  [[nodiscard]] int total_dim() const { return std::accumulate(dims.begin(), dims.end(), 0); }

  [[nodiscard]] int offset(int node) const {
    int off = 0;
    for (int k = 1; k < node; ++k) off += dims[k - 1];
    return off;
  }

  [[nodiscard]] std::span<const double> block(std::span<const double> v, int node) const {
    return v.subspan(offset(node), dims[node - 1]);
  }

  [[nodiscard]] std::span<double> block(std::span<double> v, int node) const {
    return v.subspan(offset(node), dims[node - 1]);
  }

  void validate() const {
    if (dims.empty()) throw std::invalid_argument("partition: needs at least one node");
    for (int d : dims)
      if (d < 1) throw std::invalid_argument("partition: node dims must be >= 1");
  }
};

/// Round robin grant for transmission counter kappa: the unique node l in
/// {1..ell} with kappa = l (mod ell). Total in kappa, so the grant sequence
/// starting from kappa = 0 is ell, 1, 2, ..., ell, 1, ...
[[nodiscard]] inline int rr_select(std::uint64_t kappa, int ell) {
  const int r = static_cast<int>(kappa % static_cast<std::uint64_t>(ell));
  return r == 0 ? ell : r;
}

/// Try-once-discard grant: the node with the largest error block norm,
/// smallest index on ties.
[[nodiscard]] inline int tod_select(std::span<const double> e, const node_partition& part) {
  int best = 1;
  double best_sq = norm2_sq(part.block(e, 1));
  for (int k = 2; k <= part.node_count(); ++k) {
    const double sq = norm2_sq(part.block(e, k));
    if (sq > best_sq) {
      best = k;
      best_sq = sq;
    }
  }
  return best;
}

[[nodiscard]] inline int select_node(protocol_kind kind, std::uint64_t kappa,
                                     std::span<const double> e, const node_partition& part) {
  return kind == protocol_kind::round_robin ? rr_select(kappa, part.node_count())
                                            : tod_select(e, part);
}

/// Post-transmission error h: the granted node's block is replaced by that
/// node's transmission error eps_q, all other blocks keep their value.
/// eps_q is indexed like e; only the granted block of it is read.
inline void protocol_update(protocol_kind kind, std::uint64_t kappa, std::span<const double> e,
                            std::span<const double> eps_q, const node_partition& part,
                            std::span<double> h_out, int* granted = nullptr) {
  const int g = select_node(kind, kappa, e, part);
  if (granted) *granted = g;
  std::copy(e.begin(), e.end(), h_out.begin());
  const int off = part.offset(g);
  for (int c = 0; c < part.dims[g - 1]; ++c) h_out[off + c] = eps_q[off + c];
}

[[nodiscard]] inline std::string to_string(protocol_kind k) {
  return k == protocol_kind::round_robin ? "round_robin" : "try_once_discard";
}

[[nodiscard]] inline protocol_kind protocol_from_string(const std::string& s) {
  if (s == "round_robin" || s == "rr") return protocol_kind::round_robin;
  if (s == "try_once_discard" || s == "tod") return protocol_kind::try_once_discard;
  throw std::invalid_argument("unknown protocol: " + s);
}

}  // namespace nqcs
