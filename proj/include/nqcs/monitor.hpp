#pragma once
// Post-hoc certificate monitors. These re-evaluate the analysis inequalities
// on a recorded trace:
//
//   * sampling contraction: at every transmission, the anticipated in-flight
//     certificate must contract, W_post <= lambda * W_pre + tol;
//   * arrival non-expansion: at every arriving transmission the realized
//     holding-mode certificate must not exceed the anticipated one;
//   * storage jumps: the composite storage V(x) + sum_i gamma_ib phi_ib(tau_i)
//     W_i^2 evaluated on both sides of each jump (report-only: whether jumps
//     decrease it depends on design conditions the run's constants may not
//     satisfy);
//   * domain invariants: hybrid time monotonicity, timer windows, spacing
//     bounds, mode alternation, and block locality of every jump.
//
// Contraction is only claimed by the theory where a transmission actually
// happened, so both jump checks skip untriggered events.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nqcs/model.hpp"
#include "nqcs/phi_ode.hpp"
#include "nqcs/sim.hpp"
#include "nqcs/trace.hpp"

namespace nqcs {

struct jump_violation {
  double t = 0.0;
  long long j = 0;
  int network = 0;
  double lhs = 0.0, rhs = 0.0;
};

struct contraction_report {
  long long triggered_samplings = 0;
  long long triggered_updates = 0;
  std::vector<jump_violation> sampling_violations;
  std::vector<jump_violation> update_violations;
};

struct storage_report {
  long long jumps_checked = 0;
  double max_jump_increase = 0.0;
  std::vector<jump_violation> increases;
};

namespace detail {

struct net_layout {
  int e_off, e_dim, mu_off, mu_dim;
};

inline std::vector<net_layout> layouts(const system_model& model) {
  std::vector<net_layout> out;
  int mu_off = 0;
  for (int i = 0; i < model.network_count(); ++i) {
    const int ell = model.nodes[i].node_count();
    out.push_back({model.e_offset(i), model.e_dim(i), mu_off, ell});
    mu_off += ell;
  }
  return out;
}

inline double eval_w(const certificate_set& certs, const net_layout& lo, int i,
                     const discrete_state& d) {
  return certs.w_fns[i](
      std::span<const double>(d.e.data() + lo.e_off, static_cast<std::size_t>(lo.e_dim)),
      std::span<const double>(d.mu.data() + lo.mu_off, static_cast<std::size_t>(lo.mu_dim)),
      std::span<const double>(d.m.data() + lo.e_off, static_cast<std::size_t>(lo.e_dim)),
      d.kappa[static_cast<std::size_t>(i)], d.b[static_cast<std::size_t>(i)]);
}

}  // namespace detail

/// Certificate contraction at transmissions and arrivals.
[[nodiscard]] inline contraction_report check_contraction(const trace& tr,
                                                          const system_model& model,
                                                          const certificate_set& certs,
                                                          double tol = 1e-9) {
  contraction_report rep;
  const auto los = detail::layouts(model);
  for (const auto& r : tr.jumps) {
    if (!r.triggered) continue;
    const auto& lo = los[static_cast<std::size_t>(r.network)];
    const double w_pre = detail::eval_w(certs, lo, r.network, r.pre);
    const double w_post = detail::eval_w(certs, lo, r.network, r.post);
    if (r.kind == jump_kind::sample) {
      rep.triggered_samplings += 1;
      const double bound = certs.lambda[static_cast<std::size_t>(r.network)] * w_pre;
      if (w_post > bound + tol)
        rep.sampling_violations.push_back({r.t, r.j, r.network, w_post, bound});
    } else {
      rep.triggered_updates += 1;
      if (w_post > w_pre + tol)
        rep.update_violations.push_back({r.t, r.j, r.network, w_post, w_pre});
    }
  }
  return rep;
}

/// Composite storage function evaluated across every jump. phis holds one
/// (holding, in-flight) weight trajectory pair per network, solved out to at
/// least the largest sampling interval.
[[nodiscard]] inline storage_report check_storage(
    const trace& tr, const system_model& model, const std::vector<network_config>& nets,
    const certificate_set& certs, const std::vector<std::pair<phi_solution, phi_solution>>& phis,
    double tol = 1e-9) {
  storage_report rep;
  const auto los = detail::layouts(model);
  auto storage = [&](const jump_record& r, const discrete_state& d) {
    double u = certs.v_fn ? certs.v_fn(r.x) : 0.0;
    for (int i = 0; i < model.network_count(); ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const double w = detail::eval_w(certs, los[ii], i, d);
      const double tau = d.tau[ii];
      const double phi = d.b[ii] == 0 ? phis[ii].first.eval(tau) : phis[ii].second.eval(tau);
      const double gamma = d.b[ii] == 0 ? nets[ii].etm.gamma0 : nets[ii].etm.gamma1;
      u += gamma * phi * w * w;
    }
    return u;
  };
  for (const auto& r : tr.jumps) {
    const double u_pre = storage(r, r.pre);
    const double u_post = storage(r, r.post);
    rep.jumps_checked += 1;
    if (u_post > u_pre + tol) {
      rep.max_jump_increase = std::max(rep.max_jump_increase, u_post - u_pre);
      rep.increases.push_back({r.t, r.j, r.network, u_post, u_pre});
    }
  }
  return rep;
}

/// Transmissions whose sampled signal exceeded the representable range of the
/// zoomed quantizer; any entry means the error bound no longer applied there.
[[nodiscard]] inline long long saturated_transmission_count(const trace& tr) {
  long long n = 0;
  for (const auto& c : tr.counters) n += c.saturated_transmissions;
  return n;
}

/// Structural invariants of the recorded hybrid run. Returns human-readable
/// problems; an empty result means the trace is well formed.
[[nodiscard]] inline std::vector<std::string> check_hybrid_domain(
    const trace& tr, const system_model& model, const std::vector<network_config>& nets) {
  std::vector<std::string> out;
  auto complain = [&](const jump_record& r, const std::string& what) {
    out.push_back("t=" + std::to_string(r.t) + " j=" + std::to_string(r.j) + " net=" +
                  std::to_string(r.network + 1) + ": " + what);
  };
  const auto los = detail::layouts(model);
  const double slack = 1e-9;

  double prev_t = 0.0;
  for (std::size_t k = 0; k < tr.flows.size(); ++k) {
    if (tr.flows[k].t < prev_t - slack) {
      out.push_back("flow samples not time-monotone at t=" + std::to_string(tr.flows[k].t));
      break;
    }
    prev_t = tr.flows[k].t;
  }

  std::vector<double> last_sample_t(nets.size(), -1.0);
  std::vector<int> expect_b(nets.size(), 0);
  std::vector<net_counters> seen(nets.size());
  prev_t = 0.0;
  for (std::size_t k = 0; k < tr.jumps.size(); ++k) {
    const auto& r = tr.jumps[k];
    const auto ni = static_cast<std::size_t>(r.network);
    const auto& lo = los[ni];
    const auto& nc = nets[ni];
    if (r.j != static_cast<long long>(k) + 1) complain(r, "jump counter out of sequence");
    if (r.t < prev_t - slack) complain(r, "jump time decreased");
    prev_t = r.t;
    if (r.pre.b[ni] != expect_b[ni]) complain(r, "mode alternation broken");
    expect_b[ni] = 1 - expect_b[ni];

    // mode alternation and timer windows
    const double tau_pre = r.pre.tau[ni];
    if (r.kind == jump_kind::sample) {
      seen[ni].samples += 1;
      if (r.triggered) seen[ni].triggered += 1;
      if (r.pre.b[ni] != 0 || r.post.b[ni] != 1) complain(r, "sampling outside holding mode");
      if (tau_pre < nc.eps_min - slack || tau_pre > nc.masp + slack)
        complain(r, "sampling timer " + std::to_string(tau_pre) + " outside [eps_min, masp]");
      if (r.post.tau[ni] != 0.0) complain(r, "sampling did not reset the timer");
      if (last_sample_t[ni] >= 0.0 && r.t - last_sample_t[ni] < nc.eps_min - slack)
        complain(r, "sampling spacing below eps_min");
      last_sample_t[ni] = r.t;
      const std::uint64_t dk = r.post.kappa[ni] - r.pre.kappa[ni];
      if (dk != (r.triggered ? 1u : 0u)) complain(r, "transmission counter mis-stepped");
      if ((r.post.latch[ni] != 0) != r.triggered) complain(r, "trigger latch mismatch");
      for (int c = 0; c < lo.e_dim; ++c)
        if (r.post.e[static_cast<std::size_t>(lo.e_off + c)] !=
            r.pre.e[static_cast<std::size_t>(lo.e_off + c)]) {
          complain(r, "sampling modified the network error");
          break;
        }
      for (int c = 0; c < lo.mu_dim; ++c)
        if (r.post.mu[static_cast<std::size_t>(lo.mu_off + c)] !=
            r.pre.mu[static_cast<std::size_t>(lo.mu_off + c)]) {
          complain(r, "sampling modified the zoom state");
          break;
        }
    } else {
      seen[ni].updates += 1;
      if (r.pre.b[ni] != 1 || r.post.b[ni] != 0) complain(r, "update outside in-flight mode");
      if (tau_pre > nc.mad + slack) complain(r, "arrival delay exceeds mad");
      if (r.post.tau[ni] != tau_pre) complain(r, "update changed the timer");
      if (r.post.kappa[ni] != r.pre.kappa[ni]) complain(r, "update changed the counter");
      if ((r.pre.latch[ni] != 0) != r.triggered) complain(r, "update latch mismatch");
      for (int c = 0; c < lo.e_dim; ++c) {
        const auto idx = static_cast<std::size_t>(lo.e_off + c);
        const double want = r.triggered ? r.pre.e[idx] + r.pre.m[idx] : r.pre.e[idx];
        if (r.post.e[idx] != want) {
          complain(r, "update applied the wrong error increment");
          break;
        }
      }
      for (int c = 0; c < lo.e_dim; ++c) {
        const auto idx = static_cast<std::size_t>(lo.e_off + c);
        if (r.post.m[idx] != -r.post.e[idx]) {
          complain(r, "memory not rearmed to -e");
          break;
        }
      }
      const bool zoomed = !nc.zoom_on_trigger_only || r.triggered;
      for (int c = 0; c < lo.mu_dim; ++c) {
        const auto idx = static_cast<std::size_t>(lo.mu_off + c);
        const double want =
            zoomed ? r.pre.mu[idx] * nc.zoom_factor[static_cast<std::size_t>(c)] : r.pre.mu[idx];
        if (r.post.mu[idx] != want) {
          complain(r, "zoom factor misapplied");
          break;
        }
      }
    }

    // block locality: nothing outside the jumping network moves
    for (std::size_t q = 0; q < nets.size(); ++q) {
      if (q == ni) continue;
      const auto& qlo = los[q];
      bool moved = r.pre.tau[q] != r.post.tau[q] || r.pre.kappa[q] != r.post.kappa[q] ||
                   r.pre.b[q] != r.post.b[q] || r.pre.latch[q] != r.post.latch[q];
      for (int c = 0; c < qlo.e_dim && !moved; ++c) {
        const auto idx = static_cast<std::size_t>(qlo.e_off + c);
        moved = r.pre.e[idx] != r.post.e[idx] || r.pre.m[idx] != r.post.m[idx];
      }
      for (int c = 0; c < qlo.mu_dim && !moved; ++c) {
        const auto idx = static_cast<std::size_t>(qlo.mu_off + c);
        moved = r.pre.mu[idx] != r.post.mu[idx];
      }
      if (moved) complain(r, "jump leaked into network " + std::to_string(q + 1));
    }
  }

  for (std::size_t i = 0; i < nets.size(); ++i) {
    const auto& c = tr.counters[i];
    if (seen[i].samples != c.samples || seen[i].triggered != c.triggered ||
        seen[i].updates != c.updates)
      out.push_back("network " + std::to_string(i + 1) + ": counters disagree with records");
    if (seen[i].updates > seen[i].samples)
      out.push_back("network " + std::to_string(i + 1) + ": more updates than samplings");
  }
  return out;
}

}  // namespace nqcs
