#pragma once
// Hybrid simulator. Between events the stacked state (x, e) flows under the
// model's vector fields (fixed-step RK4); at events one network jumps:
//
//   sampling (holding mode): the scheduled signal is sampled, the trigger rule
//   decides whether to transmit, and on transmission the post-arrival error is
//   latched into the memory m (granted block through the protocol/quantizer,
//   unscheduled tail exactly); the transmission counter advances, the timer
//   resets, and the network enters the in-flight mode.
//
//   update (in-flight mode): a prior transmission arrives and the latched
//   memory is applied to e; zoom factors contract mu; m is rearmed to -e and
//   the network returns to the holding mode. A sampling that did not transmit
//   still produces an (empty) update so the mode always alternates.
//
// Timers and exogenous clocks are evaluated in closed form (tau = t since the
// last sampling, delta = delta0 + t), never integrated. All randomness comes
// from per-network engines seeded from the run seed, and each sampling draws
// exactly two numbers (next interval, then delay) whatever the trigger
// decides, so event times are identical across trigger configurations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nqcs/etm.hpp"
#include "nqcs/model.hpp"
#include "nqcs/protocol.hpp"
#include "nqcs/quantizer.hpp"
#include "nqcs/rng.hpp"
#include "nqcs/trace.hpp"
#include "nqcs/vec.hpp"

namespace nqcs {

struct sim_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct sampling_policy {
  enum class mode { fixed, uniform };
  mode m = mode::fixed;
  double fixed_h = 0.01;
  double lo = 0.0, hi = 0.0;  // uniform support, inside [eps_min, masp]

  [[nodiscard]] double max_interval() const { return m == mode::fixed ? fixed_h : hi; }
  [[nodiscard]] double min_interval() const { return m == mode::fixed ? fixed_h : lo; }
};

struct delay_policy {
  enum class mode { fixed, uniform };
  mode m = mode::uniform;
  double fixed_d = 0.0;  // fixed mode: must be <= mad and below every interval
};

struct network_config {
  std::string name;
  protocol_kind protocol = protocol_kind::round_robin;
  double masp = 0.01;     // largest inter-sampling time
  double mad = 0.0;       // largest arrival delay
  double eps_min = 1e-4;  // smallest inter-sampling time
  sampling_policy sampling;
  delay_policy delay;
  etm_params etm;
  std::vector<quantizer_params> quant;  // one per scheduled node
  std::vector<double> zoom_factor;      // one per scheduled node
  bool zoom_on_trigger_only = false;
  std::vector<double> mu0;  // empty: startup rule from z(0)
  double delta0 = 0.0;
  std::uint64_t kappa0 = 0;
};

/// Trigger-side functions of one network (may be empty when rho = 0).
struct network_functions {
  w_fn trigger_w;
  phi_fn trigger_phi;
};

struct sim_options {
  double t_end = 1.0;
  double step = 0.0;  // 0: smallest eps_min / 20
  int flow_stride = 50;
  std::uint64_t seed = 1;
  bool record_flows = true;
};

class simulator {
 public:
  simulator(system_model model, std::vector<network_config> nets,
            std::vector<network_functions> fns, sim_options opts, certificate_set certs = {})
      : model_(std::move(model)),
        nets_(std::move(nets)),
        fns_(std::move(fns)),
        opts_(opts),
        certs_(std::move(certs)) {
    model_.validate();
    if (nets_.size() != static_cast<std::size_t>(model_.network_count()))
      throw std::invalid_argument("simulator: one network config per model network required");
    if (fns_.empty()) fns_.resize(nets_.size());
    if (fns_.size() != nets_.size())
      throw std::invalid_argument("simulator: trigger function count mismatch");
    for (std::size_t i = 0; i < nets_.size(); ++i) {
      const auto& nc = nets_[i];
      validate(nc.etm);
      const int ell = model_.nodes[i].node_count();
      if (nc.quant.size() != static_cast<std::size_t>(ell))
        throw std::invalid_argument("simulator: quantizer params per scheduled node required");
      for (const auto& q : nc.quant) q.validate();
      if (nc.zoom_factor.size() != static_cast<std::size_t>(ell))
        throw std::invalid_argument("simulator: zoom factor per scheduled node required");
      for (double om : nc.zoom_factor)
        if (!(om > 0.0 && om <= 1.0))
          throw std::invalid_argument("simulator: zoom factors must lie in (0, 1]");
      if (nc.etm.rho > 0.0 && (!fns_[i].trigger_w || !fns_[i].trigger_phi))
        throw std::invalid_argument("simulator: event triggering needs W and phi functions");
    }
    if (certs_.v_fn && certs_.w_fns.size() != nets_.size())
      throw std::invalid_argument("simulator: certificate set needs one W per network");
    if (opts_.flow_stride < 1) opts_.flow_stride = 1;
  }

  [[nodiscard]] trace run(vec x0, vec e0 = {}) {
    const int N = model_.network_count();
    if (x0.size() != static_cast<std::size_t>(model_.n_x))
      throw std::invalid_argument("simulator: x0 dimension mismatch");
    if (e0.empty()) e0.assign(static_cast<std::size_t>(model_.n_e()), 0.0);
    if (e0.size() != static_cast<std::size_t>(model_.n_e()))
      throw std::invalid_argument("simulator: e0 dimension mismatch");

    x_ = std::move(x0);
    e_ = std::move(e0);
    m_.assign(e_.size(), 0.0);
    for (std::size_t k = 0; k < e_.size(); ++k) m_[k] = -e_[k];
    const double inf = std::numeric_limits<double>::infinity();

    mu_.assign(N, {});
    tau_reset_t_.assign(N, 0.0);
    kappa_.assign(N, 0);
    b_.assign(N, 0);
    latch_.assign(N, 0);
    next_sample_t_.assign(N, 0.0);
    update_t_.assign(N, inf);
    last_sample_t_.assign(N, -inf);
    engines_.clear();

    step_ = opts_.step;
    if (step_ <= 0.0) {
      double eps = inf;
      for (const auto& nc : nets_) eps = std::min(eps, nc.eps_min);
      step_ = eps / 20.0;
    }

    zbuf_.assign(static_cast<std::size_t>(model_.n_e()), 0.0);
    etabuf_.assign(static_cast<std::size_t>(model_.n_eta()), 0.0);
    const std::size_t ny = x_.size() + e_.size();
    k1_.assign(ny, 0.0);
    k2_.assign(ny, 0.0);
    k3_.assign(ny, 0.0);
    k4_.assign(ny, 0.0);
    ytmp_.assign(ny, 0.0);
    delta_buf_.assign(N, 0.0);

    t_ = 0.0;
    j_ = 0;

    eval_z(0.0);
    for (int i = 0; i < N; ++i) {
      const auto& nc = nets_[i];
      kappa_[i] = nc.kappa0;
      const int ell = model_.nodes[i].node_count();
      mu_[i].assign(static_cast<std::size_t>(ell), 0.0);
      for (int jn = 1; jn <= ell; ++jn) {
        const auto zb = model_.nodes[i].block(net_slice(zbuf_, i), jn);
        mu_[i][jn - 1] = nc.mu0.empty() ? initial_mu(nc.quant[jn - 1], zb) : nc.mu0[jn - 1];
        if (!(mu_[i][jn - 1] > 0.0))
          throw std::invalid_argument("simulator: initial mu must be > 0");
      }
      engines_.push_back(seeded_engine(opts_.seed, static_cast<std::uint64_t>(i)));
      next_sample_t_[i] = draw_interval(i);
    }

    tr_ = trace{};
    tr_.model = model_.name;
    tr_.seed = opts_.seed;
    tr_.t_end = opts_.t_end;
    tr_.counters.assign(static_cast<std::size_t>(N), net_counters{});
    if (certs_.v_fn) {
      tr_.cert_names.push_back("V");
      for (int i = 0; i < N; ++i) tr_.cert_names.push_back("W" + std::to_string(i + 1));
    }
    record_flow();

    while (true) {
      double t_ev = inf;
      int net = -1;
      for (int i = 0; i < N; ++i) {
        const double te = b_[i] == 0 ? next_sample_t_[i] : update_t_[i];
        if (te < t_ev) {  // ties resolve to the lowest network index
          t_ev = te;
          net = i;
        }
      }
      if (net < 0 || t_ev > opts_.t_end) break;
      integrate_to(t_ev);
      if (b_[net] == 0)
        jump_sample(net);
      else
        jump_update(net);
    }
    integrate_to(opts_.t_end);
    record_flow(true);

    tr_.total_jumps = j_;
    tr_.final_t = t_;
    tr_.final_x = x_;
    tr_.final_e = e_;
    return std::move(tr_);
  }

 private:
  [[nodiscard]] std::span<double> net_slice(vec& v, int i) {
    return slice(v, static_cast<std::size_t>(model_.e_offset(i)),
                 static_cast<std::size_t>(model_.e_dim(i)));
  }
  [[nodiscard]] std::span<const double> net_slice(const vec& v, int i) const {
    return slice(v, static_cast<std::size_t>(model_.e_offset(i)),
                 static_cast<std::size_t>(model_.e_dim(i)));
  }

  [[nodiscard]] double tau_now(int i) const { return t_ - tau_reset_t_[i]; }

  [[nodiscard]] double draw_interval(int i) {
    const auto& sp = nets_[i].sampling;
    return sp.m == sampling_policy::mode::fixed ? sp.fixed_h
                                                : uniform_in(engines_[i], sp.lo, sp.hi);
  }

  [[nodiscard]] double draw_delay(int i, double h_next) {
    const auto& dp = nets_[i].delay;
    if (dp.m == delay_policy::mode::fixed) return dp.fixed_d;
    return uniform_in(engines_[i], 0.0, std::min(nets_[i].mad, h_next));
  }

  void eval_z(double t) {
    for (int i = 0; i < model_.network_count(); ++i) delta_buf_[i] = nets_[i].delta0 + t;
    model_.z_of(delta_buf_, x_, e_, zbuf_);
  }

  void deriv(double t, std::span<const double> x, std::span<const double> e,
             std::span<double> dx, std::span<double> de) {
    for (int i = 0; i < model_.network_count(); ++i) delta_buf_[i] = nets_[i].delta0 + t;
    model_.flow_x(delta_buf_, x, e, dx);
    model_.flow_e(delta_buf_, x, e, de);
  }

  void rk4_step(double dt) {
    const std::size_t nx = x_.size(), ne = e_.size();
    auto stage = [&](vec& k, double c, double t_frac, const vec& kin) {
      for (std::size_t q = 0; q < nx; ++q) ytmp_[q] = x_[q] + c * dt * kin[q];
      for (std::size_t q = 0; q < ne; ++q) ytmp_[nx + q] = e_[q] + c * dt * kin[nx + q];
      deriv(t_ + t_frac * dt, std::span<const double>(ytmp_.data(), nx),
            std::span<const double>(ytmp_.data() + nx, ne), std::span<double>(k.data(), nx),
            std::span<double>(k.data() + nx, ne));
    };
    deriv(t_, x_, e_, std::span<double>(k1_.data(), nx), std::span<double>(k1_.data() + nx, ne));
    stage(k2_, 0.5, 0.5, k1_);
    stage(k3_, 0.5, 0.5, k2_);
    stage(k4_, 1.0, 1.0, k3_);
    for (std::size_t q = 0; q < nx; ++q)
      x_[q] += dt / 6.0 * (k1_[q] + 2.0 * k2_[q] + 2.0 * k3_[q] + k4_[q]);
    for (std::size_t q = 0; q < ne; ++q)
      e_[q] += dt / 6.0 * (k1_[nx + q] + 2.0 * k2_[nx + q] + 2.0 * k3_[nx + q] + k4_[nx + q]);
  }

  void integrate_to(double t_target) {
    if (!(t_target > t_)) return;
    const double t0 = t_;
    long long k = 0;
    while (t_ < t_target) {
      const double remaining = t_target - t_;
      const double dt = std::min(step_, remaining);
      rk4_step(dt);
      ++k;
      t_ = dt == remaining ? t_target : t0 + static_cast<double>(k) * step_;
      if (!all_finite(x_) || !all_finite(e_))
        throw sim_error("state diverged at t = " + std::to_string(t_));
      if (opts_.record_flows && (k % opts_.flow_stride == 0 || t_ == t_target)) record_flow();
    }
  }

  void record_flow(bool force = false) {
    if (!opts_.record_flows && !force) return;
    flow_sample f;
    f.t = t_;
    f.j = j_;
    model_.eta_of(x_, etabuf_);
    f.norm_eta = norm2(etabuf_);
    f.eta_norms.resize(model_.eta_dims.size());
    for (std::size_t i = 0; i < model_.eta_dims.size(); ++i)
      f.eta_norms[i] = norm2(slice(etabuf_, model_.eta_offset(static_cast<int>(i)),
                                   model_.eta_dims[i]));
    f.norm_e = norm2(e_);
    f.certs = eval_certs();
    tr_.max_norm_eta = std::max(tr_.max_norm_eta, f.norm_eta);
    if (!tr_.flows.empty() && tr_.flows.back().t == f.t && tr_.flows.back().j == f.j)
      tr_.flows.back() = std::move(f);  // collapse duplicate segment boundaries
    else
      tr_.flows.push_back(std::move(f));
  }

  [[nodiscard]] vec eval_certs() {
    vec out;
    if (!certs_.v_fn) return out;
    out.reserve(1 + nets_.size());
    out.push_back(certs_.v_fn(x_));
    for (std::size_t i = 0; i < nets_.size(); ++i) {
      const int ii = static_cast<int>(i);
      out.push_back(certs_.w_fns[i](net_slice(e_, ii), mu_[i], net_slice(m_, ii), kappa_[i],
                                    b_[ii]));
    }
    return out;
  }

  [[nodiscard]] discrete_state snapshot() const {
    discrete_state d;
    d.e = e_;
    d.m = m_;
    for (const auto& mu : mu_) d.mu.insert(d.mu.end(), mu.begin(), mu.end());
    d.tau.resize(nets_.size());
    for (std::size_t i = 0; i < nets_.size(); ++i) d.tau[i] = tau_now(static_cast<int>(i));
    d.kappa = kappa_;
    d.b = b_;
    d.latch = latch_;
    return d;
  }

  void finish_record(jump_record& r) {
    r.x = x_;
    r.post = snapshot();
    model_.eta_of(x_, etabuf_);
    r.norm_eta = norm2(etabuf_);
    r.norm_e = norm2(e_);
    r.certs = eval_certs();
    tr_.max_norm_eta = std::max(tr_.max_norm_eta, r.norm_eta);
    tr_.jumps.push_back(std::move(r));
  }

  void jump_sample(int i) {
    const auto& nc = nets_[i];
    const double tau = tau_now(i);
    if (tau < nc.eps_min - 1e-9 || tau > nc.masp + 1e-9)
      throw sim_error("network " + std::to_string(i + 1) + ": sampling timer " +
                      std::to_string(tau) + " outside [eps_min, masp]");
    if (t_ - last_sample_t_[i] < nc.eps_min * 1e-6)
      throw sim_error("network " + std::to_string(i + 1) + ": sampling accumulation at t = " +
                      std::to_string(t_));
    last_sample_t_[i] = t_;

    jump_record r;
    r.t = t_;
    r.network = i;
    r.kind = jump_kind::sample;
    r.pre = snapshot();

    eval_z(t_);
    const auto z_i = net_slice(zbuf_, i);
    r.z.assign(z_i.begin(), z_i.end());

    const auto& part = model_.nodes[i];
    const int ell = part.node_count();
    const auto e_i = net_slice(e_, i);
    const auto m_i = net_slice(m_, i);

    for (int jn = 1; jn <= ell; ++jn)
      if (saturated(nc.quant[jn - 1], mu_[i][jn - 1], part.block(z_i, jn)))
        r.saturated_nodes.push_back(jn);

    double w = 0.0, phi = 0.0;
    if (fns_[i].trigger_w) w = fns_[i].trigger_w(e_i, mu_[i], m_i, kappa_[i], 0);
    if (fns_[i].trigger_phi) phi = fns_[i].trigger_phi(z_i, 0);
    r.gamma = gamma_value(nc.etm, w, phi, 0);
    r.triggered = triggered(r.gamma);

    if (r.triggered) {
      vec eps_q(e_i.size(), 0.0);
      for (int jn = 1; jn <= ell; ++jn) {
        const auto zb = part.block(z_i, jn);
        auto qb = part.block(std::span<double>(eps_q), jn);
        if (nc.quant[jn - 1].enabled)
          quantization_error(nc.quant[jn - 1], mu_[i][jn - 1], zb, qb);
      }
      vec h(e_i.size(), 0.0);  // unscheduled tail arrives exactly: h stays 0 there
      const int np = part.total_dim();
      protocol_update(nc.protocol, kappa_[i], e_i.first(np), eps_q, part,
                      std::span<double>(h.data(), np), &r.granted_node);
      auto mm = net_slice(m_, i);
      for (std::size_t c = 0; c < mm.size(); ++c) mm[c] = h[c] - e_i[c];
      kappa_[i] += 1;
      tr_.counters[i].triggered += 1;
      if (!r.saturated_nodes.empty()) tr_.counters[i].saturated_transmissions += 1;
    }
    latch_[i] = r.triggered ? 1 : 0;
    b_[i] = 1;
    tau_reset_t_[i] = t_;
    tr_.counters[i].samples += 1;
    j_ += 1;
    r.j = j_;

    const double h_next = draw_interval(i);
    const double d = draw_delay(i, h_next);
    next_sample_t_[i] = t_ + h_next;
    update_t_[i] = t_ + d;
    finish_record(r);
  }

  void jump_update(int i) {
    const auto& nc = nets_[i];
    if (tau_now(i) > nc.mad + 1e-9)
      throw sim_error("network " + std::to_string(i + 1) + ": arrival delay exceeds mad");

    jump_record r;
    r.t = t_;
    r.network = i;
    r.kind = jump_kind::update;
    r.triggered = latch_[i] != 0;
    r.pre = snapshot();

    auto e_i = net_slice(e_, i);
    auto m_i = net_slice(m_, i);
    if (latch_[i]) {
      for (std::size_t c = 0; c < e_i.size(); ++c) e_i[c] += m_i[c];
    }
    if (!nc.zoom_on_trigger_only || latch_[i]) {
      for (std::size_t jn = 0; jn < mu_[i].size(); ++jn) mu_[i][jn] *= nc.zoom_factor[jn];
    }
    for (std::size_t c = 0; c < m_i.size(); ++c) m_i[c] = -e_i[c];
    b_[i] = 0;
    update_t_[i] = std::numeric_limits<double>::infinity();
    tr_.counters[i].updates += 1;
    j_ += 1;
    r.j = j_;
    finish_record(r);
  }

  system_model model_;
  std::vector<network_config> nets_;
  std::vector<network_functions> fns_;
  sim_options opts_;
  certificate_set certs_;

  // run state
  vec x_, e_, m_;
  std::vector<vec> mu_;
  std::vector<double> tau_reset_t_;
  std::vector<std::uint64_t> kappa_;
  std::vector<int> b_;
  std::vector<char> latch_;
  std::vector<double> next_sample_t_, update_t_, last_sample_t_;
  std::vector<std::mt19937_64> engines_;
  double t_ = 0.0, step_ = 0.0;
  long long j_ = 0;
  vec zbuf_, etabuf_, k1_, k2_, k3_, k4_, ytmp_, delta_buf_;
  trace tr_;
};

}  // namespace nqcs
