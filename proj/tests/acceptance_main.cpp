// Acceptance gate over the shipped scenarios. Each numbered check prints one
// PASS/FAIL line (indented lines carry the measurements behind the verdict)
// and the exit code is the number of failed checks. Every tolerance and
// runtime budget is pinned right here, next to the check it gates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nqcs/config.hpp"
#include "nqcs/design.hpp"
#include "nqcs/monitor.hpp"
#include "nqcs/phi_ode.hpp"
#include "nqcs/protocol.hpp"
#include "nqcs/quantizer.hpp"
#include "nqcs/rng.hpp"
#include "nqcs/sim.hpp"
#include "nqcs/trace.hpp"

using namespace nqcs;

namespace {

struct check_result {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      notes.push_back("violated: " + why);
    }
  }
  void note(const std::string& line) { notes.push_back(line); }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string config_path(const std::string& name) {
  return std::string(NQCS_REPO_DIR) + "/configs/" + name;
}

// ---- shared scenario cache and the trace registry for the domain check ----

struct scenario {
  run_setup setup;
  trace tr;
};

struct registered_trace {
  std::string label;
  system_model model;
  std::vector<network_config> nets;
  trace tr;
};

std::map<std::string, scenario> g_scenarios;
std::vector<registered_trace> g_registry;

trace run_setup_once(const run_setup& s) {
  simulator sim(s.model, s.nets, s.fns, s.opts, s.certs);
  return sim.run(s.x0, s.e0);
}

void register_trace(const std::string& label, const run_setup& s, const trace& tr) {
  g_registry.push_back({label, s.model, s.nets, tr});
}

const scenario& run_config(const std::string& name) {
  auto it = g_scenarios.find(name);
  if (it != g_scenarios.end()) return it->second;
  run_setup s = load_setup_file(config_path(name));
  require_sim(s);
  trace tr = run_setup_once(s);
  register_trace(name, s, tr);
  return g_scenarios.emplace(name, scenario{std::move(s), std::move(tr)}).first->second;
}

// ---- 1. quantizer bounds --------------------------------------------------

check_result check_quantizer() {
  constexpr int kDraws = 100000;
  constexpr double kSlack = 1e-12;  // relative float slack on the bounds
  check_result r;
  auto eng = seeded_engine(90210, 0);
  long long bad_err = 0, bad_sat = 0, bad_dead = 0;
  for (int k = 0; k < kDraws; ++k) {
    quantizer_params p;
    p.range = 1.0 + 99.0 * unit_uniform(eng);
    p.err_bound = p.range * (0.01 + 0.49 * unit_uniform(eng));
    p.dead_zone = p.err_bound * (0.01 + 0.99 * unit_uniform(eng));
    const double mu = 0.01 + 10.0 * unit_uniform(eng);
    vec q(1);

    // in-range transmissions stay within the error bound
    vec z{(2.0 * unit_uniform(eng) - 1.0) * p.range * mu};
    quantize(p, mu, z, q);
    if (std::abs(q[0] - z[0]) > p.err_bound * mu * (1.0 + kSlack)) ++bad_err;

    // out-of-range transmissions stay detectably large
    const double sign = unit_uniform(eng) < 0.5 ? -1.0 : 1.0;
    z[0] = sign * p.range * mu * (1.0 + 1e-9 + 10.0 * unit_uniform(eng));
    quantize(p, mu, z, q);
    if (std::abs(q[0]) <= (p.range - p.err_bound) * mu * (1.0 - kSlack)) ++bad_sat;

    // the dead zone maps to exact zero
    z[0] = (2.0 * unit_uniform(eng) - 1.0) * p.dead_zone * mu;
    quantize(p, mu, z, q);
    if (q[0] != 0.0) ++bad_dead;
  }
  r.note(fmt("draws per property: %.0f", static_cast<double>(kDraws)));
  r.require(bad_err == 0, fmt("%.0f in-range draws exceeded the error bound",
                              static_cast<double>(bad_err)));
  r.require(bad_sat == 0, fmt("%.0f saturated draws were not detectable",
                              static_cast<double>(bad_sat)));
  r.require(bad_dead == 0, fmt("%.0f dead-zone draws were nonzero",
                               static_cast<double>(bad_dead)));
  return r;
}

// ---- 2. timer-weight solver vs closed form --------------------------------

check_result check_phi_oracle() {
  constexpr double kTol = 1e-8;
  check_result r;
  // dphi/dt = -(phi^2 + 1), phi(0) = 1 has the closed form tan(pi/4 - t);
  // compare at the solver's own grid nodes so only integration error counts.
  phi_params p;
  p.l0 = 0.0;
  p.gamma0 = 1.0;
  p.varrho0 = 0.0;
  p.phi0_init = 1.0;
  const phi_solution sol = solve_phi(p, 0, 0.7, 1e-3);
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.samples.size(); ++k) {
    const double t = sol.dt * static_cast<double>(k);
    worst = std::max(worst, std::abs(sol.samples[k] - std::tan(0.25 * M_PI - t)));
  }
  r.note(fmt("max abs deviation %.3g (tolerance %.0e)", worst, kTol));
  r.require(worst <= kTol, "solver strayed from the closed-form solution");
  return r;
}

// ---- 3. design-tool reference bounds --------------------------------------

check_result check_design_values() {
  constexpr double kRelTol = 0.05;
  constexpr double kMaxSecondsPerCase = 5.0;
  // Reference outputs recorded for the shipped design configs.
  struct ref {
    const char* file;
    double T[2], Delta[2];
  };
  const ref cases[] = {
      {"design_rr.json", {0.0256, 0.0161}, {0.0064, 0.0026}},
      {"design_tod.json", {0.0279, 0.02115}, {0.00445, 0.0032}},
  };
  check_result r;
  for (const auto& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    run_setup s = load_setup_file(config_path(c.file));
    require_design(s);
    for (std::size_t i = 0; i < s.nets.size(); ++i) {
      const design_result res = max_T_Delta(s.design[i], 0.2, 1e-7);
      r.require(res.feasible, std::string(c.file) + " " + s.nets[i].name + ": infeasible");
      const double refs[2] = {c.T[i], c.Delta[i]};
      const double got[2] = {res.T, res.Delta};
      const char* what[2] = {"T", "Delta"};
      for (int v = 0; v < 2; ++v) {
        const double rel = std::abs(got[v] - refs[v]) / refs[v];
        r.note(std::string(c.file) + " " + s.nets[i].name + ": " + what[v] +
               fmt(" = %.5f vs %.5f (%.1f%%)", got[v], refs[v], 100.0 * rel));
        r.require(rel <= kRelTol, std::string(c.file) + " " + s.nets[i].name + ": " + what[v] +
                                      " deviates by more than 5%");
      }
    }
    const double dt = seconds_since(t0);
    r.require(dt < kMaxSecondsPerCase, std::string(c.file) + fmt(": took %.2f s", dt));
  }
  return r;
}

// ---- 4. demo tracking runs ------------------------------------------------

check_result check_tracking() {
  constexpr double kMaxSecondsPerRun = 30.0;
  constexpr int kWindows = 10;       // windows across the second half
  constexpr double kSlack = 1.10;    // allowed window-to-window growth
  check_result r;
  for (const char* name : {"robot_rr_demo.json", "robot_tod_demo.json"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const scenario& sc = run_config(name);
    const double dt = seconds_since(t0);
    r.require(sc.setup.opts.step == 1e-4, std::string(name) + ": step is not 1e-4");
    r.require(dt < kMaxSecondsPerRun, std::string(name) + fmt(": took %.2f s", dt));

    r.require(std::isfinite(sc.tr.max_norm_eta),
              std::string(name) + ": tracking norm not finite");
    const double half = 0.5 * sc.setup.opts.t_end;
    const double width = half / kWindows;
    double wmax[kWindows] = {};
    for (const auto& f : sc.tr.flows) {
      if (f.t < half) continue;
      auto w = static_cast<int>((f.t - half) / width);
      w = std::clamp(w, 0, kWindows - 1);
      wmax[w] = std::max(wmax[w], f.norm_eta);
    }
    double worst_growth = 0.0;
    for (int w = 0; w + 1 < kWindows; ++w)
      if (wmax[w] > 0.0) worst_growth = std::max(worst_growth, wmax[w + 1] / wmax[w]);
    r.note(std::string(name) +
           fmt(": peak |eta| %.3f, late window growth x%.3f in %.1f s", sc.tr.max_norm_eta,
               worst_growth, dt));
    r.require(worst_growth <= kSlack,
              std::string(name) + ": late-run tracking envelope grew beyond 10%");
  }
  return r;
}

// ---- 5. transmission reduction --------------------------------------------

struct compare_outcome {
  trace etc_tr, ttc_tr;
  long long etc_total = 0, ttc_total = 0;
};

compare_outcome compare_on(const run_setup& setup, const trace* etc_ready,
                           const std::string& label) {
  compare_outcome out;
  out.etc_tr = etc_ready ? *etc_ready : run_setup_once(setup);
  run_setup baseline = setup;
  for (auto& nc : baseline.nets) nc.etm.rho = 0.0;
  out.ttc_tr = run_setup_once(baseline);
  if (!etc_ready) register_trace(label + " (etm)", setup, out.etc_tr);
  register_trace(label + " (always-transmit)", baseline, out.ttc_tr);
  for (const auto& c : out.etc_tr.counters) out.etc_total += c.triggered;
  for (const auto& c : out.ttc_tr.counters) out.ttc_total += c.triggered;
  return out;
}

check_result check_reduction() {
  check_result r;
  double ratio[2] = {0.0, 0.0};
  const char* names[2] = {"robot_rr_demo.json", "robot_tod_demo.json"};

  for (int s = 0; s < 2; ++s) {
    const scenario& sc = run_config(names[s]);
    const compare_outcome cmp = compare_on(sc.setup, &sc.tr, names[s]);
    for (std::size_t i = 0; i < sc.setup.nets.size(); ++i) {
      const auto& etc_c = cmp.etc_tr.counters[i];
      const auto& ttc_c = cmp.ttc_tr.counters[i];
      const std::string who = std::string(names[s]) + " " + sc.setup.nets[i].name;
      r.note(who + fmt(": %.0f of %.0f transmissions",
                       static_cast<double>(etc_c.triggered),
                       static_cast<double>(ttc_c.triggered)));
      r.require(etc_c.samples == ttc_c.samples, who + ": event times changed between runs");
      r.require(etc_c.triggered < ttc_c.triggered,
                who + ": event triggering did not reduce transmissions");
      r.require(ttc_c.triggered == ttc_c.samples,
                who + ": rho = 0 run skipped a sampling");
    }
    ratio[s] = static_cast<double>(cmp.etc_total) / static_cast<double>(cmp.ttc_total);
  }

  // reduction ordering on a matched horizon
  run_setup tod = load_setup_file(config_path(names[1]));
  require_sim(tod);
  tod.opts.t_end = run_config(names[0]).setup.opts.t_end;
  const compare_outcome cmp = compare_on(tod, nullptr, "robot_tod_demo.json (matched horizon)");
  const double tod_matched =
      static_cast<double>(cmp.etc_total) / static_cast<double>(cmp.ttc_total);
  r.note(fmt("transmission ratios: first %.3f, second %.3f (matched horizon %.3f)", ratio[0],
             ratio[1], tod_matched));
  r.require(ratio[0] < tod_matched,
            "cyclic scheduling did not reduce more than largest-error scheduling");
  return r;
}

// ---- 6. certificate contraction -------------------------------------------

check_result check_certificates() {
  constexpr double kTol = 1e-9;
  check_result r;
  for (const char* name : {"robot_rr_monitor.json", "robot_tod_monitor.json"}) {
    const scenario& sc = run_config(name);
    r.require(!sc.setup.certs.w_fns.empty(), std::string(name) + ": no certificates built");
    const auto rep = check_contraction(sc.tr, sc.setup.model, sc.setup.certs, kTol);
    r.note(std::string(name) +
           fmt(": %.0f triggered samplings, %.0f violations",
               static_cast<double>(rep.triggered_samplings),
               static_cast<double>(rep.sampling_violations.size() +
                                   rep.update_violations.size())));
    r.require(rep.triggered_samplings > 0, std::string(name) + ": no triggered samplings");
    r.require(rep.sampling_violations.empty(),
              std::string(name) + ": transmission contraction violated");
    r.require(rep.update_violations.empty(),
              std::string(name) + ": arrival non-expansion violated");

    certificate_set falsified = sc.setup.certs;
    for (auto& l : falsified.lambda) l = 0.0;
    const auto probe = check_contraction(sc.tr, sc.setup.model, falsified, kTol);
    r.require(!probe.sampling_violations.empty(),
              std::string(name) + ": falsified contraction bound went unnoticed");
  }
  return r;
}

// ---- 7. scheduling grants --------------------------------------------------

check_result check_protocols() {
  constexpr int kDraws = 100000;
  check_result r;

  long long bad_cover = 0;
  for (int ell = 1; ell <= 6; ++ell) {
    for (std::uint64_t start : {std::uint64_t{0}, std::uint64_t{1}, std::uint64_t{7},
                                std::uint64_t{1000003}}) {
      std::vector<int> hits(static_cast<std::size_t>(ell), 0);
      for (int k = 0; k < ell; ++k)
        hits[static_cast<std::size_t>(rr_select(start + static_cast<std::uint64_t>(k), ell) -
                                      1)] += 1;
      for (int h : hits)
        if (h != 1) ++bad_cover;
    }
  }
  r.require(bad_cover == 0, "a cyclic grant window missed or repeated a node");

  auto eng = seeded_engine(777, 0);
  long long bad_tod = 0;
  for (int k = 0; k < kDraws; ++k) {
    node_partition part;
    const int ell = 1 + static_cast<int>(eng() % 5);
    for (int n = 0; n < ell; ++n) part.dims.push_back(1 + static_cast<int>(eng() % 3));
    vec e(static_cast<std::size_t>(part.total_dim()));
    for (auto& v : e) v = uniform_in(eng, -5.0, 5.0);

    int best = 1;
    double best_sq = 0.0;
    for (int n = 1; n <= ell; ++n) {
      double sq = 0.0;
      for (double v : part.block(std::span<const double>(e), n)) sq += v * v;
      if (sq > best_sq) {
        best = n;
        best_sq = sq;
      }
    }
    if (select_node(protocol_kind::try_once_discard, eng(), e, part) != best) ++bad_tod;
  }
  r.note(fmt("largest-error draws: %.0f", static_cast<double>(kDraws)));
  r.require(bad_tod == 0,
            fmt("%.0f grants disagreed with the reference selection", static_cast<double>(bad_tod)));
  return r;
}

// ---- 8. hybrid-domain invariants -------------------------------------------

check_result check_domains() {
  check_result r;
  (void)run_config("zero_dynamics_smoke.json");  // cover the second model too
  for (const auto& item : g_registry) {
    const auto problems = check_hybrid_domain(item.tr, item.model, item.nets);
    for (const auto& p : problems) r.note(item.label + ": " + p);
    r.require(problems.empty(), item.label + ": domain invariants violated");
  }
  r.note(fmt("traces checked: %.0f", static_cast<double>(g_registry.size())));
  return r;
}

// ---- 9. determinism ---------------------------------------------------------

check_result check_determinism() {
  check_result r;
  for (const char* name :
       {"robot_rr_demo.json", "robot_tod_demo.json", "robot_rr_monitor.json",
        "robot_tod_monitor.json", "zero_dynamics_smoke.json"}) {
    const scenario& first = run_config(name);
    run_setup again = load_setup_file(config_path(name));
    require_sim(again);
    const trace tr2 = run_setup_once(again);
    std::ostringstream a, b;
    write_csv(first.tr, a);
    write_csv(tr2, b);
    r.require(a.str() == b.str(), std::string(name) + ": repeated run differs");
  }
  r.note("scenarios rerun: 5");
  return r;
}

}  // namespace

int main() {
  struct criterion {
    const char* title;
    check_result (*fn)();
  };
  const criterion criteria[] = {
      {"quantizer error, saturation, and dead-zone bounds", check_quantizer},
      {"timer-weight solver matches the closed-form tangent", check_phi_oracle},
      {"design tool reproduces the recorded reference bounds", check_design_values},
      {"demo tracking stays bounded and holds its late envelope", check_tracking},
      {"event triggering reduces transmissions as expected", check_reduction},
      {"certificate contraction holds and falsified bounds are caught", check_certificates},
      {"scheduling grants cover cyclically and pick the largest error", check_protocols},
      {"every produced trace satisfies the hybrid-domain invariants", check_domains},
      {"repeated runs are byte-identical", check_determinism},
  };

  int failures = 0;
  int idx = 0;
  for (const auto& c : criteria) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    check_result res;
    try {
      res = c.fn();
    } catch (const std::exception& ex) {
      res.pass = false;
      res.note(std::string("exception: ") + ex.what());
    }
    const double dt = seconds_since(t0);
    std::printf("[%s] %d/9 %s (%.2f s)\n", res.pass ? "PASS" : "FAIL", idx, c.title, dt);
    for (const auto& n : res.notes) std::printf("         %s\n", n.c_str());
    if (!res.pass) ++failures;
  }
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures;
}
