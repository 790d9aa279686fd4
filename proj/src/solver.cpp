#include "lhj/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lhj/csv.hpp"
#include "lhj/errors.hpp"
#include "lhj/heatkernel.hpp"
#include "lhj/rng.hpp"

namespace lhj {

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("solver.dt must be positive");
  if (!(picard_tol > 0.0)) throw ConfigError("solver.picard_tol must be positive");
  if (picard_max < 2) throw ConfigError("solver.picard_max must be at least 2");
  if (substeps < 1) throw ConfigError("solver.substeps must be at least 1");
  if (!(resolve_guard > 0.0 && resolve_guard < 1.0))
    throw ConfigError("solver.resolve_guard must lie in (0,1)");
}

Field Forcing::at(double t, const PeriodicGrid& g) const {
  if (!eval) return Field(g);
  Field f = eval(t);
  require_finite(f, "forcing");
  return f;
}

std::size_t Trajectory::index_at(double t, double tol) const {
  std::size_t best = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    double d = std::abs(times[i] - t);
    if (d < gap) {
      gap = d;
      best = i;
    }
  }
  if (gap > tol)
    throw Error("trajectory has no node within " + format_sci(tol) + " of t = " + format_sci(t));
  return best;
}

namespace {

// f(s_j) - H(s_j, ., u_j, Du_j)
Field duhamel_integrand(const Problem& p, double s, const Field& u) {
  std::vector<Field> du = spectral_gradient(u);
  Field g = apply_hamiltonian(p.hamiltonian, s, u, du);
  g *= -1.0;
  if (!p.forcing.zero()) g += p.forcing.at(s, u.grid);
  return g;
}

// S applied to a candidate; `head` optionally carries the precomputed
// semigroup flow of the start datum (it does not depend on the candidate).
FinePath apply_duhamel(const Problem& p, const FinePath& cand, const SolverConfig& cfg,
                       const std::vector<Field>* head) {
  const std::size_t m = cand.fields.size();
  if (m < 2) throw Error("duhamel_map: candidate needs at least two nodes");
  const double delta = cand.node_dt;
  auto mult = KernelCache::semigroup_multiplier(p.symbol, delta, cand.fields[0].grid);
  std::span<const Complex> e_delta(mult->data(), mult->size());

  FinePath out;
  out.t0 = cand.t0;
  out.node_dt = delta;
  out.fields.reserve(m);
  out.fields.push_back(cand.fields[0]);

  Field integral(cand.fields[0].grid);  // zero
  Field head_running(cand.fields[0]);
  Field g_prev = duhamel_integrand(p, cand.time_at(0), cand.fields[0]);
  for (std::size_t j = 1; j < m; ++j) {
    if (cfg.quad_rule == QuadRule::trapezoid) {
      integral.axpy(0.5 * delta, g_prev);
      integral = apply_multiplier(integral, e_delta);
      g_prev = duhamel_integrand(p, cand.time_at(j), cand.fields[j]);
      integral.axpy(0.5 * delta, g_prev);
    } else {
      integral.axpy(delta, g_prev);
      integral = apply_multiplier(integral, e_delta);
      g_prev = duhamel_integrand(p, cand.time_at(j), cand.fields[j]);
    }
    const Field* head_j;
    if (head) {
      head_j = &(*head)[j];
    } else {
      head_running = apply_multiplier(head_running, e_delta);
      head_j = &head_running;
    }
    Field s = *head_j;
    s += integral;
    out.fields.push_back(std::move(s));
  }
  return out;
}

double c1_norm(const Field& f) {
  double s = sup_norm(f);
  for (const Field& g : spectral_gradient(f)) s += sup_norm(g);
  return s;
}

}  // namespace

FinePath duhamel_map(const Problem& p, const FinePath& candidate, const SolverConfig& cfg) {
  return apply_duhamel(p, candidate, cfg, nullptr);
}

std::pair<FinePath, ContractionReport> picard_solve(const Problem& p, double ta, double tb,
                                                    const Field& start, const SolverConfig& cfg) {
  cfg.validate();
  if (!(tb > ta)) throw Error("picard_solve: empty interval");
  require_finite(start, "picard_solve start");

  const double tau = tb - ta;
  const long long k_macro = std::max<long long>(1, std::llround(tau / cfg.dt));
  const std::size_t m = static_cast<std::size_t>(k_macro) * cfg.substeps;
  const double delta = tau / static_cast<double>(m);

  // initial guess: pure semigroup flow of the restart datum (exact for H=0, f=0)
  auto mult = KernelCache::semigroup_multiplier(p.symbol, delta, start.grid);
  std::span<const Complex> e_delta(mult->data(), mult->size());
  std::vector<Field> head;
  head.reserve(m + 1);
  head.push_back(start);
  for (std::size_t j = 1; j <= m; ++j)
    head.push_back(apply_multiplier(head.back(), e_delta));

  FinePath current;
  current.t0 = ta;
  current.node_dt = delta;
  current.fields = head;

  ContractionReport report;
  double prev_sup = -1.0, prev_c1 = -1.0;
  int diverging = 0;
  for (int iter = 1; iter <= cfg.picard_max; ++iter) {
    FinePath next = apply_duhamel(p, current, cfg, &head);
    double diff_sup = 0.0, diff_c1 = 0.0;
    for (std::size_t j = 1; j < next.fields.size(); ++j) {
      Field d = next.fields[j];
      d -= current.fields[j];
      diff_sup = std::max(diff_sup, sup_norm(d));
      if (j % cfg.substeps == 0) diff_c1 = std::max(diff_c1, c1_norm(d));
    }
    if (!std::isfinite(diff_sup))
      throw NoContractionError("picard_solve: iteration diverged to non-finite values",
                               report.ratios_sup);
    report.iterations = iter;
    report.final_diff = diff_sup;
    if (prev_sup > 0.0) report.ratios_sup.push_back(diff_sup / prev_sup);
    if (prev_c1 > 0.0) report.ratios_c1.push_back(diff_c1 / prev_c1);
    current = std::move(next);
    if (diff_sup <= cfg.picard_tol) {
      report.converged = true;
      return {std::move(current), std::move(report)};
    }
    if (!report.ratios_sup.empty() && report.ratios_sup.back() >= 1.0) {
      if (++diverging >= 3)
        throw NoContractionError(
            "picard_solve: contraction ratio stayed >= 1 on [" + format_sci(ta) + ", " +
                format_sci(tb) + "]; shorten the interval",
            report.ratios_sup);
    } else {
      diverging = 0;
    }
    prev_sup = diff_sup;
    prev_c1 = diff_c1;
  }
  throw NoContractionError("picard_solve: no convergence within " +
                               std::to_string(cfg.picard_max) + " iterations on [" +
                               format_sci(ta) + ", " + format_sci(tb) + "]",
                           report.ratios_sup);
}

namespace {

StepDiagnostics node_diagnostics(const Field& u, double t, const SolverConfig& cfg) {
  StepDiagnostics d;
  d.time = t;
  d.sup_u = sup_norm(u);
  std::vector<Field> du = spectral_gradient(u);
  for (const Field& c : du) d.sup_du = std::max(d.sup_du, sup_norm(c));
  if (cfg.diag_seminorms) {
    d.holder_u = holder_seminorm(u, cfg.diag_beta);
    for (const Field& c : du) d.holder_du = std::max(d.holder_du, holder_seminorm(c, cfg.diag_sigma));
  }
  return d;
}

}  // namespace

Trajectory march(const Problem& p, const SolverConfig& cfg) {
  cfg.validate();
  if (!(p.horizon > 0.0)) throw ConfigError("problem horizon must be positive");
  require_finite(p.initial, "initial datum");

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.fields.push_back(p.initial);
  traj.diagnostics.push_back(node_diagnostics(p.initial, 0.0, cfg));

  const double floor_tau = cfg.dt * std::pow(2.0, -20);
  double tau_target = cfg.tau_initial > 0.0 ? cfg.tau_initial : 4.0 * cfg.dt;
  double t = 0.0;
  int easy_streak = 0;

  while (t < p.horizon - 1e-12 * p.horizon) {
    double remaining = p.horizon - t;
    double tau;
    if (remaining <= tau_target || remaining <= cfg.dt * 1.5) {
      tau = remaining;
    } else {
      // keep macro nodes on the dt lattice while tau >= dt
      double k = std::max(1.0, std::floor(tau_target / cfg.dt + 1e-9));
      tau = std::min(k * cfg.dt, remaining);
      if (tau_target < cfg.dt) tau = tau_target;
    }

    try {
      auto [path, report] = picard_solve(p, t, t + tau, traj.fields.back(), cfg);
      const long long k_macro =
          static_cast<long long>(path.fields.size() - 1) / cfg.substeps;
      for (long long j = 1; j <= k_macro; ++j) {
        std::size_t idx = static_cast<std::size_t>(j) * cfg.substeps;
        double tj = path.time_at(idx);
        StepDiagnostics d = node_diagnostics(path.fields[idx], tj, cfg);
        d.picard_iters = report.iterations;
        d.rho_last = report.rho_last();
        traj.times.push_back(tj);
        traj.fields.push_back(std::move(path.fields[idx]));
        traj.diagnostics.push_back(d);
      }
      t += tau;
      bool easy = report.converged && report.iterations <= 4 &&
                  (report.ratios_sup.empty() ||
                   *std::max_element(report.ratios_sup.begin(), report.ratios_sup.end()) < 0.5);
      easy_streak = easy ? easy_streak + 1 : 0;
      if (easy_streak >= 3) {
        tau_target *= 1.5;
        easy_streak = 0;
      }
    } catch (const NoContractionError&) {
      tau_target = tau / 2.0;
      if (tau_target < floor_tau)
        throw BlowupSuspicionError(
            "march: fixed-point interval collapsed below dt*2^-20 at t = " + format_sci(t) +
                "; blow-up suspected",
            t);
    }
  }

  if (cfg.diag_residual && traj.size() >= 3) {
    for (std::size_t i = 0; i < traj.size(); ++i)
      traj.diagnostics[i].residual_sup = sup_norm(pde_residual(p, traj, i));
  }
  return traj;
}

Field pde_residual(const Problem& p, const Trajectory& traj, std::size_t i) {
  if (traj.size() < 3) throw Error("pde_residual: need at least three trajectory nodes");
  if (i >= traj.size()) throw Error("pde_residual: node index out of range");

  // second-order three-point differentiation, one-sided at the ends
  std::size_t a = i == 0 ? 0 : (i + 1 == traj.size() ? traj.size() - 3 : i - 1);
  double t0 = traj.times[a], t1 = traj.times[a + 1], t2 = traj.times[a + 2];
  double te = traj.times[i];
  // derivative of the Lagrange basis at te
  double w0 = (2.0 * te - t1 - t2) / ((t0 - t1) * (t0 - t2));
  double w1 = (2.0 * te - t0 - t2) / ((t1 - t0) * (t1 - t2));
  double w2 = (2.0 * te - t0 - t1) / ((t2 - t0) * (t2 - t1));
  Field ut = w0 * traj.fields[a];
  ut.axpy(w1, traj.fields[a + 1]);
  ut.axpy(w2, traj.fields[a + 2]);

  const Field& u = traj.fields[i];
  auto psi = p.symbol.eval;
  Field lu = apply_multiplier(u, [&psi](std::span<const double> xi) { return -psi(xi); });
  std::vector<Field> du = spectral_gradient(u);
  Field h = apply_hamiltonian(p.hamiltonian, te, u, du);

  Field r = std::move(ut);
  r -= lu;
  r += h;
  if (!p.forcing.zero()) r -= p.forcing.at(te, u.grid);
  return r;
}

Field weierstrass_datum(const PeriodicGrid& g, double beta, std::uint64_t seed) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("weierstrass_datum: beta must lie in (0,1)");
  const int levels = [&] {
    int j = 0;
    while ((2 << (j + 1)) < g.n) ++j;  // largest j with 2^j < n/2
    return j;
  }();
  SplitMix64 rng(seed);
  Field u(g);
  const double base_freq = 2.0 * std::numbers::pi / g.period;
  for (int axis = 0; axis < g.dim; ++axis) {
    for (int j = 0; j <= levels; ++j) {
      double amp = std::pow(2.0, -beta * j);
      double freq = static_cast<double>(1 << j) * base_freq;
      double phase = 2.0 * std::numbers::pi * rng.uniform01();
      double x[2];
      for (std::size_t i = 0; i < u.size(); ++i) {
        g.point(i, std::span<double>(x, g.dim));
        u.values[i] += amp * std::cos(freq * x[axis] + phase);
      }
    }
  }
  return u;
}

}  // namespace lhj
