#include "lhj/estimates.hpp"

#include <algorithm>
#include <cmath>

#include "lhj/csv.hpp"
#include "lhj/errors.hpp"
#include "lhj/heatkernel.hpp"

namespace lhj {

RateFit fit_rate(std::string quantity, std::span<const std::pair<double, double>> samples,
                 double window_lo, double window_hi, double claimed, double tol) {
  RateFit fit;
  fit.quantity = std::move(quantity);
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.claimed_exponent = claimed;
  fit.pass_tol = tol;
  for (const auto& [t, v] : samples)
    if (t >= window_lo && t <= window_hi && v > 0.0) fit.samples.emplace_back(t, v);
  if (fit.samples.size() < 8)
    throw Error("fit_rate(" + fit.quantity + "): need at least 8 samples in the window, have " +
                std::to_string(fit.samples.size()));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(fit.samples.size());
  for (const auto& [t, v] : fit.samples) {
    double x = std::log(t), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - fit.fitted_exponent * sx) / n;
  double ss = 0;
  for (const auto& [t, v] : fit.samples) {
    double r = std::log(v) - fit.fitted_exponent * std::log(t) - intercept;
    ss += r * r;
  }
  fit.fit_residual = std::sqrt(ss / n);
  fit.pass = std::abs(fit.fitted_exponent - fit.claimed_exponent) <= fit.pass_tol;
  return fit;
}

std::vector<std::pair<double, double>> sample_trajectory(
    const Trajectory& traj, double window_lo, double window_hi, int max_points,
    const std::function<double(const Field&)>& quantity) {
  std::vector<std::size_t> picked;
  std::size_t last = static_cast<std::size_t>(-1);
  for (int k = 0; k < max_points; ++k) {
    double target = window_lo * std::pow(window_hi / window_lo,
                                         static_cast<double>(k) / (max_points - 1));
    // nearest node in the window
    std::size_t best = static_cast<std::size_t>(-1);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.size(); ++i) {
      double t = traj.times[i];
      if (t < window_lo || t > window_hi) continue;
      double d = std::abs(std::log(t / target));
      if (d < gap) {
        gap = d;
        best = i;
      }
    }
    if (best != static_cast<std::size_t>(-1) && best != last) {
      picked.push_back(best);
      last = best;
    }
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.emplace_back(traj.times[i], quantity(traj.fields[i]));
  return out;
}

ComparisonReport comparison_check(const Problem& p, const Field& u0_low, const Field& u0_high,
                                  const SolverConfig& cfg) {
  require_same_grid(u0_low, u0_high, "comparison_check");
  for (std::size_t i = 0; i < u0_low.size(); ++i)
    if (u0_low.values[i] > u0_high.values[i])
      throw ConfigError("comparison_check: initial data are not ordered at flat index " +
                        std::to_string(i));
  if (!p.hamiltonian.satisfies_H2)
    throw ConfigError("comparison_check: Hamiltonian lacks the x-regularity (H2) flag");

  Problem lo = p, hi = p;
  lo.initial = u0_low;
  hi.initial = u0_high;
  Trajectory a = march(lo, cfg), b = march(hi, cfg);
  if (a.size() != b.size()) throw Error("comparison_check: trajectories disagree on nodes");

  ComparisonReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.fields[i].size(); ++j)
      rep.min_gap = std::min(rep.min_gap, b.fields[i].values[j] - a.fields[i].values[j]);
  double scale = std::max({1.0, sup_norm(u0_low), sup_norm(u0_high)});
  rep.tolerance = 1e-6 * scale;
  rep.pass = rep.min_gap >= -rep.tolerance;
  return rep;
}

SupBoundReport supbound_check(const Problem& p, const Trajectory& traj, const SolverConfig& cfg) {
  const double gamma = p.hamiltonian.gamma;
  const double u0_sup = sup_norm(traj.fields.front());
  const PeriodicGrid& g = traj.fields.front().grid;

  // constants over the horizon: sup |f| and sup_x |H(t, x, 0, 0)|
  double f_sup = 0.0, h0_sup = 0.0;
  Field zero_u(g);
  std::vector<Field> zero_du(g.dim, Field(g));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    double t = traj.times[i];
    if (!p.forcing.zero()) f_sup = std::max(f_sup, sup_norm(p.forcing.at(t, g)));
    h0_sup = std::max(h0_sup, sup_norm(apply_hamiltonian(p.hamiltonian, t, zero_u, zero_du)));
  }

  SupBoundReport rep;
  rep.tolerance = 1e-6 + 5.0 * cfg.picard_tol;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    double t = traj.times[i];
    double integ = gamma != 0.0 ? (1.0 - std::exp(-gamma * t)) / gamma : t;
    double bound = std::exp(-gamma * t) * u0_sup + integ * (f_sup + h0_sup);
    double sup_u = sup_norm(traj.fields[i]);
    rep.rows.push_back({t, sup_u, bound});
    rep.worst_slack = std::min(rep.worst_slack, bound + rep.tolerance - sup_u);
  }
  rep.pass = rep.worst_slack >= 0.0;
  return rep;
}

Field bernstein_gamma(const Symbol& s, const Field& u) {
  auto psi = s.eval;
  auto minus_psi = [&psi](std::span<const double> xi) { return -psi(xi); };
  Field lu2 = apply_multiplier(pointwise_product(u, u), minus_psi);
  Field lu = apply_multiplier(u, minus_psi);
  Field out(u.grid);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = 0.5 * (lu2.values[i] - 2.0 * u.values[i] * lu.values[i]);
  return out;
}

namespace {

double gradient_ratio(const Trajectory& traj) {
  double du0 = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    double s = traj.diagnostics[i].sup_du;
    if (i == 0) du0 = s;
    worst = std::max(worst, s);
  }
  return worst / (1.0 + du0);
}

// Pointwise max of (d_t w - L w + Dw . H_p) / (1 + w) at interior nodes, for
// w = |Du|^2 / 2; returns the per-node maxima.
std::vector<double> bernstein_quotients(const Problem& p, const Trajectory& traj,
                                        std::span<const std::size_t> nodes) {
  const PeriodicGrid& g = traj.fields.front().grid;
  auto psi = p.symbol.eval;
  auto minus_psi = [&psi](std::span<const double> xi) { return -psi(xi); };

  auto w_field = [&](std::size_t i) {
    std::vector<Field> du = spectral_gradient(traj.fields[i]);
    Field w(g);
    for (std::size_t j = 0; j < w.size(); ++j) {
      double s = 0.0;
      for (const Field& c : du) s += c.values[j] * c.values[j];
      w.values[j] = 0.5 * s;
    }
    return w;
  };

  std::vector<double> out;
  for (std::size_t i : nodes) {
    if (i == 0 || i + 1 >= traj.size()) throw Error("bernstein_quotients: interior nodes only");
    Field wm = w_field(i - 1), w = w_field(i), wp = w_field(i + 1);
    double t0 = traj.times[i - 1], t1 = traj.times[i], t2 = traj.times[i + 1];
    double a0 = (2.0 * t1 - t1 - t2) / ((t0 - t1) * (t0 - t2));
    double a1 = (2.0 * t1 - t0 - t2) / ((t1 - t0) * (t1 - t2));
    double a2 = (2.0 * t1 - t0 - t1) / ((t2 - t0) * (t2 - t1));
    Field wt = a0 * wm;
    wt.axpy(a1, w);
    wt.axpy(a2, wp);

    Field lw = apply_multiplier(w, minus_psi);
    std::vector<Field> dw = spectral_gradient(w);
    std::vector<Field> du = spectral_gradient(traj.fields[i]);

    double x[2], pvec[2], hp[2];
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < w.size(); ++j) {
      g.point(j, std::span<double>(x, g.dim));
      for (int a = 0; a < g.dim; ++a) pvec[a] = du[a].values[j];
      p.hamiltonian.grad_p(t1, std::span<const double>(x, g.dim), traj.fields[i].values[j],
                           std::span<const double>(pvec, g.dim), std::span<double>(hp, g.dim));
      double advect = 0.0;
      for (int a = 0; a < g.dim; ++a) advect += dw[a].values[j] * hp[a];
      double lhs = wt.values[j] - lw.values[j] + advect;
      worst = std::max(worst, lhs / (1.0 + w.values[j]));
    }
    out.push_back(worst);
  }
  return out;
}

std::vector<std::size_t> interior_sample_nodes(const Trajectory& traj, int count) {
  std::vector<std::size_t> nodes;
  if (traj.size() < 3) return nodes;
  for (int k = 0; k < count; ++k) {
    std::size_t i = 1 + static_cast<std::size_t>((traj.size() - 2) *
                                                 (k + 0.5) / static_cast<double>(count));
    i = std::min(i, traj.size() - 2);
    if (nodes.empty() || nodes.back() != i) nodes.push_back(i);
  }
  return nodes;
}

}  // namespace

LipschitzReport lipschitz_bound_check(const Symbol& s, const Hamiltonian& h, const Forcing& f,
                                      const std::function<double(std::span<const double>)>& datum,
                                      const PeriodicGrid& coarse, double horizon,
                                      const SolverConfig& cfg) {
  PeriodicGrid fine(coarse.dim, coarse.n * 2, coarse.period);
  SolverConfig cfg_fine = cfg;
  cfg_fine.dt = cfg.dt / 2.0;
  SolverConfig run_cfg = cfg;
  run_cfg.diag_seminorms = false;
  run_cfg.diag_residual = false;
  cfg_fine.diag_seminorms = false;
  cfg_fine.diag_residual = false;

  Problem pc{s, h, f, make_field(coarse, datum), horizon};
  Problem pf{s, h, f, make_field(fine, datum), horizon};
  Trajectory tc = march(pc, run_cfg);
  Trajectory tf = march(pf, cfg_fine);

  LipschitzReport rep;
  rep.ratio_coarse = gradient_ratio(tc);
  rep.ratio_fine = gradient_ratio(tf);
  rep.drift = std::abs(rep.ratio_fine / rep.ratio_coarse - 1.0);

  auto nodes_c = interior_sample_nodes(tc, 6);
  auto nodes_f = interior_sample_nodes(tf, 6);
  auto qc = bernstein_quotients(pc, tc, nodes_c);
  auto qf = bernstein_quotients(pf, tf, nodes_f);
  rep.measured_c = *std::max_element(qc.begin(), qc.end());
  double fine_worst = *std::max_element(qf.begin(), qf.end());
  rep.bernstein_excess = fine_worst - rep.measured_c;
  double slack = 0.1 * (1.0 + std::abs(rep.measured_c));
  rep.pass = rep.drift <= 0.10 && rep.bernstein_excess <= slack;
  return rep;
}

SchauderReport schauder_uniform_check(const Symbol& s, const Hamiltonian& h, const Forcing& f,
                                      const std::function<double(std::span<const double>)>& datum,
                                      const PeriodicGrid& g, double horizon, double eps,
                                      const SolverConfig& cfg, std::span<const double> lambdas) {
  double sigma = s.order - 1.0 - eps;
  if (!(sigma > 0.0)) throw ConfigError("schauder_uniform_check: eps must be below order - 1");
  SolverConfig run_cfg = cfg;
  run_cfg.diag_seminorms = false;
  run_cfg.diag_residual = false;

  // Hamiltonian size constant: value at p = 0 plus its global Lipschitz bound
  // (fixed across the scaling family, which is all the structural check needs).
  double c_h = h.lipschitz_p.value_or(0.0);

  SchauderReport rep;
  for (double lambda : lambdas) {
    auto scaled = [&datum, lambda](std::span<const double> x) { return lambda * datum(x); };
    Field u0 = make_field(g, scaled);
    Problem p{s, h, f, u0, horizon};
    Trajectory traj = march(p, run_cfg);

    double time_quot = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
      Field d = traj.fields[i];
      d -= traj.fields[i - 1];
      time_quot = std::max(time_quot, sup_norm(d) / (traj.times[i] - traj.times[i - 1]));
    }
    double space = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const Field& u = traj.fields[i];
      double norm = sup_norm(u);
      double grad_holder = 0.0;
      for (const Field& c : spectral_gradient(u)) {
        norm += sup_norm(c);
        grad_holder = std::max(grad_holder, holder_seminorm(c, sigma));
      }
      space = std::max(space, norm + grad_holder);
    }
    double lhs = time_quot + space;

    double f_norm = 0.0;
    if (!f.zero()) {
      for (std::size_t i = 0; i < traj.size(); ++i) {
        Field fv = f.at(traj.times[i], g);
        double n1 = sup_norm(fv);
        for (const Field& c : spectral_gradient(fv)) n1 += sup_norm(c);
        f_norm = std::max(f_norm, n1);
      }
    }
    double data = sup_norm(u0);
    double du0_holder = 0.0;
    for (const Field& c : spectral_gradient(u0)) {
      data += sup_norm(c);
      du0_holder = std::max(du0_holder, holder_seminorm(c, sigma));
    }
    data += du0_holder;
    double data_norm = c_h + f_norm + data;
    rep.rows.push_back({lambda, lhs, data_norm, lhs / data_norm});
  }
  double base = rep.rows.front().ratio;
  for (const auto& row : rep.rows)
    rep.max_drift = std::max(rep.max_drift, std::abs(row.ratio / base - 1.0));
  rep.pass = rep.max_drift <= 0.20;
  return rep;
}

BlowupStudy blowup_study(const Symbol& s, const Hamiltonian& h, const Forcing& f, double beta,
                         double eps, const PeriodicGrid& g, double horizon,
                         const SolverConfig& cfg, std::uint64_t seed) {
  if (!h.satisfies_HLip)
    throw ConfigError(
        "blowup_study: requires a Hamiltonian that is globally Lipschitz in p "
        "(satisfies_HLip flag)");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("blowup_study: beta must lie in (0,1)");
  if (!(eps > 0.0 && eps < s.order - 1.0))
    throw ConfigError("blowup_study: eps must lie in (0, order-1)");

  BlowupStudy study;
  study.alpha = s.order;
  study.beta = beta;
  study.eps = eps;
  study.case_two = s.order + beta > 2.0;
  study.t_floor = resolution_floor(s, g, cfg.resolve_guard);

  double window_hi = horizon / 4.0;
  if (study.t_floor >= window_hi / 4.0) {
    // too little room between the floor and the window top to fit anything
    double target_floor = window_hi / 8.0;
    double xi_needed = std::pow(std::log(1.0 / cfg.resolve_guard) / target_floor, 1.0 / s.order);
    int n_min = 2;
    while (std::numbers::pi * n_min / g.period < xi_needed && n_min < (1 << 24)) n_min *= 2;
    study.inconclusive = true;
    study.message = "INCONCLUSIVE: resolution floor " + format_sci(study.t_floor) +
                    " leaves no fitting window below " + format_sci(window_hi) +
                    "; need at least n = " + std::to_string(n_min) + " per axis";
    return study;
  }
  double window_lo = study.t_floor;

  SolverConfig run_cfg = cfg;
  run_cfg.diag_seminorms = false;
  run_cfg.diag_residual = false;
  Problem p{s, h, f, weierstrass_datum(g, beta, seed), horizon};
  Trajectory traj = march(p, run_cfg);

  auto sup_du = [](const Field& u) {
    double m = 0.0;
    for (const Field& c : spectral_gradient(u)) m = std::max(m, sup_norm(c));
    return m;
  };
  auto second_derivative_sup = [](const Field& u) {
    double m = 0.0;
    const int d = u.grid.dim;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b)
        m = std::max(m, sup_norm(spectral_gradient_component(
                            spectral_gradient_component(u, a), b)));
    return m;
  };

  const int max_pts = 32;
  auto samples_sup = sample_trajectory(traj, window_lo, window_hi, max_pts, sup_norm);
  auto samples_holder = sample_trajectory(traj, window_lo, window_hi, max_pts,
                                          [&](const Field& u) { return holder_seminorm(u, beta); });
  auto samples_du = sample_trajectory(traj, window_lo, window_hi, max_pts, sup_du);

  study.fits.push_back(fit_rate("sup_Du", samples_du, window_lo, window_hi,
                                -(1.0 - beta) / s.order, 0.1));
  study.fits.push_back(fit_rate("sup_u", samples_sup, window_lo, window_hi, 0.0, 0.05));
  study.fits.push_back(fit_rate("holder_u_beta", samples_holder, window_lo, window_hi, 0.0, 0.05));

  double top_exponent = s.order + beta - eps - (study.case_two ? 2.0 : 1.0);
  top_exponent = std::min(top_exponent, 1.0);
  auto top_quantity = [&](const Field& u) {
    if (!study.case_two) {
      double m = 0.0;
      for (const Field& c : spectral_gradient(u)) m = std::max(m, holder_seminorm(c, top_exponent));
      return m;
    }
    double m = 0.0;
    for (int a = 0; a < u.grid.dim; ++a) {
      Field da = spectral_gradient_component(u, a);
      for (int b = a; b < u.grid.dim; ++b)
        m = std::max(m, holder_seminorm(spectral_gradient_component(da, b), top_exponent));
    }
    return m;
  };
  auto samples_top = sample_trajectory(traj, window_lo, window_hi, max_pts, top_quantity);
  RateFit top = fit_rate(study.case_two ? "holder_D2u_top" : "holder_Du_top", samples_top,
                         window_lo, window_hi, -(s.order - eps) / s.order, 0.25);
  top.scored = false;  // reported trend only
  study.fits.push_back(std::move(top));

  if (study.case_two) {
    auto samples_d2 = sample_trajectory(traj, window_lo, window_hi, max_pts,
                                        second_derivative_sup);
    RateFit d2 = fit_rate("sup_D2u", samples_d2, window_lo, window_hi,
                          -(2.0 - beta) / s.order, 0.15);
    d2.scored = false;
    study.fits.push_back(std::move(d2));
  }

  study.pass = true;
  for (const RateFit& fit : study.fits)
    if (fit.scored && !fit.pass) study.pass = false;
  study.message = study.pass ? "PASS" : "FAIL";
  return study;
}

}  // namespace lhj
