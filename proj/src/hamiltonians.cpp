#include "lhj/hamiltonians.hpp"

#include <cmath>
#include <string>

#include "lhj/errors.hpp"

namespace lhj {

Hamiltonian ham_zero() {
  Hamiltonian h;
  h.eval = [](double, std::span<const double>, double, std::span<const double>) { return 0.0; };
  h.grad_p = [](double, std::span<const double>, double, std::span<const double>,
                std::span<double> out) {
    for (double& v : out) v = 0.0;
  };
  h.grad_u = [](double, std::span<const double>, double, std::span<const double>) { return 0.0; };
  h.gamma = 0.0;
  h.satisfies_H1 = h.satisfies_H2 = h.satisfies_HLip = true;
  h.lipschitz_p = 0.0;
  h.h2_constant = 0.0;
  h.name = "zero";
  return h;
}

Hamiltonian ham_quadratic(double c) {
  if (!(c > 0.0)) throw ConfigError("ham_quadratic: c must be positive");
  Hamiltonian h;
  h.eval = [c](double, std::span<const double>, double, std::span<const double> p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return 0.5 * c * s;
  };
  h.grad_p = [c](double, std::span<const double>, double, std::span<const double> p,
                 std::span<double> out) {
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = c * p[i];
  };
  h.grad_u = [](double, std::span<const double>, double, std::span<const double>) { return 0.0; };
  h.gamma = 0.0;
  h.satisfies_H1 = true;  // smooth; locally bounded derivatives
  h.satisfies_H2 = true;  // no x dependence
  h.satisfies_HLip = false;
  h.lipschitz_p = std::nullopt;  // only locally Lipschitz
  h.h2_constant = 0.0;
  h.name = "quadratic";
  return h;
}

Hamiltonian ham_smooth_lipschitz(double a) {
  if (!(a > 0.0)) throw ConfigError("ham_smooth_lipschitz: a must be positive");
  Hamiltonian h;
  h.eval = [a](double, std::span<const double>, double, std::span<const double> p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return a * (std::sqrt(1.0 + s) - 1.0);
  };
  h.grad_p = [a](double, std::span<const double>, double, std::span<const double> p,
                 std::span<double> out) {
    double s = 0.0;
    for (double v : p) s += v * v;
    double w = a / std::sqrt(1.0 + s);
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = w * p[i];
  };
  h.grad_u = [](double, std::span<const double>, double, std::span<const double>) { return 0.0; };
  h.gamma = 0.0;
  h.satisfies_H1 = true;
  h.satisfies_H2 = true;
  h.satisfies_HLip = true;
  h.lipschitz_p = a;
  h.h2_constant = 0.0;
  h.name = "smooth_lipschitz";
  return h;
}

Hamiltonian ham_with_zero_order(Hamiltonian base, double lambda) {
  Hamiltonian h = base;
  auto eval = base.eval;
  auto grad_u = base.grad_u;
  h.eval = [eval, lambda](double t, std::span<const double> x, double u,
                          std::span<const double> p) { return eval(t, x, u, p) + lambda * u; };
  h.grad_u = [grad_u, lambda](double t, std::span<const double> x, double u,
                              std::span<const double> p) { return grad_u(t, x, u, p) + lambda; };
  h.gamma = base.gamma + lambda;
  h.name = base.name + "+zero_order";
  return h;
}

Hamiltonian ham_x_dependent(Hamiltonian base, SpatialCoeff c) {
  if (!(c.inf > 0.0)) throw ConfigError("ham_x_dependent: coefficient must be positive");
  Hamiltonian h;
  auto eval = base.eval;
  auto grad_p = base.grad_p;
  auto grad_u = base.grad_u;
  auto coeff = c.eval;
  h.eval = [eval, coeff](double t, std::span<const double> x, double u,
                         std::span<const double> p) { return coeff(x) * eval(t, x, u, p); };
  h.grad_p = [grad_p, coeff](double t, std::span<const double> x, double u,
                             std::span<const double> p, std::span<double> out) {
    grad_p(t, x, u, p, out);
    double cv = coeff(x);
    for (double& v : out) v *= cv;
  };
  h.grad_u = [grad_u, coeff](double t, std::span<const double> x, double u,
                             std::span<const double> p) { return coeff(x) * grad_u(t, x, u, p); };
  // H(v)-H(u) = c(x)(base(v)-base(u)) >= c(x) gamma (v-u); worst case over c
  h.gamma = base.gamma >= 0.0 ? c.inf * base.gamma : c.sup * base.gamma;
  h.satisfies_H1 = base.satisfies_H1;
  h.satisfies_H2 = base.satisfies_H2;
  h.satisfies_HLip = false;  // x dependence: not H = H(p)
  h.lipschitz_p = base.lipschitz_p ? std::optional(c.sup * *base.lipschitz_p) : std::nullopt;
  // |H(x)-H(y)| <= ||Dc|| |base| |x-y| and |base(p)| <= Lip (1+|p|) for the
  // Lipschitz catalog entries
  h.h2_constant = base.lipschitz_p ? std::optional(c.grad_sup * *base.lipschitz_p) : std::nullopt;
  h.name = c.name + "*" + base.name;
  return h;
}

Field apply_hamiltonian(const Hamiltonian& h, double t, const Field& u,
                        std::span<const Field> du) {
  const PeriodicGrid& g = u.grid;
  if (du.size() != static_cast<std::size_t>(g.dim))
    throw Error("apply_hamiltonian: gradient component count mismatch");
  for (const Field& c : du) require_same_grid(u, c, "apply_hamiltonian");
  Field out(g);
  double x[2], p[2];
  for (std::size_t i = 0; i < out.size(); ++i) {
    g.point(i, std::span<double>(x, g.dim));
    for (int a = 0; a < g.dim; ++a) p[a] = du[a].values[i];
    double v = h.eval(t, std::span<const double>(x, g.dim), u.values[i],
                      std::span<const double>(p, g.dim));
    if (!std::isfinite(v))
      throw Error("apply_hamiltonian: non-finite value at flat index " + std::to_string(i));
    out.values[i] = v;
  }
  return out;
}

HamiltonianCheck verify_hamiltonian(const Hamiltonian& h, int dim, SplitMix64 rng, int samples,
                                    double p_range) {
  HamiltonianCheck chk;
  chk.grad_consistent = true;
  chk.monotone = true;
  chk.lipschitz = true;

  double x[2], p[2], q[2], gp[2], gq[2];
  for (int it = 0; it < samples; ++it) {
    double t = rng.uniform(0.0, 2.0);
    for (int a = 0; a < dim; ++a) {
      x[a] = rng.uniform(0.0, 10.0);
      // log-uniform magnitudes so both tiny and huge gradients are exercised
      double mag = std::pow(10.0, rng.uniform(-2.0, std::log10(p_range)));
      p[a] = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * mag;
      q[a] = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * std::pow(10.0, rng.uniform(-2.0, std::log10(p_range)));
    }
    double u = rng.uniform(-5.0, 5.0);
    std::span<const double> xs(x, dim), ps(p, dim), qs(q, dim);

    // gradient consistency at moderate |p| (finite differences lose accuracy
    // at extreme magnitudes)
    double pnorm = std::hypot(p[0], dim == 2 ? p[1] : 0.0);
    if (pnorm < 1e3) {
      double step = 1e-6 * (1.0 + pnorm);
      h.grad_p(t, xs, u, ps, std::span<double>(gp, dim));
      for (int a = 0; a < dim; ++a) {
        double save = p[a];
        p[a] = save + step;
        double fp = h.eval(t, xs, u, ps);
        p[a] = save - step;
        double fm = h.eval(t, xs, u, ps);
        p[a] = save;
        double fd = (fp - fm) / (2.0 * step);
        double rel = std::abs(fd - gp[a]) / (1.0 + std::abs(gp[a]));
        chk.max_grad_rel_err = std::max(chk.max_grad_rel_err, rel);
        if (rel > 1e-5) chk.grad_consistent = false;
      }
    }

    // (H3) monotonicity with the declared gamma
    double v = u + rng.uniform(0.0, 5.0);
    double gap = h.eval(t, xs, v, ps) - h.eval(t, xs, u, ps) - h.gamma * (v - u);
    chk.worst_monotone_slack = std::min(chk.worst_monotone_slack, gap);
    if (gap < -1e-10 * (1.0 + std::abs(v - u))) chk.monotone = false;

    // (HLip) with the declared constant, for eval and grad_p
    if (h.satisfies_HLip && h.lipschitz_p) {
      double lip = *h.lipschitz_p;
      double dist = 0.0;
      for (int a = 0; a < dim; ++a) dist += (p[a] - q[a]) * (p[a] - q[a]);
      dist = std::sqrt(dist);
      double dh = std::abs(h.eval(t, xs, u, ps) - h.eval(t, xs, u, qs));
      double excess = dh - lip * dist;
      chk.worst_lipschitz_excess = std::max(chk.worst_lipschitz_excess, excess);
      if (excess > 1e-9 * (1.0 + lip * dist)) chk.lipschitz = false;
      h.grad_p(t, xs, u, ps, std::span<double>(gp, dim));
      h.grad_p(t, xs, u, qs, std::span<double>(gq, dim));
      double dg = 0.0;
      for (int a = 0; a < dim; ++a) dg += (gp[a] - gq[a]) * (gp[a] - gq[a]);
      dg = std::sqrt(dg);
      // D_p H of the catalog entries is Lipschitz with the same constant
      if (dg - lip * dist > 1e-9 * (1.0 + lip * dist)) chk.lipschitz = false;
    }
  }
  return chk;
}

}  // namespace lhj
