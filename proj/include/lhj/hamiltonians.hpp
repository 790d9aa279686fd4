#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lhj/grid.hpp"
#include "lhj/rng.hpp"

namespace lhj {

// Hamiltonian H(t, x, u, p) with machine-checkable assumption metadata.
// gamma is the monotonicity constant in u; lipschitz_p is the global
// Lipschitz constant in p when one exists (nullopt = only locally Lipschitz).
// Declared flags are verified by sampling in verify_hamiltonian; studies
// select behavior by these flags and a wrong declaration is a hard failure.
struct Hamiltonian {
  std::function<double(double t, std::span<const double> x, double u, std::span<const double> p)>
      eval;
  std::function<void(double t, std::span<const double> x, double u, std::span<const double> p,
                     std::span<double> out)>
      grad_p;
  std::function<double(double t, std::span<const double> x, double u, std::span<const double> p)>
      grad_u;
  double gamma = 0.0;
  bool satisfies_H1 = false;
  bool satisfies_H2 = false;
  bool satisfies_HLip = false;
  std::optional<double> lipschitz_p;
  std::optional<double> h2_constant;  // reported bound for the (H2) quotient
  std::string name = "hamiltonian";
};

// H == 0; every flag holds trivially.
Hamiltonian ham_zero();
// H = c |p|^2 / 2.  Not globally Lipschitz (lipschitz_p unset).
Hamiltonian ham_quadratic(double c);
// H = a (sqrt(1 + |p|^2) - 1); globally Lipschitz with constant a, as is grad_p.
Hamiltonian ham_smooth_lipschitz(double a);
// H' = base + lambda * u; gamma' = gamma + lambda.
Hamiltonian ham_with_zero_order(Hamiltonian base, double lambda);

// Bounded positive spatial coefficient with declared bounds.
struct SpatialCoeff {
  std::function<double(std::span<const double>)> eval;
  double inf = 1.0;       // lower bound of c
  double sup = 1.0;       // upper bound of c
  double grad_sup = 0.0;  // ||Dc||_inf
  std::string name = "coeff";
};
// H'(t,x,u,p) = c(x) * base(t,x,u,p); requires c > 0.
Hamiltonian ham_x_dependent(Hamiltonian base, SpatialCoeff c);

// Pointwise evaluation on fields; throws naming the grid point on non-finite
// output.
Field apply_hamiltonian(const Hamiltonian& h, double t, const Field& u,
                        std::span<const Field> du);

struct HamiltonianCheck {
  bool grad_consistent = false;   // finite differences of eval match grad_p
  bool monotone = false;          // (H3) with the declared gamma
  bool lipschitz = false;         // (HLip) with the declared constant (if set)
  double max_grad_rel_err = 0.0;
  double worst_monotone_slack = 0.0;
  double worst_lipschitz_excess = 0.0;
  bool ok() const { return grad_consistent && monotone && lipschitz; }
};

// Sampling verification of the declared metadata at random points; |p| is
// exercised up to `p_range`.
HamiltonianCheck verify_hamiltonian(const Hamiltonian& h, int dim, SplitMix64 rng,
                                    int samples = 1000, double p_range = 1e6);

}  // namespace lhj
