#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lhj/grid.hpp"

namespace lhj {

enum class SymbolKind { laplacian, fractional, anisotropic, riesz_feller, cgmy, sum, quadrature };

// Fourier multiplier psi of a translation-invariant Levy operator L, with
// F(L u) = -psi F(u).  Every catalog symbol satisfies psi(0) = 0,
// Re psi >= 0 and psi(-xi) = conj psi(xi); the declared order alpha in (1,2]
// drives the heat-kernel decay rate t^{-|beta|/alpha}.
struct Symbol {
  SymbolKind kind;
  int dim;
  double order;
  std::function<Complex(std::span<const double>)> eval;
  std::string name;
  // Disk-cache identity; empty when the symbol is not serializable (e.g.
  // carries a user-supplied density).
  std::string cache_key;
  std::uint64_t id;  // process-unique, assigned at construction

  Complex operator()(std::span<const double> xi) const { return eval(xi); }
  Complex at(double xi) const { return eval(std::span<const double>(&xi, 1)); }
  // Symbol of the adjoint operator L* (conjugate multiplier).
  Symbol adjoint() const;
};

Symbol make_symbol(SymbolKind kind, int dim, double order,
                   std::function<Complex(std::span<const double>)> eval, std::string name,
                   std::string cache_key);

// --- closed-form catalog ------------------------------------------------------

// psi(xi) = |xi|^2 (order 2)
Symbol symbol_laplacian(int dim);
// psi(xi) = |xi|^alpha, alpha in (1,2); normalization fixed so the stable
// constant c_alpha is absorbed into time units
Symbol symbol_fractional(int dim, double alpha);
// psi(xi) = sum_i |xi_i|^{alpha_i}, declared order min_i alpha_i
Symbol symbol_anisotropic(std::span<const double> orders);
// Levy-Khintchine transform of nu(z) = |z|^{-1-alpha} 1_{z>0} (side=+1) or
// 1_{z<0} (side=-1), unit-ball compensation, d = 1.  Nonsymmetric.
Symbol symbol_riesz_feller(double alpha, int side);
// Levy-Khintchine transform of the tempered-stable density
// C e^{-G|z|} |z|^{-1-Y} (z<0) + C e^{-M z} z^{-1-Y} (z>0), d = 1, order Y.
Symbol symbol_cgmy(double c, double g, double m, double y);
// psi = psi_a + psi_b; declared order max(alpha_a, alpha_b)
Symbol symbol_sum(const Symbol& a, const Symbol& b);
// psi(xi) = -i b.xi  (order tag 2; only meaningful inside sums)
Symbol symbol_drift(std::span<const double> b);

// --- quadrature route ---------------------------------------------------------

struct TripletQuadrature {
  double truncation = 3e4;  // jump integrals truncated at |z| = R
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_segments = 200000;
  int angular_nodes = 64;  // polar rule resolution for d = 2
};

// Levy triplet (B, A, nu) with unit-ball compensation.  The density is a
// plain function on R^d minus the origin; the truncation radius of the
// quadrature configuration declares where its mass is considered spent.
struct LevyTriplet {
  int dim = 1;
  std::vector<double> drift;                                    // size d
  std::vector<double> diffusion;                                // d*d, row-major
  std::function<double(std::span<const double>)> levy_density;  // null = no jumps
  double declared_order = 2.0;
  std::string name;
};

// Checks A symmetric PSD (eigenvalues >= -tol) and integrability of
// (1 ^ |z|^2) nu on the declared truncation box.  Throws ConfigError.
void validate_triplet(const LevyTriplet& t, const TripletQuadrature& quad, double tol = 1e-12);

// psi(xi) = -i B.xi + xi.A xi + int (1 - e^{i xi.z} + i xi.z 1_{|z|<1}) nu(dz)
// by singularity-splitting adaptive quadrature.  This is the oracle every
// closed-form symbol is checked against.
Symbol symbol_from_triplet(const LevyTriplet& t, const TripletQuadrature& quad = {});

// --- triplet catalog ----------------------------------------------------------

LevyTriplet triplet_gaussian(int dim);
LevyTriplet triplet_symmetric_stable(double alpha);       // d=1, nu = |z|^{-1-alpha}
LevyTriplet triplet_one_sided_stable(double alpha, int side);
LevyTriplet triplet_cgmy(double c, double g, double m, double y);

}  // namespace lhj
