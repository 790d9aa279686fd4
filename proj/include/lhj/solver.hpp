#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lhj/grid.hpp"
#include "lhj/hamiltonians.hpp"
#include "lhj/symbols.hpp"

namespace lhj {

enum class QuadRule { left_rectangle, trapezoid };

struct SolverConfig {
  double dt = 1e-2;          // macro step; trajectory nodes land on multiples
  double picard_tol = 1e-9;  // sup-norm fixed-point tolerance
  int picard_max = 30;
  QuadRule quad_rule = QuadRule::trapezoid;
  int substeps = 2;  // quadrature nodes per macro step
  double resolve_guard = 1e-3;
  double tau_initial = 0.0;  // initial fixed-point interval; 0 = 4*dt

  // trajectory diagnostics
  double diag_beta = 0.5;   // exponent for [u]_{C^beta}
  double diag_sigma = 0.5;  // exponent for [Du]_{C^sigma}
  bool diag_seminorms = true;
  bool diag_residual = true;

  void validate() const;
};

// Time-dependent forcing; a null eval means f == 0.
struct Forcing {
  std::function<Field(double)> eval;
  std::string name = "zero";
  bool zero() const { return !eval; }
  Field at(double t, const PeriodicGrid& g) const;
};

struct Problem {
  Symbol symbol;
  Hamiltonian hamiltonian;
  Forcing forcing;
  Field initial;
  double horizon;
};

// Fields on the uniform quadrature nodes of one fixed-point interval.
struct FinePath {
  double t0 = 0.0;
  double node_dt = 0.0;
  std::vector<Field> fields;
  double time_at(std::size_t j) const { return t0 + node_dt * static_cast<double>(j); }
};

struct StepDiagnostics {
  double time = 0.0;
  double sup_u = 0.0;
  double sup_du = 0.0;
  double holder_u = 0.0;   // [u]_{C^diag_beta}
  double holder_du = 0.0;  // max component [Du]_{C^diag_sigma}
  int picard_iters = 0;
  double rho_last = 0.0;
  double residual_sup = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> fields;
  std::vector<StepDiagnostics> diagnostics;

  std::size_t size() const { return times.size(); }
  // index of the node closest to t; throws if farther than tol
  std::size_t index_at(double t, double tol) const;
};

struct ContractionReport {
  int iterations = 0;
  bool converged = false;
  double final_diff = 0.0;
  std::vector<double> ratios_sup;  // ||d_k|| / ||d_{k-1}|| in sup norm
  std::vector<double> ratios_c1;   // same in sup + gradient-sup norm
  double rho_last() const { return ratios_sup.empty() ? 0.0 : ratios_sup.back(); }
  // First C1 ratio: the cleanest estimate of the contraction factor of the
  // Duhamel map (later ratios drown in the tolerance floor).
  double rho_c1() const { return ratios_c1.empty() ? 0.0 : ratios_c1.front(); }
};

// One application of the Duhamel map
//   S(u)(t) = K_{t-t0} * u(t0) + int_{t0}^t K_{t-s} * [f(s) - H(s,.,u,Du)] ds
// on the candidate's nodes.  The integral uses the configured rule with the
// semigroup identity K_a * K_b = K_{a+b} (exact spectrally), so the s = t
// endpoint is the identity kernel.
FinePath duhamel_map(const Problem& p, const FinePath& candidate, const SolverConfig& cfg);

// Picard iteration u^{k+1} = S(u^k) on [ta, tb] starting from the semigroup
// flow of `start`; throws NoContractionError when the iteration will not
// contract on this interval (take a shorter one).
std::pair<FinePath, ContractionReport> picard_solve(const Problem& p, double ta, double tb,
                                                    const Field& start, const SolverConfig& cfg);

// Long-time solve by gluing fixed-point intervals: restart from the endpoint
// field, halve the interval on NO_CONTRACTION, grow it by 1.5x after three
// consecutive easy successes.  Throws BlowupSuspicionError when the interval
// collapses below dt * 2^-20.
Trajectory march(const Problem& p, const SolverConfig& cfg);

// r = u_t - L u + H(t,x,u,Du) - f at trajectory node i; u_t by second-order
// differencing (one-sided at the ends, nonuniform-safe).
Field pde_residual(const Problem& p, const Trajectory& traj, std::size_t i);

// Lacunary cosine datum sum_j 2^{-j beta} cos(2^j (2 pi/L) x + theta_j) with
// phases from SplitMix64(seed); lies in C^beta and no better uniformly in the
// grid.  In 2-D an independent series is added per axis.
Field weierstrass_datum(const PeriodicGrid& g, double beta, std::uint64_t seed);

}  // namespace lhj
