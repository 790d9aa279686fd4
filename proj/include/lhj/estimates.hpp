#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lhj/solver.hpp"

namespace lhj {

// Least-squares exponent fit of value ~ C t^q on log-log axes over a declared
// window.  `scored = false` marks informative fits that do not gate a study.
struct RateFit {
  std::string quantity;
  std::vector<std::pair<double, double>> samples;  // (t, value) used by the fit
  double window_lo = 0.0, window_hi = 0.0;
  double fitted_exponent = 0.0;
  double fit_residual = 0.0;  // rms residual in log space
  double claimed_exponent = 0.0;
  double pass_tol = 0.0;
  bool scored = true;
  bool pass = false;
};

RateFit fit_rate(std::string quantity, std::span<const std::pair<double, double>> samples,
                 double window_lo, double window_hi, double claimed, double tol);

// Up to max_points log-uniformly spaced trajectory nodes inside the window,
// evaluated through `quantity`.
std::vector<std::pair<double, double>> sample_trajectory(
    const Trajectory& traj, double window_lo, double window_hi, int max_points,
    const std::function<double(const Field&)>& quantity);

// --- comparison principle -----------------------------------------------------

struct ComparisonReport {
  double min_gap = 0.0;  // min over t, x of (v - u)
  double tolerance = 0.0;
  bool pass = false;
};

// Marches the problem from both ordered data and checks the order persists.
// Requires u0_low <= u0_high pointwise and a Hamiltonian with the x-regularity
// flag set.
ComparisonReport comparison_check(const Problem& p, const Field& u0_low, const Field& u0_high,
                                  const SolverConfig& cfg);

// --- sup bound ------------------------------------------------------------------

struct SupBoundReport {
  struct Row {
    double t, sup_u, bound;
  };
  std::vector<Row> rows;
  double tolerance = 0.0;
  double worst_slack = 0.0;  // min over rows of bound + tol - sup_u
  bool pass = false;
};

// ||u(t)|| <= e^{-gamma t} ||u_0|| + I_gamma(t) (||f|| + ||H(.,.,0,0)||) with
// I_gamma(t) = (1 - e^{-gamma t})/gamma (t for gamma = 0), checked at every
// trajectory node with slack 1e-6 + 5 * picard_tol.
SupBoundReport supbound_check(const Problem& p, const Trajectory& traj, const SolverConfig& cfg);

// --- Bernstein machinery ---------------------------------------------------------

// Carre du champ Gamma(u) = (L(u^2) - 2 u L u)/2, computed spectrally.
// Nonnegative for any Levy symbol, up to the aliasing of u^2 (use fields
// band-limited to n/4).
Field bernstein_gamma(const Symbol& s, const Field& u);

struct LipschitzReport {
  double ratio_coarse = 0.0;  // sup_t ||Du|| / (1 + ||Du_0||)
  double ratio_fine = 0.0;
  double drift = 0.0;  // relative change across refinement
  double measured_c = 0.0;
  double bernstein_excess = 0.0;  // worst violation of the measured-C inequality on the fine run
  bool pass = false;
};

// Refinement stability of the normalized gradient bound plus the pointwise
// differential inequality d_t w - L w + Dw.H_p <= C (1 + w) for w = |Du|^2/2,
// with C measured on the coarse run and re-verified on the refined one.
LipschitzReport lipschitz_bound_check(const Symbol& s, const Hamiltonian& h, const Forcing& f,
                                      const std::function<double(std::span<const double>)>& datum,
                                      const PeriodicGrid& coarse, double horizon,
                                      const SolverConfig& cfg);

// --- Schauder structural check ---------------------------------------------------

struct SchauderReport {
  struct Row {
    double lambda, lhs, data_norm, ratio;
  };
  std::vector<Row> rows;
  double max_drift = 0.0;  // max |ratio/ratio_1 - 1|
  bool pass = false;       // ratios stable within 20 percent
};

// The absolute constants of the uniform regularity estimate are not
// computable, so the check is structural: the ratio of the solution-side
// norms to the data-side norms must stay flat across data scalings lambda.
SchauderReport schauder_uniform_check(const Symbol& s, const Hamiltonian& h, const Forcing& f,
                                      const std::function<double(std::span<const double>)>& datum,
                                      const PeriodicGrid& g, double horizon, double eps,
                                      const SolverConfig& cfg, std::span<const double> lambdas);

// --- gradient blow-up rates ------------------------------------------------------

struct BlowupStudy {
  double alpha = 0.0, beta = 0.0, eps = 0.0;
  double t_floor = 0.0;
  bool case_two = false;  // alpha + beta > 2
  std::vector<RateFit> fits;
  bool inconclusive = false;
  std::string message;
  bool pass = false;  // all scored fits pass
};

// Marches Holder-rough (Weierstrass) data and fits the small-time exponents:
// ||Du(t)|| ~ t^{-(1-beta)/alpha} while ||u|| and [u]_beta stay flat; in the
// smooth case (alpha + beta > 2) second derivatives are tracked as well.
// Requires the global-Lipschitz Hamiltonian flag.
BlowupStudy blowup_study(const Symbol& s, const Hamiltonian& h, const Forcing& f, double beta,
                         double eps, const PeriodicGrid& g, double horizon,
                         const SolverConfig& cfg, std::uint64_t seed);

}  // namespace lhj
