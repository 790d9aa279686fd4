#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lhj/grid.hpp"
#include "lhj/symbols.hpp"

namespace lhj {

// Smallest t for which e^{-t psi} decays below `guard` at the highest grid
// frequencies; kernels below this floor would alias.
double resolution_floor(const Symbol& s, const PeriodicGrid& g, double guard = 1e-3);

// K_t with F(K_t) = e^{-t psi}; adjoint=true gives the kernel K* of the
// adjoint operator (conjugated symbol).  Discrete mass is 1 by construction.
// Throws UnderResolvedError (naming the minimal admissible t) when the
// spectral tail at the grid edge exceeds `guard`.
Field kernel(const Symbol& s, double t, const PeriodicGrid& g, bool adjoint = false,
             double guard = 1e-3);

// K_t * u applied as the spectral multiplier e^{-t psi}; exact per mode, so
// it is valid for every t >= 0 (t = 0 returns u).
Field kernel_convolve(const Symbol& s, double t, const Field& u);

// ||D^beta K_t||_{L1} with the derivative applied spectrally; beta is a
// per-axis multi-index.
double l1_derivative_norm(const Symbol& s, double t, const PeriodicGrid& g,
                          std::span<const int> beta, double guard = 1e-3);

// Fraction of the mass of |f| in the outermost two-cell band along each axis;
// the torus stands in for R^d only while this is small.
double seam_fraction(const Field& f);

struct KernelAuditOptions {
  double guard = 1e-3;
  double pass_rel_tol = 0.05;        // |alpha_hat - alpha| <= tol * alpha
  double residual_threshold = 0.05;  // rms log-residual above this => INCONCLUSIVE
  double seam_threshold = 1e-10;
};

struct KernelAuditRow {
  double t;
  std::vector<int> beta;
  double l1;
  double seam;
};

struct KernelBetaFit {
  std::vector<int> beta;
  double slope;
  double intercept;
  double rms_residual;
  double alpha_hat;  // |beta| / (-slope)
};

// Regression audit of the heat-kernel decay ||D^beta K_t||_{L1} ~ t^{-|beta|/alpha}.
// Per-beta slopes estimate the decay order of that derivative direction; the
// audited order is the minimum across the sampled betas (the slowest axis
// governs an anisotropic sum).
struct KernelAudit {
  std::string symbol_name;
  double claimed_order;
  std::vector<KernelAuditRow> rows;
  std::vector<KernelBetaFit> fits;
  double alpha_hat;
  bool seam_ok;
  bool inconclusive;
  bool pass;
  std::string message;
};

KernelAudit audit_order(const Symbol& s, const PeriodicGrid& g, std::span<const double> times,
                        std::span<const std::vector<int>> betas, const KernelAuditOptions& opts = {});

// Geometric time ladder with `per_decade` points per decade, inclusive ends.
std::vector<double> geometric_times(double lo, double hi, int per_decade);

// Process-wide immutable caches, safe for concurrent reads; population is
// idempotent.  Kernel fields are additionally persisted under LHJ_CACHE_DIR
// (if set) for symbols with a serializable cache key.
class KernelCache {
 public:
  static std::shared_ptr<const std::vector<Complex>> semigroup_multiplier(const Symbol& s, double t,
                                                                          const PeriodicGrid& g);
  static std::shared_ptr<const Field> kernel_field(const Symbol& s, double t,
                                                   const PeriodicGrid& g, bool adjoint,
                                                   double guard);
  static void clear();
};

}  // namespace lhj
