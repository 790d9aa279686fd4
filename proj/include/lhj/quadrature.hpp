#pragma once

#include <complex>
#include <functional>

namespace lhj {

struct QuadResult {
  std::complex<double> value;
  double error_estimate;
  std::size_t segments;
};

// Globally adaptive Gauss-Kronrod 7-15 on [a, b].  Bisects the segment with
// the largest error estimate until |error| <= max(abs_tol, rel_tol*|value|)
// or the segment budget is exhausted (QuadratureError, carrying the achieved
// estimate).  Endpoints are never evaluated, so integrable endpoint
// singularities are fine.
QuadResult integrate_gk(const std::function<std::complex<double>(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int max_segments = 4000);

double integrate_gk_real(const std::function<double(double)>& f, double a, double b,
                         double abs_tol, double rel_tol, int max_segments = 4000);

}  // namespace lhj
