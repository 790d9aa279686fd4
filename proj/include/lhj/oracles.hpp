#pragma once

#include "lhj/grid.hpp"
#include "lhj/symbols.hpp"

namespace lhj {

// Closed-form reference solutions used by oracle-compare runs and tests.
// These deliberately avoid the Duhamel/Picard path: they go through a single
// semigroup application of transformed data.

// Solution of u_t - L u + (c/2)|Du|^2 = 0 via the logarithmic transform
// u = -(2/c) log( K_t * exp(-c u_0 / 2) ).  Exact when L is the Laplacian.
Field cole_hopf_solution(const Symbol& laplacian, double c, const Field& u0, double t);

// Solution of u_t - L u = f0 (constant forcing): K_t * u_0 + f0 t.
Field linear_heat_solution(const Symbol& s, const Field& u0, double t, double f0 = 0.0);

}  // namespace lhj
