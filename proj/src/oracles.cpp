#include "lhj/oracles.hpp"

#include <cmath>

#include "lhj/errors.hpp"
#include "lhj/heatkernel.hpp"

namespace lhj {

Field cole_hopf_solution(const Symbol& laplacian, double c, const Field& u0, double t) {
  if (!(c > 0.0)) throw Error("cole_hopf_solution: c must be positive");
  Field v(u0.grid);
  for (std::size_t i = 0; i < v.size(); ++i) v.values[i] = std::exp(-0.5 * c * u0.values[i]);
  Field w = kernel_convolve(laplacian, t, v);
  Field out(u0.grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(w.values[i] > 0.0))
      throw Error("cole_hopf_solution: transformed field lost positivity");
    out.values[i] = -(2.0 / c) * std::log(w.values[i]);
  }
  return out;
}

Field linear_heat_solution(const Symbol& s, const Field& u0, double t, double f0) {
  Field out = kernel_convolve(s, t, u0);
  if (f0 != 0.0) out += constant_field(u0.grid, f0 * t);
  return out;
}

}  // namespace lhj
