#pragma once

#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace lhj {

using Complex = std::complex<double>;

// Uniform periodic grid on [0, L)^d with d in {1,2} and n (a power of two)
// points per axis.  Frequencies per axis are {2*pi*k/L : k = -n/2 .. n/2-1},
// stored in DFT order 0,1,...,n/2-1,-n/2,...,-1.
struct PeriodicGrid {
  int dim;
  int n;
  double period;

  PeriodicGrid(int dim_, int n_, double period_);

  double spacing() const { return period / n; }
  std::size_t size() const;
  double cell_volume() const;

  int signed_index(int k) const { return k < n / 2 ? k : k - n; }
  double frequency(int k) const {
    return 2.0 * std::numbers::pi * signed_index(k) / period;
  }
  bool is_nyquist(int k) const { return k == n / 2; }

  // Coordinates of the flat index (row-major, axis 0 slowest).
  void point(std::size_t flat, std::span<double> x) const;
  // Frequency vector of the flat spectral index.
  void frequency_vector(std::size_t flat, std::span<double> xi) const;

  bool operator==(const PeriodicGrid&) const = default;
};

// Real scalar field sampled on a PeriodicGrid.  Fields are values: every
// operation returns a new Field and never mutates its inputs.
struct Field {
  PeriodicGrid grid;
  std::vector<double> values;

  explicit Field(const PeriodicGrid& g) : grid(g), values(g.size(), 0.0) {}
  Field(const PeriodicGrid& g, std::vector<double> v);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }

  Field& operator+=(const Field& rhs);
  Field& operator-=(const Field& rhs);
  Field& operator*=(double s);
  // this += s * rhs
  Field& axpy(double s, const Field& rhs);
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(double s, Field f);

Field constant_field(const PeriodicGrid& g, double c);
Field make_field(const PeriodicGrid& g, const std::function<double(std::span<const double>)>& f);
Field pointwise_product(const Field& a, const Field& b);

void require_same_grid(const Field& a, const Field& b, const char* what);
void require_finite(const Field& f, const char* what);

// --- transforms -------------------------------------------------------------
//
// forward_transform(u)[k] = (1/n^d) sum_j u_j exp(-i xi_k . x_j), so a
// constant field c has coefficient c at xi = 0 and cos(2*pi*x/L) splits into
// two coefficients of weight 1/2.  inverse_transform is the plain synthesis
// sum; the pair round-trips to machine precision.

std::vector<Complex> forward_transform(const Field& u);
// Throws if the coefficients are not conjugate-even within tolerance (the
// synthesis would be complex).
Field inverse_transform(const PeriodicGrid& g, std::span<const Complex> coeffs);

// Multiplies the spectrum by m(xi).  m must satisfy m(-xi) = conj m(xi) on
// paired grid frequencies (rejected otherwise); on Nyquist rows, which have
// no partner, the real part of m is used (odd multipliers lose that mode).
Field apply_multiplier(const Field& u, const std::function<Complex(std::span<const double>)>& m);
Field apply_multiplier(const Field& u, std::span<const Complex> multiplier);

// Evaluates m on the grid frequencies in spectral (flat) order.
std::vector<Complex> multiplier_on_grid(const PeriodicGrid& g,
                                        const std::function<Complex(std::span<const double>)>& m);

// d/dx_i by i*xi_i with the Nyquist mode zeroed.
Field spectral_gradient_component(const Field& u, int axis);
std::vector<Field> spectral_gradient(const Field& u);

// --- norms ------------------------------------------------------------------

double sup_norm(const Field& u);
double l1_norm(const Field& u);  // sum |u| h^d

// sup over grid shifts s != 0 with |s| <= max_shift (default L/4, torus
// metric) of ||u(.+s) - u||_inf / |s|^beta, beta in (0,1].  Shifts are whole
// grid cells.  Cost is O(n^2) in 1-D and O(n^4) in 2-D; keep 2-D grids small
// when this diagnostic is on.
double holder_seminorm(const Field& u, double beta);
double holder_seminorm(const Field& u, double beta, double max_shift);

}  // namespace lhj
