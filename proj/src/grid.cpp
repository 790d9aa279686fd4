#include "lhj/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "lhj/errors.hpp"

namespace lhj {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW plans are cached per (dim, n, sign).  Plan creation is not
// thread-safe and is serialized; execution on caller-owned buffers via
// fftw_execute_dft is.
class PlanCache {
 public:
  static fftw_plan get(int dim, int n, int sign) {
    static PlanCache cache;
    std::scoped_lock lock(cache.mutex_);
    auto key = std::tuple{dim, n, sign};
    auto it = cache.plans_.find(key);
    if (it != cache.plans_.end()) return it->second;

    std::size_t total = dim == 1 ? static_cast<std::size_t>(n)
                                 : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    std::vector<Complex> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = dim == 1 ? fftw_plan_dft_1d(n, buf, buf, sign, flags)
                              : fftw_plan_dft_2d(n, n, buf, buf, sign, flags);
    if (!plan) throw Error("fftw plan creation failed");
    cache.plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void run_fft(const PeriodicGrid& g, std::vector<Complex>& buf, int sign) {
  fftw_plan plan = PlanCache::get(g.dim, g.n, sign);
  auto* raw = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plan, raw, raw);
}

}  // namespace

PeriodicGrid::PeriodicGrid(int dim_, int n_, double period_)
    : dim(dim_), n(n_), period(period_) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (!power_of_two(n)) throw ConfigError("grid points per axis must be a power of two");
  if (!(period > 0.0) || !std::isfinite(period)) throw ConfigError("grid period must be positive");
}

std::size_t PeriodicGrid::size() const {
  std::size_t s = static_cast<std::size_t>(n);
  return dim == 1 ? s : s * s;
}

double PeriodicGrid::cell_volume() const {
  double h = spacing();
  return dim == 1 ? h : h * h;
}

void PeriodicGrid::point(std::size_t flat, std::span<double> x) const {
  double h = spacing();
  if (dim == 1) {
    x[0] = h * static_cast<double>(flat);
  } else {
    x[0] = h * static_cast<double>(flat / static_cast<std::size_t>(n));
    x[1] = h * static_cast<double>(flat % static_cast<std::size_t>(n));
  }
}

void PeriodicGrid::frequency_vector(std::size_t flat, std::span<double> xi) const {
  if (dim == 1) {
    xi[0] = frequency(static_cast<int>(flat));
  } else {
    xi[0] = frequency(static_cast<int>(flat / static_cast<std::size_t>(n)));
    xi[1] = frequency(static_cast<int>(flat % static_cast<std::size_t>(n)));
  }
}

Field::Field(const PeriodicGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) throw Error("field size does not match grid");
}

Field& Field::operator+=(const Field& rhs) {
  require_same_grid(*this, rhs, "operator+=");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += rhs.values[i];
  return *this;
}

Field& Field::operator-=(const Field& rhs) {
  require_same_grid(*this, rhs, "operator-=");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= rhs.values[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& rhs) {
  require_same_grid(*this, rhs, "axpy");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += s * rhs.values[i];
  return *this;
}

Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
Field operator*(double s, Field f) { return f *= s; }

Field constant_field(const PeriodicGrid& g, double c) {
  Field f(g);
  std::fill(f.values.begin(), f.values.end(), c);
  return f;
}

Field make_field(const PeriodicGrid& g, const std::function<double(std::span<const double>)>& fn) {
  Field f(g);
  double x[2];
  for (std::size_t i = 0; i < f.size(); ++i) {
    g.point(i, std::span<double>(x, g.dim));
    f.values[i] = fn(std::span<const double>(x, g.dim));
  }
  return f;
}

Field pointwise_product(const Field& a, const Field& b) {
  require_same_grid(a, b, "pointwise_product");
  Field out(a.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = a.values[i] * b.values[i];
  return out;
}

void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (!(a.grid == b.grid)) throw Error(std::string(what) + ": fields live on different grids");
}

void require_finite(const Field& f, const char* what) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f.values[i]))
      throw Error(std::string(what) + ": non-finite value at flat index " + std::to_string(i));
}

std::vector<Complex> forward_transform(const Field& u) {
  std::vector<Complex> buf(u.values.begin(), u.values.end());
  run_fft(u.grid, buf, FFTW_FORWARD);
  double scale = 1.0 / static_cast<double>(u.grid.size());
  for (Complex& c : buf) c *= scale;
  return buf;
}

Field inverse_transform(const PeriodicGrid& g, std::span<const Complex> coeffs) {
  if (coeffs.size() != g.size()) throw Error("inverse_transform: coefficient count mismatch");
  std::vector<Complex> buf(coeffs.begin(), coeffs.end());
  run_fft(g, buf, FFTW_BACKWARD);
  double max_re = 0.0, max_im = 0.0;
  for (const Complex& c : buf) {
    max_re = std::max(max_re, std::abs(c.real()));
    max_im = std::max(max_im, std::abs(c.imag()));
  }
  if (max_im > 1e-6 * (1.0 + max_re))
    throw Error("inverse_transform: spectrum is not conjugate-even, synthesis would be complex");
  Field out(g);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = buf[i].real();
  return out;
}

std::vector<Complex> multiplier_on_grid(const PeriodicGrid& g,
                                        const std::function<Complex(std::span<const double>)>& m) {
  std::vector<Complex> vals(g.size());
  double xi[2];
  for (std::size_t i = 0; i < vals.size(); ++i) {
    g.frequency_vector(i, std::span<double>(xi, g.dim));
    vals[i] = m(std::span<const double>(xi, g.dim));
  }
  return vals;
}

namespace {

// Flat index of -k (mod n per axis); indices on a Nyquist row map to
// themselves along that axis.
std::size_t negated_index(const PeriodicGrid& g, std::size_t flat) {
  auto neg = [&](int k) { return k == 0 ? 0 : g.n - k; };
  if (g.dim == 1) return static_cast<std::size_t>(neg(static_cast<int>(flat)));
  int k0 = static_cast<int>(flat / static_cast<std::size_t>(g.n));
  int k1 = static_cast<int>(flat % static_cast<std::size_t>(g.n));
  return static_cast<std::size_t>(neg(k0)) * static_cast<std::size_t>(g.n) +
         static_cast<std::size_t>(neg(k1));
}

bool on_nyquist_row(const PeriodicGrid& g, std::size_t flat) {
  if (g.dim == 1) return g.is_nyquist(static_cast<int>(flat));
  int k0 = static_cast<int>(flat / static_cast<std::size_t>(g.n));
  int k1 = static_cast<int>(flat % static_cast<std::size_t>(g.n));
  return g.is_nyquist(k0) || g.is_nyquist(k1);
}

}  // namespace

Field apply_multiplier(const Field& u, std::span<const Complex> multiplier) {
  const PeriodicGrid& g = u.grid;
  if (multiplier.size() != g.size()) throw Error("apply_multiplier: multiplier size mismatch");

  // Symmetry check: paired frequencies must be conjugate, Nyquist rows are
  // projected onto their real part (the imaginary part has no partner mode).
  std::vector<Complex> m(multiplier.begin(), multiplier.end());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (on_nyquist_row(g, i)) {
      m[i] = Complex(m[i].real(), 0.0);
      continue;
    }
    std::size_t j = negated_index(g, i);
    double mismatch = std::abs(m[i] - std::conj(multiplier[j]));
    if (mismatch > 1e-10 * (1.0 + std::abs(m[i])))
      throw Error("apply_multiplier: multiplier is not conjugate-even at flat index " +
                  std::to_string(i) + " (would produce a complex field)");
  }

  std::vector<Complex> coeffs = forward_transform(u);
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= m[i];
  return inverse_transform(g, coeffs);
}

Field apply_multiplier(const Field& u, const std::function<Complex(std::span<const double>)>& m) {
  return apply_multiplier(u, multiplier_on_grid(u.grid, m));
}

Field spectral_gradient_component(const Field& u, int axis) {
  const PeriodicGrid& g = u.grid;
  if (axis < 0 || axis >= g.dim) throw Error("spectral_gradient: axis out of range");
  std::vector<Complex> coeffs = forward_transform(u);
  double xi[2];
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (on_nyquist_row(g, i)) {
      coeffs[i] = 0.0;
      continue;
    }
    g.frequency_vector(i, std::span<double>(xi, g.dim));
    coeffs[i] *= Complex(0.0, xi[axis]);
  }
  return inverse_transform(g, coeffs);
}

std::vector<Field> spectral_gradient(const Field& u) {
  std::vector<Field> out;
  out.reserve(u.grid.dim);
  for (int a = 0; a < u.grid.dim; ++a) out.push_back(spectral_gradient_component(u, a));
  return out;
}

double sup_norm(const Field& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}

double l1_norm(const Field& u) {
  double s = 0.0;
  for (double v : u.values) s += std::abs(v);
  return s * u.grid.cell_volume();
}

namespace {

// max_x |u(x+s) - u(x)| for the cell shift (j0[,j1]).
double shift_sup_1d(const Field& u, int j) {
  const int n = u.grid.n;
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    double d = std::abs(u.values[(i + j) % n] - u.values[i]);
    if (d > m) m = d;
  }
  return m;
}

double shift_sup_2d(const Field& u, int j0, int j1) {
  const int n = u.grid.n;
  double m = 0.0;
  for (int i0 = 0; i0 < n; ++i0) {
    const std::size_t base = static_cast<std::size_t>(i0) * n;
    const std::size_t shifted = static_cast<std::size_t>((i0 + j0) % n) * n;
    for (int i1 = 0; i1 < n; ++i1) {
      double d = std::abs(u.values[shifted + (i1 + j1) % n] - u.values[base + i1]);
      if (d > m) m = d;
    }
  }
  return m;
}

}  // namespace

double holder_seminorm(const Field& u, double beta, double max_shift) {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error("holder_seminorm: beta must lie in (0,1]");
  const PeriodicGrid& g = u.grid;
  const double h = g.spacing();
  double best = 0.0;
  if (g.dim == 1) {
    // shift j and n-j give the same sup, so half the range suffices
    for (int j = 1; j <= g.n / 2; ++j) {
      double dist = std::min(j, g.n - j) * h;
      if (dist > max_shift) continue;
      best = std::max(best, shift_sup_1d(u, j) / std::pow(dist, beta));
    }
  } else {
    for (int j0 = 0; j0 < g.n; ++j0) {
      double d0 = std::min(j0, g.n - j0) * h;
      if (d0 > max_shift) continue;
      for (int j1 = (j0 == 0 ? 1 : 0); j1 < g.n; ++j1) {
        double d1 = std::min(j1, g.n - j1) * h;
        double dist = std::hypot(d0, d1);
        if (dist > max_shift) continue;
        best = std::max(best, shift_sup_2d(u, j0, j1) / std::pow(dist, beta));
      }
    }
  }
  return best;
}

double holder_seminorm(const Field& u, double beta) {
  return holder_seminorm(u, beta, u.grid.period / 4.0);
}

}  // namespace lhj
