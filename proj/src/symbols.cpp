#include "lhj/symbols.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "lhj/csv.hpp"
#include "lhj/errors.hpp"
#include "lhj/quadrature.hpp"

namespace lhj {

namespace {

std::uint64_t next_symbol_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// 1 - e^{i theta}, stable for small theta
Complex one_minus_exp(double theta) {
  double s = std::sin(0.5 * theta);
  return Complex(2.0 * s * s, -std::sin(theta));
}

// theta - sin(theta), stable for small theta
double theta_minus_sin(double theta) {
  if (std::abs(theta) < 1e-2) {
    double t2 = theta * theta;
    return theta * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)));
  }
  return theta - std::sin(theta);
}

// 1 - e^{i theta} + i theta (unit-ball compensated integrand)
Complex compensated(double theta) {
  double s = std::sin(0.5 * theta);
  return Complex(2.0 * s * s, theta_minus_sin(theta));
}

void check_order(double alpha, const char* who) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw ConfigError(std::string(who) + ": order must lie in (1, 2), got " + format_sci(alpha));
}

}  // namespace

Symbol make_symbol(SymbolKind kind, int dim, double order,
                   std::function<Complex(std::span<const double>)> eval, std::string name,
                   std::string cache_key) {
  return Symbol{kind, dim, order, std::move(eval), std::move(name), std::move(cache_key),
                next_symbol_id()};
}

Symbol Symbol::adjoint() const {
  auto base = eval;
  Symbol s = make_symbol(kind, dim, order,
                         [base](std::span<const double> xi) { return std::conj(base(xi)); },
                         name + "*", cache_key.empty() ? "" : cache_key + ":adjoint");
  return s;
}

Symbol symbol_laplacian(int dim) {
  if (dim < 1) throw ConfigError("symbol_laplacian: dimension must be >= 1");
  return make_symbol(
      SymbolKind::laplacian, dim, 2.0,
      [](std::span<const double> xi) { return Complex(norm2(xi), 0.0); }, "laplacian",
      "laplacian:d=" + std::to_string(dim));
}

Symbol symbol_fractional(int dim, double alpha) {
  check_order(alpha, "symbol_fractional");
  return make_symbol(
      SymbolKind::fractional, dim, alpha,
      [alpha](std::span<const double> xi) {
        return Complex(std::pow(norm2(xi), 0.5 * alpha), 0.0);
      },
      "fractional", "fractional:d=" + std::to_string(dim) + ":a=" + format_sci(alpha));
}

Symbol symbol_anisotropic(std::span<const double> orders) {
  if (orders.empty()) throw ConfigError("symbol_anisotropic: needs at least one order");
  double declared = 2.0;
  std::string key = "anisotropic:";
  for (double a : orders) {
    if (!(a > 1.0 && a <= 2.0))
      throw ConfigError("symbol_anisotropic: each order must lie in (1, 2], got " + format_sci(a));
    declared = std::min(declared, a);
    key += format_sci(a) + ";";
  }
  std::vector<double> ords(orders.begin(), orders.end());
  return make_symbol(
      SymbolKind::anisotropic, static_cast<int>(ords.size()), declared,
      [ords](std::span<const double> xi) {
        double s = 0.0;
        for (std::size_t i = 0; i < ords.size(); ++i) s += std::pow(std::abs(xi[i]), ords[i]);
        return Complex(s, 0.0);
      },
      "anisotropic", key);
}

Symbol symbol_riesz_feller(double alpha, int side) {
  check_order(alpha, "symbol_riesz_feller");
  if (side != 1 && side != -1) throw ConfigError("symbol_riesz_feller: side must be +1 or -1");
  // For nu(z) = z^{-1-alpha} 1_{z>0} with unit-ball compensation,
  //   psi(xi) = -Gamma(-alpha) (-i xi)^alpha - i xi / (alpha - 1),
  // principal branch; the spectrally negative side is the conjugate.
  const double gamma_neg = std::tgamma(-alpha);
  const double comp = 1.0 / (alpha - 1.0);
  return make_symbol(
      SymbolKind::riesz_feller, 1, alpha,
      [alpha, gamma_neg, comp, side](std::span<const double> xi_v) {
        double xi = side > 0 ? xi_v[0] : -xi_v[0];
        Complex value =
            -gamma_neg * std::pow(Complex(0.0, -xi), alpha) - Complex(0.0, xi * comp);
        return side > 0 ? value : std::conj(value);
      },
      "riesz_feller",
      "riesz_feller:a=" + format_sci(alpha) + ":side=" + std::to_string(side));
}

Symbol symbol_cgmy(double c, double g, double m, double y) {
  if (!(c > 0.0 && g > 0.0 && m > 0.0))
    throw ConfigError("symbol_cgmy: C, G, M must be positive");
  check_order(y, "symbol_cgmy");
  // Fully compensated tempered-stable exponent plus the correction that moves
  // the compensation back to the unit ball:
  //   psi(xi) = -C Gamma(-Y) [ (M-i xi)^Y - M^Y + (G+i xi)^Y - G^Y
  //                            + i xi Y (M^{Y-1} - G^{Y-1}) ] - i xi mu_tail,
  // with mu_tail = int_{|z|>=1} z nu(dz) evaluated once by quadrature.
  const double gamma_neg = std::tgamma(-y);
  auto tail = [y](double lambda) {
    return integrate_gk_real([lambda, y](double z) { return std::exp(-lambda * z) * std::pow(z, -y); },
                             1.0, 1.0 + 80.0 / lambda, 1e-14, 1e-13);
  };
  const double mu_tail = c * (tail(m) - tail(g));
  return make_symbol(
      SymbolKind::cgmy, 1, y,
      [c, g, m, y, gamma_neg, mu_tail](std::span<const double> xi_v) {
        double xi = xi_v[0];
        Complex ix(0.0, xi);
        Complex core = std::pow(Complex(m, 0.0) - ix, y) - std::pow(m, y) +
                       std::pow(Complex(g, 0.0) + ix, y) - std::pow(g, y) +
                       ix * y * (std::pow(m, y - 1.0) - std::pow(g, y - 1.0));
        return -c * gamma_neg * core - ix * mu_tail;
      },
      "cgmy",
      "cgmy:C=" + format_sci(c) + ":G=" + format_sci(g) + ":M=" + format_sci(m) +
          ":Y=" + format_sci(y));
}

Symbol symbol_sum(const Symbol& a, const Symbol& b) {
  if (a.dim != b.dim) throw ConfigError("symbol_sum: dimension mismatch");
  auto ea = a.eval, eb = b.eval;
  std::string key = (a.cache_key.empty() || b.cache_key.empty())
                        ? ""
                        : "sum(" + a.cache_key + "|" + b.cache_key + ")";
  return make_symbol(
      SymbolKind::sum, a.dim, std::max(a.order, b.order),
      [ea, eb](std::span<const double> xi) { return ea(xi) + eb(xi); },
      a.name + "+" + b.name, key);
}

Symbol symbol_drift(std::span<const double> b) {
  std::vector<double> drift(b.begin(), b.end());
  std::string key = "drift:";
  for (double v : drift) key += format_sci(v) + ";";
  return make_symbol(
      SymbolKind::sum, static_cast<int>(drift.size()), 2.0,
      [drift](std::span<const double> xi) {
        double dot = 0.0;
        for (std::size_t i = 0; i < drift.size(); ++i) dot += drift[i] * xi[i];
        return Complex(0.0, -dot);
      },
      "drift", key);
}

// --- triplet route -------------------------------------------------------------

namespace {

// Jump part of the exponent in one dimension: the singular inner piece on
// (0, 1] is compensated, the tail (1, R] is not.
Complex jump_integral_1d(const std::function<double(double)>& density, double xi, double trunc,
                         double abs_tol, double rel_tol, int max_segments) {
  if (xi == 0.0) return {0.0, 0.0};
  Complex inner = integrate_gk(
      [&](double z) { return compensated(xi * z) * density(z); }, 0.0, 1.0, abs_tol, rel_tol,
      max_segments).value;
  Complex outer = integrate_gk(
      [&](double z) { return one_minus_exp(xi * z) * density(z); }, 1.0, trunc, abs_tol,
      rel_tol, max_segments).value;
  return inner + outer;
}

}  // namespace

void validate_triplet(const LevyTriplet& t, const TripletQuadrature& quad, double tol) {
  const int d = t.dim;
  if (d != 1 && d != 2) throw ConfigError("triplet: dimension must be 1 or 2");
  if (t.drift.size() != static_cast<std::size_t>(d)) throw ConfigError("triplet: drift size mismatch");
  if (t.diffusion.size() != static_cast<std::size_t>(d) * d)
    throw ConfigError("triplet: diffusion matrix size mismatch");

  // symmetric PSD within tolerance
  if (d == 1) {
    if (t.diffusion[0] < -tol) throw ConfigError("triplet: diffusion must be >= 0");
  } else {
    double a = t.diffusion[0], b01 = t.diffusion[1], b10 = t.diffusion[2], c = t.diffusion[3];
    if (std::abs(b01 - b10) > tol * (1.0 + std::abs(b01)))
      throw ConfigError("triplet: diffusion matrix must be symmetric");
    double tr = a + c, det = a * c - b01 * b10;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    if (tr / 2.0 - disc < -tol) throw ConfigError("triplet: diffusion matrix must be PSD");
  }

  if (!t.levy_density) return;
  // (1 ^ |z|^2) integrability on the declared truncation box
  try {
    if (d == 1) {
      auto nu = [&](double z) {
        double pt[1] = {z};
        return t.levy_density(std::span<const double>(pt, 1));
      };
      double small = integrate_gk_real([&](double z) { return z * z * (nu(z) + nu(-z)); }, 0.0,
                                       1.0, 1e-9, 1e-8, quad.max_segments);
      double tail = integrate_gk_real([&](double z) { return nu(z) + nu(-z); }, 1.0,
                                      quad.truncation, 1e-9, 1e-8, quad.max_segments);
      if (!std::isfinite(small) || !std::isfinite(tail))
        throw ConfigError("triplet: (1 ^ |z|^2) moment is not finite");
    } else {
      const int m = quad.angular_nodes;
      for (int k = 0; k < m; ++k) {
        double theta = 2.0 * std::numbers::pi * k / m;
        double ct = std::cos(theta), st = std::sin(theta);
        auto nu_r = [&](double r) {
          double pt[2] = {r * ct, r * st};
          return t.levy_density(std::span<const double>(pt, 2)) * r;
        };
        integrate_gk_real([&](double r) { return r * r * nu_r(r); }, 0.0, 1.0, 1e-8, 1e-6,
                          quad.max_segments);
        integrate_gk_real(nu_r, 1.0, quad.truncation, 1e-8, 1e-6, quad.max_segments);
      }
    }
  } catch (const QuadratureError& e) {
    throw ConfigError(std::string("triplet: (1 ^ |z|^2) moment check did not converge: ") +
                      e.what());
  }
}

Symbol symbol_from_triplet(const LevyTriplet& t, const TripletQuadrature& quad) {
  validate_triplet(t, quad);
  LevyTriplet trip = t;  // captured by value; symbols are immutable
  TripletQuadrature q = quad;
  auto eval = [trip, q](std::span<const double> xi) -> Complex {
    const int d = trip.dim;
    // drift and diffusion
    double bdot = 0.0, quad_form = 0.0;
    for (int i = 0; i < d; ++i) {
      bdot += trip.drift[i] * xi[i];
      for (int j = 0; j < d; ++j) quad_form += xi[i] * trip.diffusion[i * d + j] * xi[j];
    }
    Complex value(quad_form, -bdot);
    if (!trip.levy_density) return value;

    if (d == 1) {
      double x = xi[0];
      auto pos = [&](double z) {
        double pt[1] = {z};
        return trip.levy_density(std::span<const double>(pt, 1));
      };
      auto neg = [&](double z) {
        double pt[1] = {-z};
        return trip.levy_density(std::span<const double>(pt, 1));
      };
      value += jump_integral_1d(pos, x, q.truncation, q.abs_tol, q.rel_tol, q.max_segments);
      value += jump_integral_1d(neg, -x, q.truncation, q.abs_tol, q.rel_tol, q.max_segments);
      return value;
    }

    // d = 2: polar coordinates; each ray is a one-dimensional jump integral
    // with effective frequency xi . (cos, sin) and density nu(r ray) * r.
    const int m = q.angular_nodes;
    const double w = 2.0 * std::numbers::pi / m;
    Complex jump(0.0, 0.0);
    for (int k = 0; k < m; ++k) {
      double theta = w * k;
      double ct = std::cos(theta), st = std::sin(theta);
      double rho = xi[0] * ct + xi[1] * st;
      auto nu_r = [&](double r) {
        double pt[2] = {r * ct, r * st};
        return trip.levy_density(std::span<const double>(pt, 2)) * r;
      };
      jump += w * jump_integral_1d(nu_r, rho, q.truncation, q.abs_tol / m, q.rel_tol,
                                   q.max_segments);
    }
    return value + jump;
  };
  return make_symbol(SymbolKind::quadrature, t.dim, t.declared_order, std::move(eval),
                     t.name.empty() ? "triplet" : t.name, "");
}

// --- triplet catalog -----------------------------------------------------------

LevyTriplet triplet_gaussian(int dim) {
  LevyTriplet t;
  t.dim = dim;
  t.drift.assign(dim, 0.0);
  t.diffusion.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) t.diffusion[i * dim + i] = 1.0;
  t.declared_order = 2.0;
  t.name = "gaussian";
  return t;
}

LevyTriplet triplet_symmetric_stable(double alpha) {
  check_order(alpha, "triplet_symmetric_stable");
  LevyTriplet t;
  t.dim = 1;
  t.drift = {0.0};
  t.diffusion = {0.0};
  t.levy_density = [alpha](std::span<const double> z) {
    return std::pow(std::abs(z[0]), -1.0 - alpha);
  };
  t.declared_order = alpha;
  t.name = "stable_symmetric";
  return t;
}

LevyTriplet triplet_one_sided_stable(double alpha, int side) {
  check_order(alpha, "triplet_one_sided_stable");
  if (side != 1 && side != -1) throw ConfigError("triplet_one_sided_stable: side must be +1/-1");
  LevyTriplet t;
  t.dim = 1;
  t.drift = {0.0};
  t.diffusion = {0.0};
  t.levy_density = [alpha, side](std::span<const double> z) {
    double v = side > 0 ? z[0] : -z[0];
    return v > 0.0 ? std::pow(v, -1.0 - alpha) : 0.0;
  };
  t.declared_order = alpha;
  t.name = "stable_one_sided";
  return t;
}

LevyTriplet triplet_cgmy(double c, double g, double m, double y) {
  if (!(c > 0.0 && g > 0.0 && m > 0.0)) throw ConfigError("triplet_cgmy: C, G, M must be positive");
  check_order(y, "triplet_cgmy");
  LevyTriplet t;
  t.dim = 1;
  t.drift = {0.0};
  t.diffusion = {0.0};
  t.levy_density = [c, g, m, y](std::span<const double> zv) {
    double z = zv[0];
    if (z > 0.0) return c * std::exp(-m * z) * std::pow(z, -1.0 - y);
    return c * std::exp(g * z) * std::pow(-z, -1.0 - y);
  };
  t.declared_order = y;
  t.name = "cgmy_density";
  return t;
}

}  // namespace lhj
