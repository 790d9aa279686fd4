#include "lhj/heatkernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>

#include "lhj/csv.hpp"
#include "lhj/errors.hpp"
#include "lhj/field_io.hpp"

namespace lhj {

namespace {

// Minimal real part of psi over the highest-frequency shell of the lattice
// (in 2-D: any axis at the Nyquist index).
double min_edge_dissipation(const Symbol& s, const PeriodicGrid& g) {
  double best = std::numeric_limits<double>::infinity();
  if (g.dim == 1) {
    double xi = g.frequency(g.n / 2);
    best = s.eval(std::span<const double>(&xi, 1)).real();
  } else {
    double edge = g.frequency(g.n / 2);
    for (int k = 0; k < g.n; ++k) {
      double other = g.frequency(k);
      double a[2] = {edge, other};
      double b[2] = {other, edge};
      best = std::min(best, s.eval(std::span<const double>(a, 2)).real());
      best = std::min(best, s.eval(std::span<const double>(b, 2)).real());
    }
  }
  return best;
}

void check_resolved(const Symbol& s, double t, const PeriodicGrid& g, double guard) {
  if (!(t > 0.0)) throw Error("kernel: time must be positive");
  double t_min = resolution_floor(s, g, guard);
  if (t < t_min)
    throw UnderResolvedError(
        "kernel: t = " + format_sci(t) + " is below the resolution floor " + format_sci(t_min) +
            " of this grid (spectral tail above " + format_sci(guard) + ")",
        t_min);
}

std::vector<Complex> kernel_coefficients(const Symbol& s, double t, const PeriodicGrid& g,
                                         bool adjoint) {
  std::vector<Complex> coeffs(g.size());
  const double scale = 1.0 / (g.dim == 1 ? g.period : g.period * g.period);
  double xi[2];
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    g.frequency_vector(i, std::span<double>(xi, g.dim));
    Complex psi = s.eval(std::span<const double>(xi, g.dim));
    if (adjoint) psi = std::conj(psi);
    coeffs[i] = std::exp(-t * psi) * scale;
  }
  // Nyquist rows have no conjugate partner; keep only their real part.
  if (g.dim == 1) {
    coeffs[g.n / 2] = Complex(coeffs[g.n / 2].real(), 0.0);
  } else {
    for (int k = 0; k < g.n; ++k) {
      std::size_t a = static_cast<std::size_t>(g.n / 2) * g.n + k;
      std::size_t b = static_cast<std::size_t>(k) * g.n + g.n / 2;
      coeffs[a] = Complex(coeffs[a].real(), 0.0);
      coeffs[b] = Complex(coeffs[b].real(), 0.0);
    }
  }
  return coeffs;
}

struct CacheKey {
  std::uint64_t symbol_id;
  std::uint64_t t_bits;
  int dim, n;
  std::uint64_t period_bits;
  bool adjoint;
  auto operator<=>(const CacheKey&) const = default;
};

CacheKey make_key(const Symbol& s, double t, const PeriodicGrid& g, bool adjoint) {
  return CacheKey{s.id, std::bit_cast<std::uint64_t>(t), g.dim, g.n,
                  std::bit_cast<std::uint64_t>(g.period), adjoint};
}

std::mutex g_cache_mutex;
std::map<CacheKey, std::shared_ptr<const std::vector<Complex>>> g_multiplier_cache;
std::map<CacheKey, std::shared_ptr<const Field>> g_field_cache;

std::filesystem::path disk_cache_path(const Symbol& s, double t, const PeriodicGrid& g,
                                      bool adjoint) {
  const char* dir = std::getenv("LHJ_CACHE_DIR");
  if (!dir || s.cache_key.empty()) return {};
  std::string key = s.cache_key + "|t=" + format_sci(t) + "|d=" + std::to_string(g.dim) +
                    "|n=" + std::to_string(g.n) + "|L=" + format_sci(g.period) +
                    (adjoint ? "|adj" : "");
  // FNV-1a
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::filesystem::path(dir) / (std::string("kernel_") + buf + ".lhj");
}

}  // namespace

double resolution_floor(const Symbol& s, const PeriodicGrid& g, double guard) {
  double diss = min_edge_dissipation(s, g);
  if (!(diss > 0.0)) return std::numeric_limits<double>::infinity();
  return std::log(1.0 / guard) / diss;
}

std::shared_ptr<const std::vector<Complex>> KernelCache::semigroup_multiplier(
    const Symbol& s, double t, const PeriodicGrid& g) {
  CacheKey key = make_key(s, t, g, false);
  {
    std::scoped_lock lock(g_cache_mutex);
    auto it = g_multiplier_cache.find(key);
    if (it != g_multiplier_cache.end()) return it->second;
  }
  auto mult = std::make_shared<std::vector<Complex>>(multiplier_on_grid(
      g, [&s, t](std::span<const double> xi) { return std::exp(-t * s.eval(xi)); }));
  std::scoped_lock lock(g_cache_mutex);
  auto [it, _] = g_multiplier_cache.emplace(key, std::move(mult));
  return it->second;
}

std::shared_ptr<const Field> KernelCache::kernel_field(const Symbol& s, double t,
                                                       const PeriodicGrid& g, bool adjoint,
                                                       double guard) {
  CacheKey key = make_key(s, t, g, adjoint);
  {
    std::scoped_lock lock(g_cache_mutex);
    auto it = g_field_cache.find(key);
    if (it != g_field_cache.end()) return it->second;
  }
  check_resolved(s, t, g, guard);

  std::filesystem::path disk = disk_cache_path(s, t, g, adjoint);
  if (!disk.empty() && std::filesystem::exists(disk)) {
    auto snap = read_snapshot(disk);
    if (snap.field.grid == g) {
      auto cached = std::make_shared<const Field>(std::move(snap.field));
      std::scoped_lock lock(g_cache_mutex);
      auto [it, _] = g_field_cache.emplace(key, cached);
      return it->second;
    }
  }

  Field k = inverse_transform(g, kernel_coefficients(s, t, g, adjoint));
  double mass = 0.0;
  for (double v : k.values) mass += v;
  mass *= g.cell_volume();
  if (std::abs(mass - 1.0) > 1e-8)
    throw Error("kernel: discrete mass deviates from 1 by " + format_sci(mass - 1.0));

  if (!disk.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(disk.parent_path(), ec);
    if (!ec) write_snapshot(disk, k, t);
  }
  auto cached = std::make_shared<const Field>(std::move(k));
  std::scoped_lock lock(g_cache_mutex);
  auto [it, _] = g_field_cache.emplace(key, cached);
  return it->second;
}

void KernelCache::clear() {
  std::scoped_lock lock(g_cache_mutex);
  g_multiplier_cache.clear();
  g_field_cache.clear();
}

Field kernel(const Symbol& s, double t, const PeriodicGrid& g, bool adjoint, double guard) {
  return *KernelCache::kernel_field(s, t, g, adjoint, guard);
}

Field kernel_convolve(const Symbol& s, double t, const Field& u) {
  if (t < 0.0) throw Error("kernel_convolve: time must be nonnegative");
  if (t == 0.0) return u;
  auto mult = KernelCache::semigroup_multiplier(s, t, u.grid);
  return apply_multiplier(u, std::span<const Complex>(mult->data(), mult->size()));
}

double l1_derivative_norm(const Symbol& s, double t, const PeriodicGrid& g,
                          std::span<const int> beta, double guard) {
  if (beta.size() != static_cast<std::size_t>(g.dim))
    throw Error("l1_derivative_norm: beta size must match dimension");
  check_resolved(s, t, g, guard);
  std::vector<Complex> coeffs = kernel_coefficients(s, t, g, false);
  double xi[2];
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    g.frequency_vector(i, std::span<double>(xi, g.dim));
    Complex factor(1.0, 0.0);
    for (int a = 0; a < g.dim; ++a)
      for (int b = 0; b < beta[a]; ++b) factor *= Complex(0.0, xi[a]);
    coeffs[i] *= factor;
  }
  // Re-project Nyquist rows (odd derivative factors reintroduce an imaginary part).
  if (g.dim == 1) {
    coeffs[g.n / 2] = Complex(coeffs[g.n / 2].real(), 0.0);
  } else {
    for (int k = 0; k < g.n; ++k) {
      std::size_t a = static_cast<std::size_t>(g.n / 2) * g.n + k;
      std::size_t b = static_cast<std::size_t>(k) * g.n + g.n / 2;
      coeffs[a] = Complex(coeffs[a].real(), 0.0);
      coeffs[b] = Complex(coeffs[b].real(), 0.0);
    }
  }
  return l1_norm(inverse_transform(g, coeffs));
}

double seam_fraction(const Field& f) {
  const PeriodicGrid& g = f.grid;
  const int n = g.n;
  auto near_seam = [n](int idx) {
    int dist = std::min(std::abs(idx - n / 2), std::abs(idx - n / 2 + 1));
    return dist <= 1;  // two-cell band around the antipode of the origin
  };
  double total = 0.0, seam = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double v = std::abs(f.values[i]);
    total += v;
    bool hit = false;
    if (g.dim == 1) {
      hit = near_seam(static_cast<int>(i));
    } else {
      hit = near_seam(static_cast<int>(i / static_cast<std::size_t>(n))) ||
            near_seam(static_cast<int>(i % static_cast<std::size_t>(n)));
    }
    if (hit) seam += v;
  }
  return total > 0.0 ? seam / total : 0.0;
}

std::vector<double> geometric_times(double lo, double hi, int per_decade) {
  if (!(lo > 0.0 && hi > lo)) throw Error("geometric_times: need 0 < lo < hi");
  int count = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return out;
}

namespace {

struct LineFit {
  double slope, intercept, rms;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - slope * x[i] - intercept;
    ss += r * r;
  }
  return {slope, intercept, std::sqrt(ss / n)};
}

int total_order(const std::vector<int>& beta) {
  int s = 0;
  for (int b : beta) s += b;
  return s;
}

}  // namespace

KernelAudit audit_order(const Symbol& s, const PeriodicGrid& g, std::span<const double> times,
                        std::span<const std::vector<int>> betas, const KernelAuditOptions& opts) {
  KernelAudit audit;
  audit.symbol_name = s.name;
  audit.claimed_order = s.order;
  audit.seam_ok = true;
  audit.inconclusive = false;

  double t_floor = resolution_floor(s, g, opts.guard);
  std::vector<double> resolved;
  for (double t : times)
    if (t >= t_floor) resolved.push_back(t);
  std::sort(resolved.begin(), resolved.end());
  if (resolved.size() < 2)
    throw UnderResolvedError("audit_order: no resolved sample times on this grid (floor " +
                                 format_sci(t_floor) + ")",
                             t_floor);
  double decades = std::log10(resolved.back() / resolved.front());
  if (static_cast<double>(resolved.size()) < 4.0 * decades - 1e-9)
    throw Error("audit_order: need at least 4 resolved times per decade, have " +
                std::to_string(resolved.size()) + " over " + format_sci(decades) + " decades");

  audit.alpha_hat = std::numeric_limits<double>::infinity();
  for (const auto& beta : betas) {
    int order = total_order(beta);
    if (order < 1 || order > 2) throw Error("audit_order: |beta| must be 1 or 2");
    std::vector<double> log_t, log_norm;
    for (double t : resolved) {
      double norm = l1_derivative_norm(s, t, g, beta, opts.guard);
      // seam metric reported on the plain kernel at the same time
      double seam = seam_fraction(kernel(s, t, g, false, opts.guard));
      audit.rows.push_back({t, beta, norm, seam});
      if (seam > opts.seam_threshold) audit.seam_ok = false;
      log_t.push_back(std::log(t));
      log_norm.push_back(std::log(norm));
    }
    LineFit fit = fit_line(log_t, log_norm);
    double alpha_hat = order / (-fit.slope);
    audit.fits.push_back({beta, fit.slope, fit.intercept, fit.rms, alpha_hat});
    if (fit.rms > opts.residual_threshold) audit.inconclusive = true;
    audit.alpha_hat = std::min(audit.alpha_hat, alpha_hat);
  }

  if (audit.inconclusive) {
    audit.pass = false;
    audit.message = "INCONCLUSIVE: regression residual above threshold";
  } else {
    audit.pass = std::abs(audit.alpha_hat - audit.claimed_order) <=
                 opts.pass_rel_tol * audit.claimed_order;
    audit.message = audit.pass ? "PASS" : "FAIL";
  }
  return audit;
}

}  // namespace lhj
