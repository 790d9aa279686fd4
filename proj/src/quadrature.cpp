#include "lhj/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "lhj/errors.hpp"

namespace lhj {

namespace {

using Complex = std::complex<double>;

// Kronrod-15 abscissae on [-1,1] (odd entries are the embedded Gauss-7 nodes).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  Complex value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment eval_segment(const std::function<Complex(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  Complex fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);

  Complex kronrod = kWgk[7] * fv[7];
  for (int i = 0; i < 7; ++i) kronrod += kWgk[i] * (fv[i] + fv[14 - i]);
  Complex gauss = kWg[3] * fv[7];
  for (int i = 0; i < 3; ++i) gauss += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);

  kronrod *= h;
  gauss *= h;
  double err = std::abs(kronrod - gauss);
  // the usual sharpened estimate
  err = std::pow(200.0 * err, 1.5);
  if (err > std::abs(kronrod - gauss)) err = std::abs(kronrod - gauss);
  err = std::max(err, 1e-300);
  return Segment{a, b, kronrod, err};
}

}  // namespace

QuadResult integrate_gk(const std::function<Complex(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int max_segments) {
  if (a == b) return {Complex(0.0), 0.0, 0};
  std::priority_queue<Segment> queue;
  queue.push(eval_segment(f, a, b));
  Complex total = queue.top().value;
  double total_err = queue.top().error;
  std::size_t count = 1;

  while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
         count < static_cast<std::size_t>(max_segments)) {
    Segment worst = queue.top();
    queue.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) {  // interval exhausted in doubles
      queue.push(worst);
      break;
    }
    Segment left = eval_segment(f, worst.a, mid);
    Segment right = eval_segment(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }

  if (total_err > std::max(abs_tol, rel_tol * std::abs(total)) * 10.0)
    throw QuadratureError("adaptive quadrature did not converge; achieved error estimate " +
                              std::to_string(total_err),
                          total_err);
  return {total, total_err, count};
}

double integrate_gk_real(const std::function<double(double)>& f, double a, double b,
                         double abs_tol, double rel_tol, int max_segments) {
  auto wrapped = [&f](double x) { return Complex(f(x), 0.0); };
  return integrate_gk(wrapped, a, b, abs_tol, rel_tol, max_segments).value.real();
}

}  // namespace lhj
