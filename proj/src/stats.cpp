#include "mixfht/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixfht/common.hpp"

namespace mixfht {

double lse(const double* x, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, x[i]);
  if (!std::isfinite(m)) return m;  // all -inf (or an inf/nan poisoned input)
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

double lse(const std::vector<double>& x) {
  return lse(x.data(), static_cast<int>(x.size()));
}

double log_normal_pdf(double x, double mean, double var) {
  if (!(var > 0.0)) throw DomainError("log_normal_pdf: variance must be positive");
  double d = x - mean;
  return -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
}

double log_inv_gamma_pdf(double x, double shape, double scale) {
  if (!(x > 0.0) || !(shape > 0.0) || !(scale > 0.0)) {
    throw DomainError("log_inv_gamma_pdf: arguments must be positive");
  }
  return shape * std::log(scale) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - scale / x;
}

double log_dirichlet_pdf(const std::vector<double>& p,
                         const std::vector<double>& concentration) {
  if (p.size() != concentration.size() || p.empty()) {
    throw ShapeError("log_dirichlet_pdf: dimension mismatch");
  }
  double sum_c = 0.0, out = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) throw DomainError("log_dirichlet_pdf: weights must be positive");
    sum_c += concentration[i];
    out += (concentration[i] - 1.0) * std::log(p[i]) - std::lgamma(concentration[i]);
  }
  return out + std::lgamma(sum_c);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
double norm_sf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

// Lower regularised incomplete gamma by series (x < a+1) or by the Lentz
// continued fraction for the upper tail. Classical formulation.
static double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

static double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_p_inv(double a, double p) {
  if (!(a > 0.0) || !(p >= 0.0) || !(p < 1.0)) {
    throw DomainError("gamma_p_inv: need a > 0 and p in [0,1)");
  }
  if (p == 0.0) return 0.0;
  // Wilson-Hilferty start, then guarded Newton on P(a,x) - p.
  double g = std::lgamma(a);
  double x;
  {
    double pp = std::min(p, 1.0 - 1e-12);
    double t = std::sqrt(-2.0 * std::log(pp < 0.5 ? pp : 1.0 - pp));
    double z = t - (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481));
    if (pp < 0.5) z = -z;
    double wh = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
    x = a * wh * wh * wh;
    if (!(x > 0.0)) x = 0.5 * a;
  }
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    double f = gamma_p(a, x) - p;
    if (f > 0.0) hi = x; else lo = x;
    double logpdf = (a - 1.0) * std::log(x) - x - g;
    double step = f * std::exp(-logpdf);
    double xn = x - step;
    if (!(xn > lo) || !(xn < hi) || !std::isfinite(xn)) {
      xn = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x;
    }
    if (std::fabs(xn - x) <= 1e-14 * std::max(1.0, x)) return xn;
    x = xn;
  }
  return x;
}

double gamma_quantile(double p, double shape, double scale) {
  if (!(scale > 0.0)) throw DomainError("gamma_quantile: scale must be positive");
  return scale * gamma_p_inv(shape, p);
}

double mean_of(const std::vector<double>& x) {
  if (x.empty()) throw ShapeError("mean_of: empty input");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance_of(const std::vector<double>& x) {
  if (x.size() < 2) throw ShapeError("variance_of: need at least 2 values");
  double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double sd_of(const std::vector<double>& x) { return std::sqrt(variance_of(x)); }

}  // namespace mixfht
