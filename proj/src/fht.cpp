#include "mixfht/fht.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mixfht::fht {

namespace {
constexpr double kPi = 3.14159265358979323846;
// (x0 - nu) / (sigma sqrt(t)) beyond which the hitting probability is below
// 1e-300: 2*Phi(-38) ~ 6e-317, and the barrier images only add terms that are
// smaller still, so cdf, pdf and 1 - survival all round to their limits.
constexpr double kTailArg = 38.0;
}  // namespace

void validate(const FhtParams& p) {
  if (!std::isfinite(p.x0) || !std::isfinite(p.nu) || !std::isfinite(p.kappa) ||
      !std::isfinite(p.sigma)) {
    throw DomainError("fht: parameters must be finite");
  }
  if (!(p.nu < p.kappa)) throw DomainError("fht: need nu < kappa");
  if (!(p.x0 >= p.nu) || !(p.x0 <= p.kappa)) {
    throw DomainError("fht: need nu <= x0 <= kappa");
  }
  if (!(p.sigma > 0.0)) throw DomainError("fht: need sigma > 0");
}

double lambda_n(int n, const FhtParams& p) {
  validate(p);
  if (n < 1) throw DomainError("lambda_n: n must be >= 1");
  double odd = 2.0 * n - 1.0;
  double width = p.kappa - p.nu;
  return odd * odd * p.sigma * p.sigma * kPi * kPi / (8.0 * width * width);
}

double coef_n(int n, const FhtParams& p) {
  validate(p);
  if (n < 1) throw DomainError("coef_n: n must be >= 1");
  if (p.x0 == p.nu) return 0.0;  // exact limit at the absorbing barrier
  double odd = 2.0 * n - 1.0;
  double sign = (n % 2 == 1) ? 1.0 : -1.0;
  double angle = odd * kPi * (p.kappa - p.x0) / (2.0 * (p.kappa - p.nu));
  return sign * 4.0 / (odd * kPi) * std::cos(angle);
}

SeriesEvaluator::SeriesEvaluator(const FhtParams& p, const SeriesConfig& cfg)
    : p_(p), cfg_(cfg) {
  validate(p);
  if (!(cfg.tolerance >= 0.0) || !(cfg.tolerance < 1.0)) {
    throw DomainError("fht: series tolerance must lie in [0,1)");
  }
  if (cfg.max_terms < cfg.min_terms || cfg.min_terms < 1) {
    throw DomainError("fht: bad series term limits");
  }
  double width = p.kappa - p.nu;
  lam1_ = p.sigma * p.sigma * kPi * kPi / (8.0 * width * width);
  angle_ = kPi * (p.kappa - p.x0) / (2.0 * width);
  degenerate_ = (p.x0 == p.nu);
  c_.reserve(32);
}

double SeriesEvaluator::coef(int n) const {
  while (static_cast<int>(c_.size()) < n) {
    int k = static_cast<int>(c_.size()) + 1;
    double odd = 2.0 * k - 1.0;
    double sign = (k % 2 == 1) ? 1.0 : -1.0;
    c_.push_back(sign * 4.0 / (odd * kPi) * std::cos(odd * angle_));
  }
  return c_[n - 1];
}

bool SeriesEvaluator::tail_negligible(double t) const {
  return (p_.x0 - p_.nu) >= kTailArg * p_.sigma * std::sqrt(t);
}

// Sum of c_n [lambda_n] exp(-lambda_n t). The exponentials follow the
// recurrence exp(-lambda_{n+1} t) = exp(-lambda_n t) * g_n with
// g_n = g_{n-1} * exp(-8 lambda_1 t), so the loop costs two multiplies per
// term after two exp() calls up front.
double SeriesEvaluator::series_sum(double t, bool weight_lambda) const {
  const double tol = cfg_.tolerance;
  double e = std::exp(-lam1_ * t);
  const double r = std::exp(-8.0 * lam1_ * t);
  double g = r;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= cfg_.max_terms; ++n) {
    double odd = 2.0 * n - 1.0;
    double term = coef(n) * e;
    if (weight_lambda) term *= lam1_ * odd * odd;
    sum += term;
    double bound = tol * std::fabs(sum);
    if (n >= cfg_.min_terms && std::fabs(term) <= bound &&
        std::fabs(prev) <= bound) {
      return sum;
    }
    prev = term;
    e *= g;
    g *= r;
  }
  std::ostringstream msg;
  msg << "fht: series did not converge within " << cfg_.max_terms
      << " terms (t=" << t << ", lambda1=" << lam1_ << ")";
  throw SeriesError(msg.str(), sum, cfg_.max_terms);
}

double SeriesEvaluator::pdf(double t) const {
  if (!(t > 0.0)) throw DomainError("fht pdf: need t > 0");
  if (degenerate_) return 0.0;
  if (tail_negligible(t)) return 0.0;
  return std::max(series_sum(t, true), 0.0);
}

double SeriesEvaluator::survival(double t) const {
  if (t < 0.0 || !std::isfinite(t)) throw DomainError("fht survival: need t >= 0");
  if (degenerate_) return 0.0;
  if (t == 0.0) return 1.0;
  if (tail_negligible(t)) return 1.0;
  return std::clamp(series_sum(t, false), 0.0, 1.0);
}

double SeriesEvaluator::cdf(double t) const { return 1.0 - survival(t); }

double SeriesEvaluator::log_pdf(double t) const {
  return std::log(std::max(pdf(t), kLogFloor));
}

double SeriesEvaluator::log_survival(double t) const {
  return std::log(std::max(survival(t), kLogFloor));
}

double pdf(double t, const FhtParams& p, const SeriesConfig& cfg) {
  return SeriesEvaluator(p, cfg).pdf(t);
}
double cdf(double t, const FhtParams& p, const SeriesConfig& cfg) {
  return SeriesEvaluator(p, cfg).cdf(t);
}
double survival(double t, const FhtParams& p, const SeriesConfig& cfg) {
  return SeriesEvaluator(p, cfg).survival(t);
}
double log_pdf(double t, const FhtParams& p, const SeriesConfig& cfg) {
  return SeriesEvaluator(p, cfg).log_pdf(t);
}
double log_survival(double t, const FhtParams& p, const SeriesConfig& cfg) {
  return SeriesEvaluator(p, cfg).log_survival(t);
}

double quantile(double q, const FhtParams& p, const SeriesConfig& cfg) {
  validate(p);
  if (!(q >= 0.0) || !(q < 1.0)) throw DomainError("fht quantile: need q in [0,1)");
  if (p.x0 == p.nu) throw DomainError("fht quantile: degenerate distribution");
  if (q == 0.0) return 0.0;
  SeriesEvaluator ev(p, cfg);
  double lo = 0.0;
  double hi = 8.0 / ev.lambda1();
  for (int grow = 0; ev.cdf(hi) < q; ++grow) {
    if (grow > 100) throw NumericError("fht quantile: bracket expansion failed");
    lo = hi;
    hi *= 2.0;
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // interval collapsed to adjacent doubles
    double f = ev.cdf(mid);
    if (std::fabs(f - q) <= 1e-10) return mid;
    if (f < q) lo = mid; else hi = mid;
  }
  return mid;
}

double rejection_envelope(const FhtParams& p, const SeriesConfig& cfg) {
  validate(p);
  if (p.x0 == p.nu) throw DomainError("fht envelope: degenerate distribution");
  SeriesEvaluator ev(p, cfg);
  int n_env = std::min(64, cfg.max_terms);
  double num = 0.0;
  for (int n = 1; n <= n_env; ++n) {
    double odd = 2.0 * n - 1.0;
    num += std::fabs(coef_n(n, p)) * odd * odd;
  }
  double c1 = coef_n(1, p);
  if (!(c1 > 0.0)) return std::numeric_limits<double>::infinity();
  return num / c1;  // lambda_1 cancels between numerator and proposal
}

double sample(Rng& rng, const FhtParams& p, const SeriesConfig& cfg,
              SampleMethod method) {
  validate(p);
  if (p.x0 == p.nu) throw DomainError("fht sample: degenerate distribution");
  if (method == SampleMethod::rejection) {
    double m = rejection_envelope(p, cfg);
    if (m <= 50.0) {
      SeriesEvaluator ev(p, cfg);
      double lam1 = ev.lambda1();
      // Envelope: pdf(t) <= menv * lam1 * exp(-lam1 t) with menv = m * c_1.
      double menv = m * coef_n(1, p);
      for (int it = 0; it < 100000; ++it) {
        double t = rng.exponential() / lam1;
        double u = rng.uniform01();
        double f;
        try {
          f = ev.pdf(t);
        } catch (const SeriesError&) {
          continue;  // unresolvable corner, true density negligible there
        }
        if (u * menv * lam1 * std::exp(-lam1 * t) <= f) return t;
      }
      throw NumericError("fht sample: rejection loop failed to accept");
    }
    // fall through: envelope too loose for rejection to be worthwhile
  }
  return quantile(rng.uniform01(), p, cfg);
}

}  // namespace mixfht::fht
