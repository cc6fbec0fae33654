#pragma once

#include <vector>

#include "mixfht/common.hpp"
#include "mixfht/rng.hpp"

namespace mixfht::fht {

// First-hitting-time distribution of driftless Brownian motion started at x0,
// reflected at the upper barrier kappa and absorbed at the lower barrier nu,
// with volatility sigma. All four values are on the process scale.
struct FhtParams {
  double x0;
  double nu;
  double kappa;
  double sigma;
};

// Truncation policy for the eigenseries. The series is summed until the last
// two terms are both within `tolerance` of the running sum in magnitude (and
// at least min_terms were taken), or until max_terms, which raises SeriesError
// rather than silently returning a biased value.
struct SeriesConfig {
  double tolerance = 1e-10;
  int max_terms = 10000;
  int min_terms = 3;
};

// Throws DomainError unless nu < kappa, nu <= x0 <= kappa, sigma > 0, all finite.
void validate(const FhtParams& p);

// Decay rate of eigenterm n (n >= 1).
double lambda_n(int n, const FhtParams& p);
// Series coefficient of eigenterm n; the coefficients sum to 1.
double coef_n(int n, const FhtParams& p);

// Caches the coefficient sequence for one parameter set so repeated
// evaluations at different times share the cosine work.
class SeriesEvaluator {
 public:
  SeriesEvaluator(const FhtParams& p, const SeriesConfig& cfg);

  double pdf(double t) const;
  double cdf(double t) const;
  // 1 - cdf, clamped to [0,1].
  double survival(double t) const;
  double log_pdf(double t) const;
  double log_survival(double t) const;

  double lambda1() const { return lam1_; }
  bool degenerate() const { return degenerate_; }

 private:
  double series_sum(double t, bool weight_lambda) const;
  double coef(int n) const;
  // True when the hitting probability by time t is provably below the double
  // underflow range, where the eigenseries converges too slowly to be summed.
  bool tail_negligible(double t) const;

  FhtParams p_;
  SeriesConfig cfg_;
  double lam1_;
  double angle_;  // pi (kappa - x0) / (2 (kappa - nu))
  bool degenerate_;
  mutable std::vector<double> c_;
};

double pdf(double t, const FhtParams& p, const SeriesConfig& cfg = {});
double cdf(double t, const FhtParams& p, const SeriesConfig& cfg = {});
double survival(double t, const FhtParams& p, const SeriesConfig& cfg = {});
double log_pdf(double t, const FhtParams& p, const SeriesConfig& cfg = {});
double log_survival(double t, const FhtParams& p, const SeriesConfig& cfg = {});

// Smallest t with cdf(t) >= q, located by bracketed bisection; the returned
// point satisfies |cdf(t) - q| <= 1e-10 whenever the series tolerance allows.
double quantile(double q, const FhtParams& p, const SeriesConfig& cfg = {});

enum class SampleMethod {
  inverse,    // inverse transform through quantile()
  rejection,  // Exp(lambda_1) envelope; falls back to inverse when the
              // envelope constant exceeds 50
};

double sample(Rng& rng, const FhtParams& p, const SeriesConfig& cfg = {},
              SampleMethod method = SampleMethod::inverse);

// Envelope constant used by the rejection path (exposed for tests).
double rejection_envelope(const FhtParams& p, const SeriesConfig& cfg = {});

}  // namespace mixfht::fht
