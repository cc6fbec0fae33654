#include "mixfht/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "mixfht/stats.hpp"

namespace mixfht::simulate {

namespace {

constexpr std::uint64_t kSaltCov = 0x20c7u;
constexpr std::uint64_t kSaltEvents = 0x20e5u;

// Safety cap: a subject whose expected gap is microscopic relative to the
// follow-up would otherwise emit unbounded records.
constexpr long kMaxRecords = 100000;

std::string subject_id(int i, int n) {
  int width = 4;
  for (long v = n; v >= 10000; v /= 10) ++width;
  std::string digits = std::to_string(i + 1);
  return "s" + std::string(std::size_t(width) - std::min(digits.size(), std::size_t(width)), '0') + digits;
}

}  // namespace

SimDesign default_design(model::Variant v, int n_subjects, std::uint64_t seed) {
  SimDesign d;
  d.n_subjects = n_subjects;
  d.variant = v;
  d.seed = seed;
  model::ParamState& t = d.truth;
  t.alpha = {2.9, 0.2, -0.1};
  t.theta2 = 0.3;
  switch (v) {
    case model::Variant::cs_c_fv:
      t.beta = {{-0.2, -0.3, -0.1}, {1.4, -0.05, -0.05}};
      t.rho = {0.4, 0.6};
      t.theta1 = {0.5, 0.1};
      break;
    case model::Variant::cs_i_fv:
      t.beta = {{-0.2, -0.05, -0.05}, {1.4, -0.05, -0.05}};
      t.rho = {0.4, 0.6};
      t.theta1 = {0.5, 0.1};
      break;
    case model::Variant::cs_i:
      t.beta = {{-0.2, -0.05, -0.05}, {1.4, -0.05, -0.05}};
      t.rho = {0.4, 0.6};
      t.theta1 = {0.1, 0.1};
      break;
    case model::Variant::cs_n:
      t.beta = {{-0.2, -0.3, -0.1}};
      t.rho = {1.0};
      t.theta1 = {0.5};
      break;
  }
  return d;
}

void validate_design(const SimDesign& d) {
  if (d.n_subjects < 1) throw ConfigError("design needs at least one subject");
  const auto& c = d.covariates;
  if (!(c.shape1 > 0.0 && c.rate1 > 0.0 && c.shape2 > 0.0 && c.rate2 > 0.0))
    throw ConfigError("gamma marginal parameters must be positive");
  if (!(c.corr > -1.0 && c.corr < 1.0))
    throw ConfigError("copula correlation must lie in (-1, 1)");
  if (!(d.followup >= 0.0) && d.followup_pool.empty())
    throw ConfigError("follow-up must be nonnegative");
  for (double f : d.followup_pool)
    if (!(f >= 0.0)) throw ConfigError("follow-up pool must be nonnegative");
  if (!(d.nu < d.x0)) throw ConfigError("threshold must lie below the start");
  const model::ParamState& t = d.truth;
  int k = (d.variant == model::Variant::cs_n) ? 1 : 2;
  if (t.alpha.empty() || int(t.beta.size()) != k || int(t.rho.size()) != k ||
      int(t.theta1.size()) != k)
    throw ConfigError("true parameter shapes do not match the variant");
  double rsum = 0.0;
  for (double r : t.rho) {
    if (!(r >= 0.0)) throw ConfigError("weights must be nonnegative");
    rsum += r;
  }
  if (std::fabs(rsum - 1.0) > 1e-8) throw ConfigError("weights must sum to one");
  for (double th : t.theta1)
    if (!(th > 0.0)) throw ConfigError("frailty variances must be positive");
  if (!(t.theta2 > 0.0)) throw ConfigError("frailty variances must be positive");
}

std::vector<std::array<double, 2>> gen_covariates_raw(const CovariateDesign& c,
                                                      int n, Rng& rng) {
  if (!(c.corr > -1.0 && c.corr < 1.0))
    throw ConfigError("copula correlation must lie in (-1, 1)");
  if (!(c.shape1 > 0.0 && c.rate1 > 0.0 && c.shape2 > 0.0 && c.rate2 > 0.0))
    throw ConfigError("gamma marginal parameters must be positive");
  std::vector<std::array<double, 2>> out(std::size_t(std::max(n, 0)));
  const double tail = std::sqrt(1.0 - c.corr * c.corr);
  for (auto& row : out) {
    double u1 = rng.normal();
    double u2 = c.corr * u1 + tail * rng.normal();
    double p1 = std::clamp(norm_cdf(u1), 1e-14, 1.0 - 1e-14);
    double p2 = std::clamp(norm_cdf(u2), 1e-14, 1.0 - 1e-14);
    row[0] = gamma_quantile(p1, c.shape1, 1.0 / c.rate1);
    row[1] = gamma_quantile(p2, c.shape2, 1.0 / c.rate2);
  }
  return out;
}

void standardize_columns(std::vector<std::array<double, 2>>& x) {
  if (x.empty()) return;
  for (int j = 0; j < 2; ++j) {
    std::vector<double> col(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) col[i] = x[i][j];
    double mu = mean_of(col);
    double sd = col.size() > 1 ? sd_of(col) : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i][j] -= mu;
      if (sd > 0.0) x[i][j] /= sd;
    }
  }
}

SubjectDraw gen_subject(const SimDesign& d, const std::vector<double>& x,
                        const std::string& id, Rng& rng) {
  const model::ParamState& t = d.truth;
  const int K = int(t.rho.size());
  if (x.size() != t.alpha.size() || x.empty() || x[0] != 1.0)
    throw ShapeError("covariate row must lead with the intercept 1");

  SubjectDraw out;
  out.rec.id = id;
  out.rec.x = x;
  out.truth.id = id;

  int m = 0;
  if (K == 2) m = (rng.uniform01() < t.rho[0]) ? 0 : 1;
  double z1 = std::sqrt(t.theta1[std::size_t(m)]) * rng.normal();
  double z2 = std::sqrt(t.theta2) * rng.normal();
  out.truth.m = m;
  out.truth.z1_active = z1;
  out.truth.z2 = z2;

  double sigma = std::exp(model::dot(x, t.beta[std::size_t(m)]) + z1);
  double kappa = d.x0 + std::exp(model::dot(x, t.alpha) + z2);
  fht::FhtParams fp{d.x0, d.nu, kappa, sigma};
  fht::validate(fp);

  double followup = d.followup;
  if (!d.followup_pool.empty()) {
    std::size_t idx = std::min(
        d.followup_pool.size() - 1,
        std::size_t(rng.uniform01() * double(d.followup_pool.size())));
    followup = d.followup_pool[idx];
  }

  auto record = [&](double gap, int event) {
    if (d.round_days) gap = std::max(0.0, std::round(gap));
    out.rec.t.push_back(gap);
    out.rec.event.push_back(event);
  };

  double cum = 0.0;
  for (long r = 0;; ++r) {
    if (r >= kMaxRecords)
      throw NumericError("subject " + id + " exceeded the record cap");
    double gap = fht::sample(rng, fp, d.series);
    if (cum + gap >= followup) {
      record(followup - cum, 0);
      break;
    }
    record(gap, 1);
    cum += gap;
  }
  return out;
}

SimResult gen_dataset(const SimDesign& d) {
  validate_design(d);
  const int n = d.n_subjects;

  std::vector<std::array<double, 2>> cov(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng r(mix_seed({d.seed, kSaltCov, std::uint64_t(i)}));
    cov[std::size_t(i)] = gen_covariates_raw(d.covariates, 1, r)[0];
  }
  standardize_columns(cov);

  SimResult res;
  res.data.reserve(std::size_t(n));
  res.truth.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    Rng r(mix_seed({d.seed, kSaltEvents, std::uint64_t(i)}));
    std::vector<double> x = {1.0, cov[std::size_t(i)][0], cov[std::size_t(i)][1]};
    if (d.truth.alpha.size() == 1) x = {1.0};  // intercept-only designs
    SubjectDraw s = gen_subject(d, x, subject_id(i, n), r);
    res.data.push_back(std::move(s.rec));
    res.truth.push_back(std::move(s.truth));
  }
  return res;
}

}  // namespace mixfht::simulate
