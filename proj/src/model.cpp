#include "mixfht/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixfht/stats.hpp"

namespace mixfht::model {

void validate_spec(const ModelSpec& spec) {
  if (!(spec.nu < spec.x0)) {
    throw DomainError("model: need nu < x0 (start above the absorbing barrier)");
  }
  if (!(spec.prior.var_alpha > 0.0) || !(spec.prior.var_beta > 0.0) ||
      !(spec.prior.ig_shape > 0.0) || !(spec.prior.ig_scale > 0.0)) {
    throw DomainError("model: prior hyperparameters must be positive");
  }
  if (static_cast<int>(spec.prior.xi.size()) != spec.n_components() &&
      !(spec.variant == Variant::cs_n)) {
    throw ShapeError("model: Dirichlet weight dimension must match components");
  }
  for (double x : spec.prior.xi) {
    if (!(x > 0.0)) throw DomainError("model: Dirichlet weights must be positive");
  }
}

void validate_data(const Dataset& data, const ModelSpec& spec) {
  if (data.empty()) return;  // prior-only runs are legal
  std::size_t p = data.front().x.size();
  for (const auto& subj : data) {
    if (subj.x.size() != p) {
      throw ShapeError("data: covariate dimension differs for subject " + subj.id);
    }
    if (subj.x.empty() || subj.x[0] != 1.0) {
      throw ShapeError("data: covariate vector must start with 1 for subject " +
                       subj.id);
    }
    if (subj.t.empty() || subj.t.size() != subj.event.size()) {
      throw ShapeError("data: empty or ragged records for subject " + subj.id);
    }
    for (std::size_t j = 0; j < subj.t.size(); ++j) {
      double t = subj.t[j];
      if (!std::isfinite(t) || t < 0.0) {
        throw DomainError("data: negative or non-finite gap time for subject " +
                          subj.id);
      }
      if (spec.mode == LikelihoodMode::continuous && subj.event[j] && t <= 0.0) {
        throw DomainError(
            "data: continuous likelihood needs positive event gap times "
            "(subject " + subj.id + ")");
      }
      bool last = (j + 1 == subj.t.size());
      if (!last && !subj.event[j]) {
        throw DomainError("data: censored record before the last for subject " +
                          subj.id);
      }
      if (last && subj.event[j]) {
        throw DomainError("data: last record must be censored for subject " +
                          subj.id);
      }
    }
  }
}

void validate_state(const ParamState& s, const ModelSpec& spec,
                    std::size_t n_subjects, std::size_t n_coef) {
  const int K = spec.n_components();
  if (s.alpha.size() != n_coef) throw ShapeError("state: alpha dimension");
  if (s.beta.size() != static_cast<std::size_t>(K)) {
    throw ShapeError("state: beta must have one row per component");
  }
  for (const auto& b : s.beta) {
    if (b.size() != n_coef) throw ShapeError("state: beta dimension");
  }
  if (s.rho.size() != static_cast<std::size_t>(K)) {
    throw ShapeError("state: rho dimension");
  }
  double sum = 0.0;
  for (double r : s.rho) {
    if (!(r >= 0.0)) throw DomainError("state: rho must be nonnegative");
    sum += r;
  }
  if (std::fabs(sum - 1.0) > 1e-8) throw DomainError("state: rho must sum to 1");
  if (s.theta1.size() != static_cast<std::size_t>(K)) {
    throw ShapeError("state: theta1 dimension");
  }
  for (double t : s.theta1) {
    if (!(t > 0.0)) throw DomainError("state: theta1 must be positive");
  }
  if (!(s.theta2 > 0.0)) throw DomainError("state: theta2 must be positive");
  if (s.z1.size() != n_subjects || s.z2.size() != n_subjects ||
      s.m.size() != n_subjects) {
    throw ShapeError("state: latent dimensions must match the data");
  }
  for (int mi : s.m) {
    if (mi < 0 || mi >= K) throw DomainError("state: membership out of range");
  }
  if (K == 2 && !(s.beta[0][0] <= s.beta[1][0])) {
    throw OrderingError("state: volatility intercepts must be ordered");
  }
  if (spec.tied_slopes()) {
    for (std::size_t l = 1; l < n_coef; ++l) {
      if (s.beta[0][l] != s.beta[1][l]) {
        throw DomainError("state: tied-slope variant requires equal slopes");
      }
    }
  }
  if (spec.tied_theta() && s.theta1[0] != s.theta1[1]) {
    throw DomainError("state: tied-variance variant requires equal theta1");
  }
}

ParamState default_init(const ModelSpec& spec, const Dataset& data, Rng& rng) {
  const int K = spec.n_components();
  std::size_t p = data.empty() ? 1 : data.front().x.size();

  // Start the barrier two reflection gaps above the start point; a barrier
  // near the start makes the no-event subjects expensive and pushes chains
  // into a degenerate zero-volatility mode before the barrier can adjust.
  // Volatilities are then chosen so each component's implied mean gap,
  // gap*(2*(kappa-x0)+gap)/sigma^2, matches an observed time scale: the
  // median event gap for the fast component, twice the median follow-up for
  // the slow one.
  const double gap = spec.x0 - spec.nu;
  const double disp = 5.0 * gap * gap;
  auto median_of = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  std::vector<double> ev, totals;
  for (const auto& r : data) {
    double tot = 0.0;
    for (std::size_t j = 0; j < r.t.size(); ++j) {
      tot += r.t[j];
      if (r.event[j] == 1) ev.push_back(std::max(r.t[j], 0.5));
    }
    totals.push_back(tot);
  }
  const double fast = ev.empty() ? disp : median_of(ev);
  const double slow = std::max(totals.empty() ? 0.0 : 2.0 * median_of(totals),
                               4.0 * fast);

  ParamState s;
  s.alpha.assign(p, 0.0);
  s.alpha[0] = std::log(2.0 * gap);
  s.beta.assign(K, std::vector<double>(p, 0.0));
  s.beta[std::size_t(K) - 1][0] = 0.5 * std::log(disp / fast);
  if (K == 2) s.beta[0][0] = 0.5 * std::log(disp / slow);
  if (K == 2) {
    double xs = spec.prior.xi[0] + spec.prior.xi[1];
    s.rho = {spec.prior.xi[0] / xs, spec.prior.xi[1] / xs};
  } else {
    s.rho = {1.0};
  }
  s.theta1.assign(K, 0.5);
  s.theta2 = 0.5;
  s.z1.assign(data.size(), {0.0, 0.0});
  s.z2.assign(data.size(), 0.0);
  s.m.assign(data.size(), 0);
  if (K == 2) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      s.m[i] = (rng.uniform01() < s.rho[0]) ? 0 : 1;
    }
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double link_sigma(const ParamState& s, const SubjectRecord& subj, int i, int k) {
  return std::exp(dot(subj.x, s.beta[k]) + s.z1[i][k]);
}

double link_kappa(const ParamState& s, const ModelSpec& spec,
                  const SubjectRecord& subj, int i) {
  return spec.x0 + std::exp(dot(subj.x, s.alpha) + s.z2[i]);
}

LogLik subject_loglik_at(const ModelSpec& spec, const SubjectRecord& subj,
                         double kappa, double sigma) {
  fht::FhtParams p{spec.x0, spec.nu, kappa, sigma};
  fht::SeriesEvaluator ev(p, spec.series);
  LogLik total;
  if (spec.mode == LikelihoodMode::continuous) {
    for (std::size_t j = 0; j < subj.t.size(); ++j) {
      if (subj.event[j]) {
        total += ev.log_pdf(subj.t[j]);
      } else {
        double surv = ev.survival(subj.t[j]);
        if (surv <= 0.0) return LogLik::zero();
        total += std::log(surv);
      }
      if (total.is_zero()) return total;
    }
  } else {
    for (std::size_t j = 0; j < subj.t.size(); ++j) {
      double t = subj.t[j];
      if (subj.event[j]) {
        // Mass of the rounding interval; the lower limit is clamped so
        // same-day events (t = 0) use [0, 0.5).
        double mass = ev.cdf(t + 0.5) - ev.cdf(std::max(t - 0.5, 0.0));
        total += std::log(std::max(mass, kLogFloor));
      } else {
        double surv = ev.survival(t + 0.5);
        if (surv <= 0.0) return LogLik::zero();
        total += std::log(surv);
      }
    }
  }
  return total;
}

LogLik subject_cond_loglik(const ParamState& s, const ModelSpec& spec,
                           const SubjectRecord& subj, int i, int k) {
  return subject_loglik_at(spec, subj, link_kappa(s, spec, subj, i),
                           link_sigma(s, subj, i, k));
}

double mixture_pdf(double t, double x0, double nu, double kappa,
                   std::span<const double> sigma, std::span<const double> rho,
                   const fht::SeriesConfig& cfg) {
  if (sigma.size() != rho.size() || sigma.empty()) {
    throw ShapeError("mixture_pdf: component dimension mismatch");
  }
  double out = 0.0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    out += rho[k] * fht::pdf(t, {x0, nu, kappa, sigma[k]}, cfg);
  }
  return out;
}

ObsLogLik observed_loglik_eps(const ParamState& s, const ModelSpec& spec,
                              const SubjectRecord& subj,
                              std::span<const double> eps1,
                              std::span<const double> eps2) {
  const int K = spec.n_components();
  const int S = static_cast<int>(eps2.size());
  if (eps1.size() != static_cast<std::size_t>(K) * S || S == 0) {
    throw ShapeError("observed_loglik: draw panel dimensions");
  }
  const double xb_alpha = dot(subj.x, s.alpha);
  const double sd2 = std::sqrt(s.theta2);
  ObsLogLik out;
  std::vector<double> comp(K);
  std::vector<double> ll(S);
  for (int k = 0; k < K; ++k) {
    const double xb_beta = dot(subj.x, s.beta[k]);
    const double sd1 = std::sqrt(s.theta1[k]);
    for (int sidx = 0; sidx < S; ++sidx) {
      double kappa = spec.x0 + std::exp(xb_alpha + sd2 * eps2[sidx]);
      double sigma = std::exp(xb_beta + sd1 * eps1[k * S + sidx]);
      LogLik l;
      try {
        l = subject_loglik_at(spec, subj, kappa, sigma);
      } catch (const SeriesError&) {
        l = LogLik::zero();  // extreme draw outside the evaluable range
      } catch (const DomainError&) {
        l = LogLik::zero();  // overflowed link (kappa or sigma not finite)
      }
      if (l.is_zero()) ++out.zero_draws;
      ll[sidx] = l.as_double();
    }
    comp[k] = std::log(s.rho[k]) + lse(ll) - std::log(double(S));
  }
  double v = lse(comp);
  out.value = std::isfinite(v) ? LogLik(v) : LogLik::zero();
  return out;
}

ObsLogLik observed_loglik_mc(const ParamState& s, const ModelSpec& spec,
                             const SubjectRecord& subj, int S, Rng& rng) {
  if (S < 1) throw DomainError("observed_loglik: need S >= 1");
  const int K = spec.n_components();
  std::vector<double> eps1(static_cast<std::size_t>(K) * S);
  std::vector<double> eps2(S);
  for (auto& e : eps1) e = rng.normal();
  for (auto& e : eps2) e = rng.normal();
  return observed_loglik_eps(s, spec, subj, eps1, eps2);
}

LogLik joint_log_posterior(const ParamState& s, const ModelSpec& spec,
                           const Dataset& data) {
  validate_spec(spec);
  std::size_t p = data.empty() ? s.alpha.size() : data.front().x.size();
  validate_state(s, spec, data.size(), p);
  const int K = spec.n_components();
  LogLik total;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += subject_cond_loglik(s, spec, data[i], static_cast<int>(i), s.m[i]);
    if (total.is_zero()) return total;
    for (int k = 0; k < K; ++k) {
      total += log_normal_pdf(s.z1[i][k], 0.0, s.theta1[k]);
    }
    total += log_normal_pdf(s.z2[i], 0.0, s.theta2);
    total += std::log(s.rho[s.m[i]]);
  }
  for (double a : s.alpha) total += log_normal_pdf(a, 0.0, spec.prior.var_alpha);
  for (int k = 0; k < K; ++k) {
    for (double b : s.beta[k]) {
      total += log_normal_pdf(b, 0.0, spec.prior.var_beta);
    }
    total += log_inv_gamma_pdf(s.theta1[k], spec.prior.ig_shape,
                               spec.prior.ig_scale);
  }
  total += log_inv_gamma_pdf(s.theta2, spec.prior.ig_shape, spec.prior.ig_scale);
  if (K == 2) total += log_dirichlet_pdf(s.rho, spec.prior.xi);
  return total;
}

std::vector<std::string> parameter_names(const ModelSpec& spec,
                                         std::size_t n_coef) {
  const int K = spec.n_components();
  std::vector<std::string> names;
  for (std::size_t l = 0; l < n_coef; ++l) {
    names.push_back("alpha[" + std::to_string(l) + "]");
  }
  for (int k = 0; k < K; ++k) {
    for (std::size_t l = 0; l < n_coef; ++l) {
      names.push_back("beta" + std::to_string(k + 1) + "[" + std::to_string(l) +
                      "]");
    }
  }
  for (int k = 0; k < K; ++k) {
    names.push_back("rho[" + std::to_string(k + 1) + "]");
  }
  for (int k = 0; k < K; ++k) {
    names.push_back("theta1[" + std::to_string(k + 1) + "]");
  }
  names.push_back("theta2");
  return names;
}

std::vector<double> flatten(const ParamState& s, const ModelSpec& spec) {
  std::vector<double> out;
  out.insert(out.end(), s.alpha.begin(), s.alpha.end());
  for (const auto& b : s.beta) out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), s.rho.begin(), s.rho.end());
  out.insert(out.end(), s.theta1.begin(), s.theta1.end());
  out.push_back(s.theta2);
  (void)spec;
  return out;
}

}  // namespace mixfht::model
