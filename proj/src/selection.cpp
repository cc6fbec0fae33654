#include "mixfht/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixfht/rng.hpp"
#include "mixfht/stats.hpp"

namespace mixfht::selection {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kSaltSigma = 0xe151u;
constexpr std::uint64_t kSaltBoundary = 0xe152u;

std::vector<long> pick_rows(long n_draws, long max_draws) {
  long u = (max_draws > 0 && max_draws < n_draws) ? max_draws : n_draws;
  std::vector<long> idx(u);
  for (long j = 0; j < u; ++j) idx[j] = j * n_draws / u;
  return idx;
}

}  // namespace

CrnPanel make_panel(const model::Dataset& data, int K, int S,
                    std::uint64_t seed) {
  if (S < 1) throw ConfigError("Monte Carlo sample size must be >= 1");
  if (K < 1 || K > 2) throw ConfigError("panel supports 1 or 2 components");
  CrnPanel panel;
  panel.S = S;
  panel.K = K;
  panel.eps1.resize(data.size());
  panel.eps2.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint64_t h = fnv1a64(data[i].id);
    Rng r1(mix_seed({seed, kSaltSigma, h}));
    Rng r2(mix_seed({seed, kSaltBoundary, h}));
    panel.eps1[i].resize(std::size_t(K) * S);
    for (auto& v : panel.eps1[i]) v = r1.normal();
    panel.eps2[i].resize(S);
    for (auto& v : panel.eps2[i]) v = r2.normal();
  }
  return panel;
}

double deviance(const model::ParamState& state, const model::ModelSpec& spec,
                const model::Dataset& data, const CrnPanel& panel,
                long* log_zero_count) {
  if (panel.eps1.size() != data.size())
    throw ShapeError("panel does not match the dataset");
  if (panel.K != spec.n_components())
    throw ShapeError("panel component count does not match the model");
  double total = 0.0;
  bool any_zero = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    model::ObsLogLik r = model::observed_loglik_eps(
        state, spec, data[i],
        std::span<const double>(panel.eps1[i]),
        std::span<const double>(panel.eps2[i]));
    if (r.value.is_zero()) {
      any_zero = true;
      if (log_zero_count) ++*log_zero_count;
    } else {
      total += r.value.value();
    }
  }
  if (any_zero) return std::numeric_limits<double>::infinity();
  return -2.0 * total;
}

double deviance(const model::ParamState& state, const model::ModelSpec& spec,
                const model::Dataset& data, int S, std::uint64_t seed) {
  CrnPanel panel = make_panel(data, spec.n_components(), S, seed);
  return deviance(state, spec, data, panel);
}

std::vector<std::vector<double>> obs_loglik_matrix(
    const std::vector<model::ParamState>& draws, const model::ModelSpec& spec,
    const model::Dataset& data, const CrnPanel& panel, long* log_zero_count,
    long max_draws) {
  if (draws.empty()) throw ConfigError("criteria need at least one retained draw");
  if (panel.eps1.size() != data.size())
    throw ShapeError("panel does not match the dataset");
  auto rows = pick_rows(long(draws.size()), max_draws);
  std::vector<std::vector<double>> m(rows.size(),
                                     std::vector<double>(data.size(), 0.0));
  for (std::size_t u = 0; u < rows.size(); ++u) {
    const model::ParamState& st = draws[std::size_t(rows[u])];
    for (std::size_t i = 0; i < data.size(); ++i) {
      model::ObsLogLik r = model::observed_loglik_eps(
          st, spec, data[i],
          std::span<const double>(panel.eps1[i]),
          std::span<const double>(panel.eps2[i]));
      if (r.value.is_zero()) {
        m[u][i] = kNegInf;
        if (log_zero_count) ++*log_zero_count;
      } else {
        m[u][i] = r.value.value();
      }
    }
  }
  return m;
}

model::ParamState posterior_mean_state(
    const std::vector<model::ParamState>& draws) {
  if (draws.empty()) throw ConfigError("posterior mean needs at least one draw");
  const auto& first = draws.front();
  model::ParamState mean;
  mean.alpha.assign(first.alpha.size(), 0.0);
  mean.beta.assign(first.beta.size(),
                   std::vector<double>(first.beta.front().size(), 0.0));
  mean.rho.assign(first.rho.size(), 0.0);
  mean.theta1.assign(first.theta1.size(), 0.0);
  mean.theta2 = 0.0;
  const double w = 1.0 / double(draws.size());
  for (const auto& d : draws) {
    for (std::size_t l = 0; l < mean.alpha.size(); ++l)
      mean.alpha[l] += w * d.alpha[l];
    for (std::size_t k = 0; k < mean.beta.size(); ++k)
      for (std::size_t l = 0; l < mean.beta[k].size(); ++l)
        mean.beta[k][l] += w * d.beta[k][l];
    for (std::size_t k = 0; k < mean.rho.size(); ++k)
      mean.rho[k] += w * d.rho[k];
    for (std::size_t k = 0; k < mean.theta1.size(); ++k)
      mean.theta1[k] += w * d.theta1[k];
    mean.theta2 += w * d.theta2;
  }
  double rho_sum = 0.0;
  for (double v : mean.rho) rho_sum += v;
  if (!(rho_sum > 0.0)) throw NumericError("weight draws sum to zero");
  for (double& v : mean.rho) v /= rho_sum;
  return mean;
}

CriteriaResult compute_criteria(const std::vector<model::ParamState>& draws,
                                const model::ModelSpec& spec,
                                const model::Dataset& data, int S,
                                std::uint64_t seed, long max_draws) {
  CriteriaResult res;
  res.mc_S = S;
  CrnPanel panel = make_panel(data, spec.n_components(), S, seed);
  auto m = obs_loglik_matrix(draws, spec, data, panel, &res.log_zero_count,
                             max_draws);
  const long U = long(m.size());
  const std::size_t n = data.size();
  res.draws_used = U;

  // Deviance per retained draw, then the mean; fixed reduction order.
  double mean_dev = 0.0;
  for (long u = 0; u < U; ++u) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += m[u][i];
    mean_dev += -2.0 * s / double(U);
  }
  res.mean_dev = mean_dev;
  res.dev_at_mean = deviance(posterior_mean_state(draws), spec, data, panel);
  res.p_d = res.mean_dev - res.dev_at_mean;
  res.dic = res.dev_at_mean + 2.0 * res.p_d;

  res.cpo.resize(n);
  res.log_cpo.resize(n);
  res.max_influence.resize(n);
  res.lpml = 0.0;
  std::vector<double> neg(U);
  const double log_u = std::log(double(U));
  for (std::size_t i = 0; i < n; ++i) {
    bool has_zero = false;
    double max_neg = kNegInf;
    for (long u = 0; u < U; ++u) {
      if (m[u][i] == kNegInf) {
        has_zero = true;
        break;
      }
      neg[u] = -m[u][i];
      max_neg = std::max(max_neg, neg[u]);
    }
    if (has_zero) {
      // One zero-likelihood draw dominates the harmonic mean completely.
      res.log_cpo[i] = kNegInf;
      res.cpo[i] = 0.0;
      res.max_influence[i] = 1.0;
      res.lpml = kNegInf;
      continue;
    }
    double lse_neg = lse(neg.data(), int(U));
    res.log_cpo[i] = log_u - lse_neg;
    res.cpo[i] = std::exp(res.log_cpo[i]);
    res.max_influence[i] = std::exp(max_neg - lse_neg);
    res.lpml += res.log_cpo[i];

    // Harmonic mean can never exceed the arithmetic mean; violation would
    // indicate a broken reduction.
    for (long u = 0; u < U; ++u) neg[u] = m[u][i];
    double arith = lse(neg.data(), int(U)) - log_u;
    if (res.log_cpo[i] > arith + 1e-9 + 1e-12 * std::fabs(arith))
      throw NumericError("per-subject harmonic mean exceeded the arithmetic mean");
  }
  return res;
}

DicResult compute_dic(const std::vector<model::ParamState>& draws,
                      const model::ModelSpec& spec, const model::Dataset& data,
                      int S, std::uint64_t seed, long max_draws) {
  CriteriaResult r = compute_criteria(draws, spec, data, S, seed, max_draws);
  return {r.dic, r.p_d, r.dev_at_mean, r.mean_dev};
}

LpmlResult compute_lpml(const std::vector<model::ParamState>& draws,
                        const model::ModelSpec& spec,
                        const model::Dataset& data, int S, std::uint64_t seed,
                        long max_draws) {
  CriteriaResult r = compute_criteria(draws, spec, data, S, seed, max_draws);
  return {r.lpml, std::move(r.cpo), std::move(r.log_cpo),
          std::move(r.max_influence), r.log_zero_count};
}

}  // namespace mixfht::selection
