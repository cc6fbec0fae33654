#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixfht/common.hpp"
#include "mixfht/model.hpp"
#include "mixfht/rng.hpp"

namespace mixfht::inference {

struct SamplerConfig {
  long n_iter = 20000;
  long burn_in = 10000;
  int thin = 10;
  int adapt_interval = 50;
  // Robbins-Monro acceptance targets; scalar blocks aim at 0.44, multivariate
  // blocks built on mh_block_update aim at 0.30.
  double target_scalar = 0.44;
  double target_vector = 0.30;
  double init_scale = 0.25;
  bool retain_latents = false;
  bool trace_scales = false;
  std::uint64_t seed = 1;
};

struct BlockStat {
  std::string name;
  long proposed = 0;  // post burn-in
  long accepted = 0;
  double scale = 0.0;  // final (frozen) proposal scale
};

struct ChainOutput {
  std::vector<model::ParamState> draws;
  std::vector<BlockStat> blocks;
  long n_iter = 0;
  long burn_in = 0;
  int thin = 1;
  std::uint64_t seed = 0;
  long proposal_errors = 0;   // proposals rejected because evaluation failed
  long membership_zero = 0;   // membership draws with no usable component
  // One row per adaptation event when trace_scales is set.
  std::vector<std::vector<double>> scale_trace;
  // Optional cache filled by the selection layer: draws x subjects observed
  // log likelihoods.
  std::vector<std::vector<double>> obs_loglik;
};

// Always consumes one uniform; log_ratio of -inf or nan never accepts.
inline bool mh_accept(Rng& rng, double log_ratio) {
  double u = rng.uniform01();
  return std::log(u) < log_ratio;
}

struct MhBlock {
  double scale = 0.25;
  long proposed = 0;
  long accepted = 0;
  long window_prop = 0;
  long window_acc = 0;
  long errors = 0;
};

// One random-walk Metropolis step on a parameter block. log_target returns the
// unnormalised log density (-inf allowed); exceptions reject the proposal and
// are counted. cached_current avoids re-evaluating the target at the current
// point across repeated calls.
template <class F>
bool mh_block_update(Rng& rng, std::span<double> x, MhBlock& blk, F&& log_target,
                     double* cached_current = nullptr) {
  ++blk.proposed;
  ++blk.window_prop;
  std::vector<double> prop(x.begin(), x.end());
  for (auto& v : prop) v += blk.scale * rng.normal();
  double u = rng.uniform01();
  double cur;
  if (cached_current && std::isfinite(*cached_current)) {
    cur = *cached_current;
  } else {
    cur = log_target(std::span<const double>(x.data(), x.size()));
    if (cached_current) *cached_current = cur;
  }
  double cand;
  try {
    cand = log_target(std::span<const double>(prop.data(), prop.size()));
  } catch (const Error&) {
    ++blk.errors;
    return false;
  }
  if (std::log(u) < cand - cur) {
    std::copy(prop.begin(), prop.end(), x.begin());
    if (cached_current) *cached_current = cand;
    ++blk.accepted;
    ++blk.window_acc;
    return true;
  }
  return false;
}

// Robbins-Monro scale adaptation: scale <- scale * exp(gain * (rate - target))
// with gain min(1, 10/t_adapt). Resets the observation window.
void rm_adapt(MhBlock& blk, double target_rate, int t_adapt);

// Conjugate weight update: Dirichlet(xi + counts).
std::vector<double> gibbs_rho(Rng& rng, const std::vector<double>& xi,
                              const std::vector<long>& counts);

// Posterior (shape, scale) of an inverse-gamma variance given centred normals.
std::pair<double, double> theta_posterior_params(double prior_shape,
                                                 double prior_scale,
                                                 std::span<const double> z);

double gibbs_theta(Rng& rng, double shape, double scale);

// Membership logits log(rho_k) + loglik_k for two components; inputs use the
// -inf convention for zero likelihood.
std::array<double, 2> membership_logits(double ll0, double ll1,
                                        const std::vector<double>& rho);

// Runs one chain. Passing init overrides the default starting state; the
// state must satisfy the variant's constraints. Throws InitError when a
// subject has no likelihood mass at the start.
ChainOutput run_chain(const model::ModelSpec& spec, const model::Dataset& data,
                      const SamplerConfig& cfg,
                      const model::ParamState* init = nullptr);

}  // namespace mixfht::inference
