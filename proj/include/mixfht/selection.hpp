#pragma once

#include <cstdint>
#include <vector>

#include "mixfht/inference.hpp"
#include "mixfht/model.hpp"

namespace mixfht::selection {

// Common-random-number panel: one standard-normal block per subject, keyed by
// the subject id so the same (seed, S) yields the same draws regardless of row
// order or which model evaluates them. eps1[i] holds K*S values (component
// major), eps2[i] holds S.
struct CrnPanel {
  int S = 0;
  int K = 0;
  std::vector<std::vector<double>> eps1;
  std::vector<std::vector<double>> eps2;
};

CrnPanel make_panel(const model::Dataset& data, int K, int S,
                    std::uint64_t seed);

struct CriteriaResult {
  double dic = 0.0;
  double p_d = 0.0;
  double dev_at_mean = 0.0;
  double mean_dev = 0.0;
  double lpml = 0.0;
  std::vector<double> cpo;       // natural scale, may underflow to 0
  std::vector<double> log_cpo;
  // Largest single-draw share of each subject's harmonic-mean estimate; values
  // near 1 flag an unstable CPO.
  std::vector<double> max_influence;
  int mc_S = 0;
  long draws_used = 0;
  long log_zero_count = 0;  // (draw, subject) cells with zero likelihood
};

// Observed-data deviance -2 sum_i log L_i at one parameter state, frailties
// and memberships integrated out by Monte Carlo over the panel.
double deviance(const model::ParamState& state, const model::ModelSpec& spec,
                const model::Dataset& data, const CrnPanel& panel,
                long* log_zero_count = nullptr);
double deviance(const model::ParamState& state, const model::ModelSpec& spec,
                const model::Dataset& data, int S, std::uint64_t seed);

// Per-draw per-subject observed log-likelihoods (rows = draws). max_draws > 0
// evaluates an evenly spaced subset.
std::vector<std::vector<double>> obs_loglik_matrix(
    const std::vector<model::ParamState>& draws, const model::ModelSpec& spec,
    const model::Dataset& data, const CrnPanel& panel,
    long* log_zero_count = nullptr, long max_draws = 0);

// Componentwise posterior mean of the retained draws; weights renormalised to
// the simplex. Latents are left empty.
model::ParamState posterior_mean_state(const std::vector<model::ParamState>& draws);

struct DicResult {
  double dic = 0.0;
  double p_d = 0.0;
  double dev_at_mean = 0.0;
  double mean_dev = 0.0;
};

DicResult compute_dic(const std::vector<model::ParamState>& draws,
                      const model::ModelSpec& spec, const model::Dataset& data,
                      int S, std::uint64_t seed, long max_draws = 0);

struct LpmlResult {
  double lpml = 0.0;
  std::vector<double> cpo;
  std::vector<double> log_cpo;
  std::vector<double> max_influence;
  long log_zero_count = 0;
};

LpmlResult compute_lpml(const std::vector<model::ParamState>& draws,
                        const model::ModelSpec& spec,
                        const model::Dataset& data, int S, std::uint64_t seed,
                        long max_draws = 0);

// Both criteria from one shared log-likelihood matrix.
CriteriaResult compute_criteria(const std::vector<model::ParamState>& draws,
                                const model::ModelSpec& spec,
                                const model::Dataset& data, int S,
                                std::uint64_t seed, long max_draws = 0);

}  // namespace mixfht::selection
