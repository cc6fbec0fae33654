#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mixfht::diagnostics {

struct RhatResult {
  double value = 1.0;
  bool degenerate = false;  // zero within-chain variance
};

// Split potential scale reduction: each chain is halved before the
// between/within comparison, so a single long chain is also accepted.
RhatResult gelman_rubin(const std::vector<std::vector<double>>& chains);

struct EssResult {
  double value = 0.0;
  bool degenerate = false;  // constant chain
};

// Effective sample size via the initial-positive-sequence truncation of the
// autocorrelation sum. Capped at the chain length.
EssResult effective_sample_size(const std::vector<double>& x);

// Shortest interval containing ceil(level * N) sorted draws.
std::pair<double, double> hpd_interval(std::vector<double> draws, double level);

struct HwResult {
  bool pass = false;
  double discard_fraction = 0.0;  // first passing prefix trim
  double statistic = 0.0;         // Cramer-von Mises value at that trim
  bool degenerate = false;        // constant chain
};

// Stationarity check: Cramer-von Mises test on the Brownian bridge of partial
// sums, with the zero-frequency spectral density estimated from the second
// half of the chain (autoregressive fit, AIC order). Trims 0%,10%,...,50% are
// tried in order. alpha must lie in [0.01, 0.10].
HwResult heidelberger_welch(const std::vector<double>& x, double alpha);

// sd / sqrt(ESS); zero for degenerate chains.
double mcse(const std::vector<double>& x);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double hpd_lo = 0.0;
  double hpd_hi = 0.0;
  double rhat = 1.0;
  double ess = 0.0;
  double mcse = 0.0;
  bool rhat_degenerate = false;
  bool ess_degenerate = false;
  bool hw_evaluated = false;
  bool hw_pass = false;
  double hw_discard = 0.0;
};

// chains[c][d] is the flattened parameter vector of draw d in chain c; names
// labels the flattened coordinates. Pooled moments and HPD, split-Rhat across
// chains, ESS summed over chains, stationarity per chain (all must pass).
std::vector<SummaryRow> summarize(
    const std::vector<std::vector<std::vector<double>>>& chains,
    const std::vector<std::string>& names, double hpd_level = 0.95,
    double hw_alpha = 0.05);

}  // namespace mixfht::diagnostics
