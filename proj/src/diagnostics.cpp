#include "mixfht/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixfht/common.hpp"
#include "mixfht/stats.hpp"

namespace mixfht::diagnostics {

namespace {

// Upper-tail critical values of the asymptotic Cramer-von Mises distribution.
struct CvmPoint {
  double alpha;
  double crit;
};
constexpr CvmPoint kCvmTable[] = {
    {0.10, 0.34730}, {0.05, 0.46136}, {0.025, 0.58061}, {0.01, 0.74346}};

double cvm_critical(double alpha) {
  if (!(alpha >= 0.01 && alpha <= 0.10))
    throw DomainError("stationarity test level must lie in [0.01, 0.10]");
  for (const auto& pt : kCvmTable)
    if (alpha == pt.alpha) return pt.crit;
  // Log-linear interpolation in alpha between table anchors.
  for (std::size_t j = 1; j < std::size(kCvmTable); ++j) {
    if (alpha > kCvmTable[j].alpha) {
      double la = std::log(kCvmTable[j - 1].alpha);
      double lb = std::log(kCvmTable[j].alpha);
      double w = (std::log(alpha) - la) / (lb - la);
      return kCvmTable[j - 1].crit +
             w * (kCvmTable[j].crit - kCvmTable[j - 1].crit);
    }
  }
  return kCvmTable[std::size(kCvmTable) - 1].crit;
}

// Zero-frequency spectral density via a Yule-Walker autoregressive fit with
// AIC order selection (Levinson-Durbin recursion).
double spectral0_ar(const std::vector<double>& x) {
  const long n = long(x.size());
  if (n < 8) return variance_of(x);
  double xbar = mean_of(x);
  long max_order = std::min<long>(20, n / 4);
  std::vector<double> acov(max_order + 1, 0.0);
  for (long k = 0; k <= max_order; ++k) {
    double s = 0.0;
    for (long t = 0; t + k < n; ++t) s += (x[t] - xbar) * (x[t + k] - xbar);
    acov[k] = s / double(n);
  }
  if (!(acov[0] > 0.0)) return 0.0;

  double best_aic = double(n) * std::log(acov[0]);  // order 0
  double best_s0 = acov[0];
  std::vector<double> phi(max_order + 1, 0.0), prev(max_order + 1, 0.0);
  double sigma2 = acov[0];
  for (long p = 1; p <= max_order; ++p) {
    double num = acov[p];
    for (long j = 1; j < p; ++j) num -= prev[j] * acov[p - j];
    double refl = num / sigma2;
    phi[p] = refl;
    for (long j = 1; j < p; ++j) phi[j] = prev[j] - refl * prev[p - j];
    sigma2 *= (1.0 - refl * refl);
    if (!(sigma2 > 0.0)) break;
    double aic = double(n) * std::log(sigma2) + 2.0 * double(p);
    if (aic < best_aic) {
      double phisum = 0.0;
      for (long j = 1; j <= p; ++j) phisum += phi[j];
      double denom = (1.0 - phisum) * (1.0 - phisum);
      if (denom > 1e-12) {
        best_aic = aic;
        best_s0 = sigma2 / denom;
      }
    }
    std::copy(phi.begin(), phi.begin() + p + 1, prev.begin());
  }
  return best_s0;
}

}  // namespace

RhatResult gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw ConfigError("scale reduction needs at least one chain");
  const std::size_t len = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != len)
      throw ShapeError("scale reduction needs equal chain lengths");
  if (len < 4) throw ConfigError("scale reduction needs at least 4 draws per chain");

  // Split each chain in half.
  std::vector<std::vector<double>> seq;
  const std::size_t h = len / 2;
  for (const auto& c : chains) {
    seq.emplace_back(c.begin(), c.begin() + h);
    seq.emplace_back(c.begin() + h, c.begin() + 2 * h);
  }
  const double m = double(seq.size());
  const double n = double(h);
  std::vector<double> means(seq.size());
  double grand = 0.0;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    means[j] = mean_of(seq[j]);
    grand += means[j] / m;
  }
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / (m - 1.0);
  double w = 0.0;
  for (const auto& s : seq) w += variance_of(s) / m;
  if (!(w > 0.0)) return {1.0, true};
  double var_plus = (n - 1.0) / n * w + b / n;
  return {std::sqrt(var_plus / w), false};
}

EssResult effective_sample_size(const std::vector<double>& x) {
  const long n = long(x.size());
  if (n < 4) throw ConfigError("effective sample size needs at least 4 draws");
  double xbar = mean_of(x);
  double g0 = 0.0;
  for (double v : x) g0 += (v - xbar) * (v - xbar);
  g0 /= double(n);
  if (!(g0 > 0.0)) return {0.0, true};

  auto acov = [&](long k) {
    double s = 0.0;
    for (long t = 0; t + k < n; ++t) s += (x[t] - xbar) * (x[t + k] - xbar);
    return s / double(n);
  };
  // Sum autocorrelations over consecutive pairs while the pair sums stay
  // positive (initial positive sequence).
  double tau = -1.0;
  for (long m = 0; 2 * m + 1 < n; ++m) {
    double pair = acov(2 * m) + acov(2 * m + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair / g0;
  }
  if (!(tau > 0.0)) tau = 1.0;
  double ess = double(n) / tau;
  return {std::min(ess, double(n)), false};
}

std::pair<double, double> hpd_interval(std::vector<double> draws, double level) {
  if (draws.empty()) throw ConfigError("interval needs at least one draw");
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("interval level must lie in (0, 1)");
  std::sort(draws.begin(), draws.end());
  const long n = long(draws.size());
  long k = long(std::ceil(level * double(n)));
  k = std::clamp<long>(k, 1, n);
  double best_lo = draws[0], best_hi = draws[k - 1];
  double best_w = best_hi - best_lo;
  for (long i = 1; i + k - 1 < n; ++i) {
    double w = draws[i + k - 1] - draws[i];
    if (w < best_w) {
      best_w = w;
      best_lo = draws[i];
      best_hi = draws[i + k - 1];
    }
  }
  return {best_lo, best_hi};
}

HwResult heidelberger_welch(const std::vector<double>& x, double alpha) {
  const long n = long(x.size());
  if (n < 50) throw ConfigError("stationarity test needs at least 50 draws");
  double crit = cvm_critical(alpha);
  if (!(variance_of(x) > 0.0)) return {true, 0.0, 0.0, true};

  // Spectral density at frequency zero from the second half, held fixed
  // across trims.
  std::vector<double> half(x.begin() + n / 2, x.end());
  double s0 = spectral0_ar(half);
  if (!(s0 > 0.0)) return {true, 0.0, 0.0, true};

  for (int d = 0; d <= 5; ++d) {
    double frac = 0.1 * d;
    long start = long(frac * double(n));
    long len = n - start;
    if (len < 2) break;
    double sum = 0.0;
    for (long t = start; t < n; ++t) sum += x[t];
    double stat = 0.0;
    double cum = 0.0;
    for (long k = 1; k <= len; ++k) {
      cum += x[start + k - 1];
      double bridge = cum - double(k) / double(len) * sum;
      stat += bridge * bridge;
    }
    stat /= double(len) * double(len) * s0;
    if (stat < crit) return {true, frac, stat, false};
    if (d == 5) return {false, frac, stat, false};
  }
  return {false, 0.5, 0.0, false};
}

double mcse(const std::vector<double>& x) {
  EssResult e = effective_sample_size(x);
  if (e.degenerate || !(e.value > 0.0)) return 0.0;
  return sd_of(x) / std::sqrt(e.value);
}

std::vector<SummaryRow> summarize(
    const std::vector<std::vector<std::vector<double>>>& chains,
    const std::vector<std::string>& names, double hpd_level, double hw_alpha) {
  if (chains.empty() || chains.front().empty())
    throw ConfigError("summary needs at least one chain with draws");
  const std::size_t n_par = names.size();
  for (const auto& c : chains)
    for (const auto& d : c)
      if (d.size() != n_par)
        throw ShapeError("draw width does not match the parameter names");

  std::vector<SummaryRow> rows(n_par);
  for (std::size_t p = 0; p < n_par; ++p) {
    std::vector<double> pooled;
    std::vector<std::vector<double>> per_chain;
    for (const auto& c : chains) {
      std::vector<double> seq;
      seq.reserve(c.size());
      for (const auto& d : c) seq.push_back(d[p]);
      pooled.insert(pooled.end(), seq.begin(), seq.end());
      per_chain.push_back(std::move(seq));
    }
    SummaryRow& row = rows[p];
    row.name = names[p];
    row.mean = mean_of(pooled);
    row.sd = pooled.size() > 1 ? sd_of(pooled) : 0.0;
    auto [lo, hi] = hpd_interval(pooled, hpd_level);
    row.hpd_lo = lo;
    row.hpd_hi = hi;
    if (per_chain.front().size() >= 4) {
      // Byte-identical chains void the between-chain comparison entirely.
      bool chains_identical = per_chain.size() > 1;
      for (std::size_t c = 1; chains_identical && c < per_chain.size(); ++c)
        chains_identical = (per_chain[c] == per_chain[0]);
      if (chains_identical) {
        row.rhat = 1.0;
        row.rhat_degenerate = true;
      } else {
        RhatResult r = gelman_rubin(per_chain);
        row.rhat = r.value;
        row.rhat_degenerate = r.degenerate;
      }
      double ess_total = 0.0;
      bool any_deg = false;
      for (const auto& seq : per_chain) {
        EssResult e = effective_sample_size(seq);
        ess_total += e.value;
        any_deg = any_deg || e.degenerate;
      }
      row.ess = ess_total;
      row.ess_degenerate = any_deg;
      row.mcse = (!any_deg && ess_total > 0.0)
                     ? row.sd / std::sqrt(ess_total)
                     : 0.0;
    } else {
      row.rhat = 1.0;
      row.rhat_degenerate = true;
      row.ess = double(pooled.size());
      row.ess_degenerate = true;
      row.mcse = 0.0;
    }
    if (per_chain.front().size() >= 50) {
      row.hw_evaluated = true;
      bool all_pass = true;
      double worst = 0.0;
      for (const auto& seq : per_chain) {
        HwResult h = heidelberger_welch(seq, hw_alpha);
        all_pass = all_pass && h.pass;
        worst = std::max(worst, h.discard_fraction);
      }
      row.hw_pass = all_pass;
      row.hw_discard = worst;
    }
  }
  return rows;
}

}  // namespace mixfht::diagnostics
