#include "mixfht/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mixfht/stats.hpp"

namespace mixfht::inference {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Substream salts for per-subject draws.
constexpr std::uint64_t kSaltFrailty = 0xf7a11u;
constexpr std::uint64_t kSaltMember = 0x3e3bu;
constexpr std::uint64_t kSaltMain = 0xc0ffu;

double clamp_scale(double s) { return std::clamp(s, 1e-8, 1e6); }

struct Block {
  std::string name;
  double scale = 0.25;
  long window_prop = 0;
  long window_acc = 0;
  long prop_post = 0;  // post burn-in counts
  long acc_post = 0;

  void count(bool accepted, bool post_burn) {
    ++window_prop;
    if (accepted) ++window_acc;
    if (post_burn) {
      ++prop_post;
      if (accepted) ++acc_post;
    }
  }
  void adapt(double target, int t_adapt) {
    if (window_prop == 0) return;
    double rate = double(window_acc) / double(window_prop);
    double gain = std::min(1.0, 10.0 / double(t_adapt));
    scale = clamp_scale(scale * std::exp(gain * (rate - target)));
    window_prop = 0;
    window_acc = 0;
  }
};

struct Sampler {
  const model::ModelSpec& spec;
  const model::Dataset& data;
  const SamplerConfig& cfg;
  model::ParamState st;
  Rng rng;

  int K;
  int p;
  int n;

  // Per-subject caches kept in lockstep with st.
  std::vector<double> la;                  // x_i . alpha
  std::vector<std::vector<double>> lb;     // lb[k][i] = x_i . beta_k
  std::vector<double> kappa;               // boundary for subject i
  std::vector<double> sigma_act;           // volatility under current m_i
  std::vector<double> ll;                  // conditional log likelihood

  // Scratch for full-pass proposals.
  std::vector<double> s_la, s_kap, s_ll, s_lb0, s_lb1, s_sig;

  std::vector<Block> alpha_blk;
  std::vector<std::vector<Block>> beta_blk;  // [k][l]; shared slopes live in [0][l]
  std::vector<Block> z1_blk;                 // per subject (active column)
  std::vector<Block> z2_blk;
  bool shared_slopes = false;

  long proposal_errors = 0;
  long membership_zero = 0;
  int t_adapt = 0;
  std::vector<std::vector<double>> scale_trace;

  Sampler(const model::ModelSpec& sp, const model::Dataset& d,
          const SamplerConfig& c, const model::ParamState* init)
      : spec(sp), data(d), cfg(c), rng(mix_seed({c.seed, kSaltMain})) {
    model::validate_spec(spec);
    model::validate_data(data, spec);
    if (cfg.n_iter <= 0 || cfg.burn_in < 0 || cfg.burn_in >= cfg.n_iter)
      throw ConfigError("iteration plan requires 0 <= burn_in < n_iter");
    if (cfg.thin < 1) throw ConfigError("thin must be >= 1");
    if (cfg.adapt_interval < 1) throw ConfigError("adapt_interval must be >= 1");
    if (!(cfg.init_scale > 0.0)) throw ConfigError("init_scale must be positive");

    K = spec.n_components();
    n = int(data.size());
    if (init) {
      st = *init;
      p = int(st.alpha.size());
    } else {
      p = data.empty() ? 1 : int(data.front().x.size());
      st = model::default_init(spec, data, rng);
    }
    model::validate_state(st, spec, std::size_t(n), std::size_t(p));
    shared_slopes = spec.tied_slopes() && p > 1;

    la.assign(n, 0.0);
    lb.assign(K, std::vector<double>(n, 0.0));
    kappa.assign(n, 0.0);
    sigma_act.assign(n, 0.0);
    ll.assign(n, 0.0);
    s_la.resize(n);
    s_kap.resize(n);
    s_ll.resize(n);
    s_lb0.resize(n);
    s_lb1.resize(n);
    s_sig.resize(n);
    refresh_caches_full();

    alpha_blk.resize(p);
    for (int l = 0; l < p; ++l) {
      alpha_blk[l] = {"alpha[" + std::to_string(l) + "]", cfg.init_scale, 0, 0, 0, 0};
    }
    beta_blk.assign(K, {});
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < p; ++l) {
        if (shared_slopes && l >= 1 && k == 1) break;
        std::string nm = shared_slopes && l >= 1
                             ? "beta_shared[" + std::to_string(l) + "]"
                             : "beta" + std::to_string(k + 1) + "[" + std::to_string(l) + "]";
        beta_blk[k].push_back({nm, cfg.init_scale, 0, 0, 0, 0});
      }
    }
    z1_blk.assign(n, Block{"z1", cfg.init_scale, 0, 0, 0, 0});
    z2_blk.assign(n, Block{"z2", cfg.init_scale, 0, 0, 0, 0});
  }

  void refresh_caches_full() {
    for (int i = 0; i < n; ++i) {
      const auto& subj = data[i];
      la[i] = model::dot(subj.x, st.alpha);
      for (int k = 0; k < K; ++k) lb[k][i] = model::dot(subj.x, st.beta[k]);
      int k = st.m[i];
      kappa[i] = spec.x0 + std::exp(la[i] + st.z2[i]);
      sigma_act[i] = std::exp(lb[k][i] + st.z1[i][k]);
      LogLik v;
      try {
        v = model::subject_loglik_at(spec, subj, kappa[i], sigma_act[i]);
      } catch (const Error& e) {
        throw InitError("subject " + subj.id +
                        " has no likelihood mass at the initial state (" +
                        e.what() + ")");
      }
      if (v.is_zero())
        throw InitError("subject " + subj.id +
                        " has no likelihood mass at the initial state");
      ll[i] = v.value();
    }
  }

  // Evaluates one subject at (kappa, sigma); false on zero mass or numeric
  // failure (the latter bumps proposal_errors).
  bool eval_subject(int i, double kap, double sig, double& out) {
    try {
      LogLik v = model::subject_loglik_at(spec, data[i], kap, sig);
      if (v.is_zero()) return false;
      out = v.value();
      return true;
    } catch (const Error&) {
      ++proposal_errors;
      return false;
    }
  }

  void update_alpha(int l, bool post_burn) {
    Block& blk = alpha_blk[l];
    double cur = st.alpha[l];
    double prop = cur + blk.scale * rng.normal();
    double u = rng.uniform01();
    double delta = prop - cur;
    double lr = log_normal_pdf(prop, 0.0, spec.prior.var_alpha) -
                log_normal_pdf(cur, 0.0, spec.prior.var_alpha);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      s_la[i] = la[i] + delta * data[i].x[l];
      s_kap[i] = spec.x0 + std::exp(s_la[i] + st.z2[i]);
      ok = eval_subject(i, s_kap[i], sigma_act[i], s_ll[i]);
      if (ok) lr += s_ll[i] - ll[i];
    }
    bool acc = ok && std::log(u) < lr;
    if (acc) {
      st.alpha[l] = prop;
      la = s_la;
      std::copy(s_kap.begin(), s_kap.end(), kappa.begin());
      std::copy(s_ll.begin(), s_ll.end(), ll.begin());
    }
    blk.count(acc, post_burn);
  }

  // Intercepts and component-specific slopes: only subjects in component k
  // move. The cached row lb[k] changes for everyone.
  void update_beta_coord(int k, int l, bool post_burn) {
    Block& blk = beta_blk[k][l];
    double cur = st.beta[k][l];
    double prop = cur + blk.scale * rng.normal();
    double u = rng.uniform01();
    bool order_ok = true;
    if (l == 0 && K == 2) {
      order_ok = (k == 0) ? prop <= st.beta[1][0] : prop >= st.beta[0][0];
    }
    bool acc = false;
    if (order_ok) {
      double delta = prop - cur;
      double lr = log_normal_pdf(prop, 0.0, spec.prior.var_beta) -
                  log_normal_pdf(cur, 0.0, spec.prior.var_beta);
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        s_lb0[i] = lb[k][i] + delta * data[i].x[l];
        if (st.m[i] != k) continue;
        s_sig[i] = std::exp(s_lb0[i] + st.z1[i][k]);
        ok = eval_subject(i, kappa[i], s_sig[i], s_ll[i]);
        if (ok) lr += s_ll[i] - ll[i];
      }
      acc = ok && std::log(u) < lr;
      if (acc) {
        st.beta[k][l] = prop;
        lb[k] = s_lb0;
        for (int i = 0; i < n; ++i) {
          if (st.m[i] != k) continue;
          sigma_act[i] = s_sig[i];
          ll[i] = s_ll[i];
        }
      }
    }
    blk.count(acc, post_burn);
  }

  // Shared slope l moves both component rows at once; every subject is
  // affected through its own active component. Prior carries both factors.
  void update_shared_slope(int l, bool post_burn) {
    Block& blk = beta_blk[0][l];
    double cur = st.beta[0][l];
    double prop = cur + blk.scale * rng.normal();
    double u = rng.uniform01();
    double delta = prop - cur;
    double lr = 2.0 * (log_normal_pdf(prop, 0.0, spec.prior.var_beta) -
                       log_normal_pdf(cur, 0.0, spec.prior.var_beta));
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      double dx = delta * data[i].x[l];
      s_lb0[i] = lb[0][i] + dx;
      s_lb1[i] = lb[1][i] + dx;
      int k = st.m[i];
      s_sig[i] = std::exp((k == 0 ? s_lb0[i] : s_lb1[i]) + st.z1[i][k]);
      ok = eval_subject(i, kappa[i], s_sig[i], s_ll[i]);
      if (ok) lr += s_ll[i] - ll[i];
    }
    bool acc = ok && std::log(u) < lr;
    if (acc) {
      st.beta[0][l] = prop;
      st.beta[1][l] = prop;
      lb[0] = s_lb0;
      lb[1] = s_lb1;
      std::copy(s_sig.begin(), s_sig.end(), sigma_act.begin());
      std::copy(s_ll.begin(), s_ll.end(), ll.begin());
    }
    blk.count(acc, post_burn);
  }

  void update_frailties(long sweep, bool post_burn) {
    for (int i = 0; i < n; ++i) {
      Rng sub(mix_seed({cfg.seed, kSaltFrailty, std::uint64_t(sweep),
                        std::uint64_t(i)}));
      int k = st.m[i];
      // Active log-volatility frailty: random walk on z1[i][k].
      {
        Block& blk = z1_blk[i];
        double cur = st.z1[i][k];
        double prop = cur + blk.scale * sub.normal();
        double u = sub.uniform01();
        double sig = std::exp(lb[k][i] + prop);
        double cand;
        bool ok = eval_subject(i, kappa[i], sig, cand);
        double lr = kNegInf;
        if (ok) {
          lr = cand - ll[i] +
               log_normal_pdf(prop, 0.0, st.theta1[k]) -
               log_normal_pdf(cur, 0.0, st.theta1[k]);
        }
        bool acc = ok && std::log(u) < lr;
        if (acc) {
          st.z1[i][k] = prop;
          sigma_act[i] = sig;
          ll[i] = cand;
        }
        blk.count(acc, post_burn);
      }
      // Inactive column decouples from the data: exact draw from its prior.
      if (K == 2) {
        int other = 1 - k;
        st.z1[i][other] = std::sqrt(st.theta1[other]) * sub.normal();
      }
      // Boundary frailty z2.
      {
        Block& blk = z2_blk[i];
        double cur = st.z2[i];
        double prop = cur + blk.scale * sub.normal();
        double u = sub.uniform01();
        double kap = spec.x0 + std::exp(la[i] + prop);
        double cand;
        bool ok = eval_subject(i, kap, sigma_act[i], cand);
        double lr = kNegInf;
        if (ok) {
          lr = cand - ll[i] + log_normal_pdf(prop, 0.0, st.theta2) -
               log_normal_pdf(cur, 0.0, st.theta2);
        }
        bool acc = ok && std::log(u) < lr;
        if (acc) {
          st.z2[i] = prop;
          kappa[i] = kap;
          ll[i] = cand;
        }
        blk.count(acc, post_burn);
      }
    }
  }

  void update_memberships(long sweep) {
    if (K != 2) return;
    for (int i = 0; i < n; ++i) {
      Rng sub(mix_seed({cfg.seed, kSaltMember, std::uint64_t(sweep),
                        std::uint64_t(i)}));
      double u = sub.uniform01();
      int k = st.m[i];
      int other = 1 - k;
      double sig_other = std::exp(lb[other][i] + st.z1[i][other]);
      double ll_other = kNegInf;
      try {
        LogLik v = model::subject_loglik_at(spec, data[i], kappa[i], sig_other);
        if (!v.is_zero()) ll_other = v.value();
      } catch (const Error&) {
        ++proposal_errors;
      }
      double lw[2];
      lw[k] = (st.rho[k] > 0.0 ? std::log(st.rho[k]) : kNegInf) + ll[i];
      lw[other] =
          (st.rho[other] > 0.0 ? std::log(st.rho[other]) : kNegInf) + ll_other;
      double norm = lse(lw, 2);
      if (!std::isfinite(norm)) {
        ++membership_zero;
        continue;
      }
      double p0 = std::exp(lw[0] - norm);
      int pick = (u < p0) ? 0 : 1;
      if (pick != k) {
        st.m[i] = pick;
        sigma_act[i] = sig_other;
        ll[i] = ll_other;
      }
    }
  }

  void update_rho() {
    if (K != 2) return;
    std::vector<long> counts(2, 0);
    for (int i = 0; i < n; ++i) ++counts[st.m[i]];
    st.rho = gibbs_rho(rng, spec.prior.xi, counts);
  }

  void update_thetas() {
    double a = spec.prior.ig_shape;
    double b = spec.prior.ig_scale;
    if (spec.tied_theta()) {
      double ss = 0.0;
      for (int i = 0; i < n; ++i)
        ss += st.z1[i][0] * st.z1[i][0] + st.z1[i][1] * st.z1[i][1];
      // Product of two inverse-gamma factors on the common value collapses to
      // one inverse gamma with doubled prior weight.
      double th = gibbs_theta(rng, 2.0 * a + 1.0 + n, 2.0 * b + 0.5 * ss);
      st.theta1[0] = th;
      st.theta1[1] = th;
    } else {
      for (int k = 0; k < K; ++k) {
        double ss = 0.0;
        for (int i = 0; i < n; ++i) ss += st.z1[i][k] * st.z1[i][k];
        st.theta1[k] = gibbs_theta(rng, a + 0.5 * n, b + 0.5 * ss);
      }
    }
    double ss2 = 0.0;
    for (int i = 0; i < n; ++i) ss2 += st.z2[i] * st.z2[i];
    st.theta2 = gibbs_theta(rng, a + 0.5 * n, b + 0.5 * ss2);
  }

  void adapt_all() {
    ++t_adapt;
    for (auto& blk : alpha_blk) blk.adapt(cfg.target_scalar, t_adapt);
    for (auto& row : beta_blk)
      for (auto& blk : row) blk.adapt(cfg.target_scalar, t_adapt);
    for (auto& blk : z1_blk) blk.adapt(cfg.target_scalar, t_adapt);
    for (auto& blk : z2_blk) blk.adapt(cfg.target_scalar, t_adapt);
    if (cfg.trace_scales) {
      std::vector<double> row;
      for (auto& blk : alpha_blk) row.push_back(blk.scale);
      for (auto& brow : beta_blk)
        for (auto& blk : brow) row.push_back(blk.scale);
      double z1s = 0.0, z2s = 0.0;
      for (auto& blk : z1_blk) z1s += blk.scale;
      for (auto& blk : z2_blk) z2s += blk.scale;
      if (n > 0) {
        row.push_back(z1s / n);
        row.push_back(z2s / n);
      }
      scale_trace.push_back(std::move(row));
    }
  }

  void sweep_once(long sweep, bool post_burn) {
    for (int l = 0; l < p; ++l) update_alpha(l, post_burn);
    if (shared_slopes) {
      for (int k = 0; k < K; ++k) update_beta_coord(k, 0, post_burn);
      for (int l = 1; l < p; ++l) update_shared_slope(l, post_burn);
    } else {
      for (int k = 0; k < K; ++k)
        for (int l = 0; l < p; ++l) update_beta_coord(k, l, post_burn);
    }
    update_frailties(sweep, post_burn);
    update_memberships(sweep);
    update_rho();
    update_thetas();
    // Tied-variant caches that depend on theta or rho need no refresh; frailty
    // and membership caches were maintained in place.
  }

  ChainOutput run() {
    ChainOutput out;
    out.n_iter = cfg.n_iter;
    out.burn_in = cfg.burn_in;
    out.thin = cfg.thin;
    out.seed = cfg.seed;
    long keep = (cfg.n_iter - cfg.burn_in) / cfg.thin;
    out.draws.reserve(std::max<long>(keep, 0));
    for (long sweep = 1; sweep <= cfg.n_iter; ++sweep) {
      bool post_burn = sweep > cfg.burn_in;
      sweep_once(sweep, post_burn);
      if (!post_burn && sweep % cfg.adapt_interval == 0) adapt_all();
      if (post_burn && (sweep - cfg.burn_in) % cfg.thin == 0) {
        model::ParamState snap;
        snap.alpha = st.alpha;
        snap.beta = st.beta;
        snap.rho = st.rho;
        snap.theta1 = st.theta1;
        snap.theta2 = st.theta2;
        if (cfg.retain_latents) {
          snap.z1 = st.z1;
          snap.z2 = st.z2;
          snap.m = st.m;
        }
        out.draws.push_back(std::move(snap));
      }
    }
    for (auto& blk : alpha_blk)
      out.blocks.push_back({blk.name, blk.prop_post, blk.acc_post, blk.scale});
    for (auto& row : beta_blk)
      for (auto& blk : row)
        out.blocks.push_back({blk.name, blk.prop_post, blk.acc_post, blk.scale});
    if (n > 0) {
      BlockStat z1s{"z1", 0, 0, 0.0}, z2s{"z2", 0, 0, 0.0};
      for (auto& blk : z1_blk) {
        z1s.proposed += blk.prop_post;
        z1s.accepted += blk.acc_post;
        z1s.scale += blk.scale / n;
      }
      for (auto& blk : z2_blk) {
        z2s.proposed += blk.prop_post;
        z2s.accepted += blk.acc_post;
        z2s.scale += blk.scale / n;
      }
      out.blocks.push_back(z1s);
      out.blocks.push_back(z2s);
    }
    out.proposal_errors = proposal_errors;
    out.membership_zero = membership_zero;
    out.scale_trace = std::move(scale_trace);
    return out;
  }
};

}  // namespace

void rm_adapt(MhBlock& blk, double target_rate, int t_adapt) {
  if (blk.window_prop == 0) return;
  double rate = double(blk.window_acc) / double(blk.window_prop);
  double gain = std::min(1.0, 10.0 / double(std::max(1, t_adapt)));
  blk.scale = clamp_scale(blk.scale * std::exp(gain * (rate - target_rate)));
  blk.window_prop = 0;
  blk.window_acc = 0;
}

std::vector<double> gibbs_rho(Rng& rng, const std::vector<double>& xi,
                              const std::vector<long>& counts) {
  if (xi.size() != counts.size())
    throw ShapeError("weight update needs matching prior and count lengths");
  std::vector<double> conc(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) {
    if (!(xi[k] > 0.0) || counts[k] < 0)
      throw DomainError("weight update needs positive prior and nonnegative counts");
    conc[k] = xi[k] + double(counts[k]);
  }
  return rng.dirichlet(conc);
}

std::pair<double, double> theta_posterior_params(double prior_shape,
                                                 double prior_scale,
                                                 std::span<const double> z) {
  if (!(prior_shape > 0.0) || !(prior_scale > 0.0))
    throw DomainError("variance update needs positive prior shape and scale");
  double ss = 0.0;
  for (double v : z) ss += v * v;
  return {prior_shape + 0.5 * double(z.size()), prior_scale + 0.5 * ss};
}

double gibbs_theta(Rng& rng, double shape, double scale) {
  return rng.inv_gamma(shape, scale);
}

std::array<double, 2> membership_logits(double ll0, double ll1,
                                        const std::vector<double>& rho) {
  if (rho.size() != 2) throw ShapeError("membership logits need two weights");
  auto lw = [](double r, double l) {
    return (r > 0.0 ? std::log(r) : kNegInf) + l;
  };
  return {lw(rho[0], ll0), lw(rho[1], ll1)};
}

ChainOutput run_chain(const model::ModelSpec& spec, const model::Dataset& data,
                      const SamplerConfig& cfg, const model::ParamState* init) {
  Sampler s(spec, data, cfg, init);
  return s.run();
}

}  // namespace mixfht::inference
