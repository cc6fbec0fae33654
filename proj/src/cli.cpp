#include "mixfht/cli.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "mixfht/fht.hpp"
#include "mixfht/stats.hpp"

namespace mixfht::cli {

namespace {

constexpr std::uint64_t kSaltChain = 0xc4a1u;
constexpr std::uint64_t kSaltCriteria = 0xce17u;
constexpr std::uint64_t kSaltPredict = 0xf00du;

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Standardize covariate columns across subjects (each subject counted once);
// returns (name, (mean, sd)) per column for the manifest.
std::vector<std::pair<std::string, std::pair<double, double>>> standardize(
    model::Dataset& data, const std::vector<std::string>& names) {
  std::vector<std::pair<std::string, std::pair<double, double>>> out;
  if (data.empty()) return out;
  const std::size_t p = data.front().x.size();
  for (std::size_t j = 1; j < p; ++j) {
    std::vector<double> col;
    col.reserve(data.size());
    for (const auto& subj : data) col.push_back(subj.x[j]);
    double mu = mean_of(col);
    double sd = col.size() > 1 ? sd_of(col) : 0.0;
    for (auto& subj : data) {
      subj.x[j] -= mu;
      if (sd > 0.0) subj.x[j] /= sd;
    }
    out.emplace_back(names[j - 1], std::make_pair(mu, sd));
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> flatten_chains(
    const std::vector<inference::ChainOutput>& chains,
    const model::ModelSpec& spec) {
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& ch : chains) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ch.draws.size());
    for (const auto& d : ch.draws) rows.push_back(model::flatten(d, spec));
    out.push_back(std::move(rows));
  }
  return out;
}

bool summary_converged(const std::vector<diagnostics::SummaryRow>& rows) {
  for (const auto& r : rows) {
    if (!r.rhat_degenerate && r.rhat > 1.1) return false;
    if (r.hw_evaluated && !r.hw_pass) return false;
  }
  return true;
}

std::vector<model::ParamState> pool_draws(
    const std::vector<inference::ChainOutput>& chains) {
  std::vector<model::ParamState> pooled;
  for (const auto& ch : chains)
    pooled.insert(pooled.end(), ch.draws.begin(), ch.draws.end());
  return pooled;
}

// Reassembles parameter states from a long-format draws file.
struct DrawsView {
  std::size_t p = 0;
  int K = 1;
  std::vector<model::ParamState> states;
};

DrawsView states_from_draws(const io::DrawsFile& df) {
  DrawsView view;
  std::size_t n_alpha = 0;
  int K = 1;
  for (const auto& name : df.names) {
    if (name.rfind("alpha[", 0) == 0) ++n_alpha;
    if (name.rfind("beta2[", 0) == 0 || name.rfind("rho[2", 0) == 0) K = 2;
  }
  if (n_alpha == 0) throw IngestError("draws file carries no alpha[...] rows");
  view.p = n_alpha;
  view.K = K;
  auto index_of = [&](const std::string& name, long line_hint) -> std::size_t {
    std::size_t open = name.find('[');
    if (open == std::string::npos || name.back() != ']')
      throw IngestError("unrecognized parameter '" + name + "' at entry " +
                        std::to_string(line_hint));
    return std::size_t(std::stoul(name.substr(open + 1, name.size() - open - 2)));
  };
  for (const auto& chain : df.chains) {
    for (const auto& row : chain) {
      model::ParamState st;
      st.alpha.assign(view.p, 0.0);
      st.beta.assign(std::size_t(K), std::vector<double>(view.p, 0.0));
      st.rho.assign(std::size_t(K), 0.0);
      st.theta1.assign(std::size_t(K), 0.0);
      for (std::size_t j = 0; j < df.names.size(); ++j) {
        const std::string& name = df.names[j];
        double v = row[j];
        if (name.rfind("alpha[", 0) == 0) {
          st.alpha.at(index_of(name, long(j))) = v;
        } else if (name.rfind("beta1[", 0) == 0) {
          st.beta[0].at(index_of(name, long(j))) = v;
        } else if (name.rfind("beta2[", 0) == 0) {
          st.beta.at(1).at(index_of(name, long(j))) = v;
        } else if (name.rfind("rho[", 0) == 0) {
          st.rho.at(index_of(name, long(j)) - 1) = v;
        } else if (name.rfind("theta1[", 0) == 0) {
          st.theta1.at(index_of(name, long(j)) - 1) = v;
        } else if (name == "theta2") {
          st.theta2 = v;
        } else {
          throw IngestError("unrecognized parameter '" + name + "'");
        }
      }
      view.states.push_back(std::move(st));
    }
  }
  return view;
}

}  // namespace

int exit_code_for(const Error& e) {
  if (dynamic_cast<const IngestError*>(&e)) return kExitIngest;
  if (dynamic_cast<const SeriesError*>(&e) ||
      dynamic_cast<const NumericError*>(&e))
    return kExitNumeric;
  return kExitConfig;
}

FitArtifacts run_fit(const io::RunConfig& cfg, const model::Dataset& data) {
  model::ModelSpec spec = io::to_spec(cfg);
  model::validate_data(data, spec);

  FitArtifacts art;
  art.chains.resize(std::size_t(cfg.chains));
  std::vector<std::exception_ptr> errors(std::size_t(cfg.chains));

  std::size_t next = 0;
  auto worker = [&](std::size_t c) {
    try {
      inference::SamplerConfig sc = cfg.sampler;
      sc.seed = mix_seed({cfg.sampler.seed, kSaltChain, std::uint64_t(c + 1)});
      art.chains[c] = inference::run_chain(spec, data, sc);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  int jobs = std::max(1, std::min(cfg.jobs, cfg.chains));
  if (jobs == 1) {
    for (std::size_t c = 0; c < art.chains.size(); ++c) worker(c);
  } else {
    std::vector<std::thread> pool;
    std::mutex mu;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t c;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= art.chains.size()) return;
            c = next++;
          }
          worker(c);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  std::size_t p = data.empty() ? 1 : data.front().x.size();
  art.names = model::parameter_names(spec, p);
  art.summary = diagnostics::summarize(flatten_chains(art.chains, spec), art.names);
  art.converged = summary_converged(art.summary);
  return art;
}

int cmd_fit(const io::RunConfig& cfg, const std::string& data_path) {
  io::DatasetFile df = io::read_dataset(data_path);
  io::RunConfig effective = cfg;
  std::vector<std::pair<std::string, std::pair<double, double>>> std_info;
  if (cfg.standardize) std_info = standardize(df.data, df.covariate_names);

  FitArtifacts art = run_fit(effective, df.data);
  model::ModelSpec spec = io::to_spec(effective);

  std::string digest = io::config_digest(effective);
  const std::string& dir = effective.out_dir;
  io::write_draws(path_join(dir, "draws.csv"), art.names,
                  flatten_chains(art.chains, spec), digest);
  io::write_summary(path_join(dir, "summary.csv"), art.summary, digest);
  std::vector<std::pair<int, inference::BlockStat>> acc;
  for (std::size_t c = 0; c < art.chains.size(); ++c)
    for (const auto& blk : art.chains[c].blocks)
      acc.emplace_back(int(c + 1), blk);
  io::write_acceptance(path_join(dir, "acceptance.csv"), acc, digest);
  io::write_manifest(path_join(dir, "manifest.json"), "fit", effective,
                     {"draws.csv", "summary.csv", "acceptance.csv"}, std_info);
  return art.converged ? kExitOk : kExitConvergence;
}

int cmd_simulate(const SimOptions& opt) {
  simulate::SimDesign design = simulate::default_design(
      io::variant_from_string(opt.model), opt.n_subjects, opt.seed);
  design.followup = opt.followup;
  design.round_days = opt.round_days;
  design.x0 = opt.x0;
  design.nu = opt.nu;
  simulate::SimResult res = simulate::gen_dataset(design);

  io::RunConfig cfg;
  cfg.model = opt.model;
  cfg.x0 = opt.x0;
  cfg.nu = opt.nu;
  cfg.sampler.seed = opt.seed;
  cfg.out_dir = opt.out_dir;
  std::string digest = io::config_digest(cfg);
  std::vector<std::string> cov_names = {"x1", "x2"};
  if (!res.data.empty() && res.data.front().x.size() == 1) cov_names.clear();
  io::write_dataset(path_join(opt.out_dir, "dataset.csv"), res.data, cov_names,
                    digest);
  io::write_truth(path_join(opt.out_dir, "truth.csv"), res.truth, digest);
  io::write_manifest(path_join(opt.out_dir, "manifest.json"), "simulate", cfg,
                     {"dataset.csv", "truth.csv"});
  return kExitOk;
}

int cmd_compare(const io::RunConfig& cfg, const std::string& data_path,
                const std::vector<std::string>& models) {
  if (models.empty()) throw ConfigError("compare needs at least one model");
  io::DatasetFile df = io::read_dataset(data_path);
  if (cfg.standardize) standardize(df.data, df.covariate_names);

  // One shared seed keys the Monte Carlo panels, so criteria differences
  // between models are not polluted by panel noise.
  std::uint64_t crit_seed = mix_seed({cfg.sampler.seed, kSaltCriteria});
  std::vector<io::CriteriaRow> rows;
  for (const auto& name : models) {
    io::RunConfig mc = cfg;
    mc.model = name;
    FitArtifacts art = run_fit(mc, df.data);
    model::ModelSpec spec = io::to_spec(mc);
    selection::CriteriaResult crit =
        selection::compute_criteria(pool_draws(art.chains), spec, df.data,
                                    cfg.mc_s, crit_seed, cfg.mc_draws);
    rows.push_back({name, std::move(crit)});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const io::CriteriaRow& a, const io::CriteriaRow& b) {
                     return a.crit.dic < b.crit.dic;
                   });
  std::string digest = io::config_digest(cfg);
  io::write_criteria(path_join(cfg.out_dir, "criteria.csv"), rows, digest);
  io::write_manifest(path_join(cfg.out_dir, "manifest.json"), "compare", cfg,
                     {"criteria.csv"});
  return kExitOk;
}

int cmd_predict(const PredictOptions& opt) {
  io::DrawsFile df = io::read_draws(opt.draws_path);
  DrawsView view = states_from_draws(df);
  if (view.states.empty()) throw IngestError("draws file has no draws");

  std::vector<std::string> cov_names;
  if (!opt.data_path.empty()) {
    cov_names = io::read_dataset(opt.data_path).covariate_names;
  } else {
    for (std::size_t j = 1; j < view.p; ++j)
      cov_names.push_back("x" + std::to_string(j));
  }
  if (cov_names.size() != view.p - 1)
    throw IngestError("dataset covariates do not match the draws dimension");

  std::vector<double> x(view.p, 0.0);
  x[0] = 1.0;
  for (const auto& [name, value] : opt.profile) {
    auto it = std::find(cov_names.begin(), cov_names.end(), name);
    if (it == cov_names.end()) {
      std::string known;
      for (const auto& s : cov_names) known += (known.empty() ? "" : ", ") + s;
      throw IngestError("unknown covariate '" + name + "' (schema: " + known +
                        ")");
    }
    x[1 + std::size_t(it - cov_names.begin())] = value;
  }
  if (opt.component < 0 || opt.component > view.K)
    throw ConfigError("component must be 0 (mixture) or 1.." +
                      std::to_string(view.K));
  if (!(opt.t_max > 0.0) || opt.steps < 1)
    throw ConfigError("grid needs t_max > 0 and steps >= 1");
  if (opt.frailty_draws < 0) throw ConfigError("frailty draws must be >= 0");

  fht::SeriesConfig series;
  series.tolerance = opt.tolerance;

  std::vector<std::pair<double, double>> curve;
  for (int g = 0; g <= opt.steps; ++g) {
    double t = opt.t_max * double(g) / double(opt.steps);
    curve.emplace_back(t, 0.0);
  }
  const double wdraw = 1.0 / double(view.states.size());
  for (std::size_t u = 0; u < view.states.size(); ++u) {
    const model::ParamState& st = view.states[u];
    Rng rng(mix_seed({opt.seed, kSaltPredict, std::uint64_t(u)}));
    long fs = std::max(1, opt.frailty_draws);
    for (long s = 0; s < fs; ++s) {
      std::array<double, 2> z1 = {0.0, 0.0};
      double z2 = 0.0;
      if (opt.frailty_draws > 0) {
        for (int k = 0; k < view.K; ++k)
          z1[std::size_t(k)] = std::sqrt(st.theta1[std::size_t(k)]) * rng.normal();
        z2 = std::sqrt(st.theta2) * rng.normal();
      }
      double kap = opt.x0 + std::exp(model::dot(x, st.alpha) + z2);
      for (int k = 0; k < view.K; ++k) {
        double w = (opt.component == 0)
                       ? st.rho[std::size_t(k)]
                       : (k + 1 == opt.component ? 1.0 : 0.0);
        if (w <= 0.0) continue;
        double sig = std::exp(model::dot(x, st.beta[std::size_t(k)]) +
                              z1[std::size_t(k)]);
        fht::FhtParams fp{opt.x0, opt.nu, kap, sig};
        fht::SeriesEvaluator ev(fp, series);
        for (auto& [t, f] : curve)
          f += wdraw / double(fs) * w * ev.cdf(t);
      }
    }
  }
  io::write_predictive(opt.out_path, curve, df.manifest_digest);
  return kExitOk;
}

int cmd_diagnose(const std::string& draws_path, const std::string& out_path) {
  io::DrawsFile df = io::read_draws(draws_path);
  auto rows = diagnostics::summarize(df.chains, df.names);
  io::write_summary(out_path, rows, df.manifest_digest);
  return kExitOk;
}

}  // namespace mixfht::cli
