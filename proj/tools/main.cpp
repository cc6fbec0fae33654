#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixfht/cli.hpp"

namespace {

using mixfht::cli::kExitConfig;
using mixfht::cli::kExitNumeric;

struct FitFlags {
  std::string data;
  std::string config;
  std::string out;
  std::string model;
  std::string mode;
  double x0 = 0.0, nu = 0.0, tolerance = 0.0;
  long iters = 0, burnin = -1;
  int thin = 0, chains = 0, jobs = 0, mc_s = 0;
  long mc_draws = -1;
  std::uint64_t seed = 0;
  bool standardize = false;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool need_data) {
  auto* data = cmd->add_option("--data", f.data, "dataset CSV");
  if (need_data) data->required();
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--model", f.model, "cs-c-fv | cs-i-fv | cs-i | cs-n");
  cmd->add_option("--mode", f.mode, "interval | continuous");
  cmd->add_option("--x0", f.x0, "process start");
  cmd->add_option("--nu", f.nu, "event threshold");
  cmd->add_option("--iters", f.iters, "total sweeps per chain");
  cmd->add_option("--burnin", f.burnin, "burn-in sweeps");
  cmd->add_option("--thin", f.thin, "thinning stride");
  cmd->add_option("--chains", f.chains, "number of chains");
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--mc-S", f.mc_s, "Monte Carlo draws per likelihood");
  cmd->add_option("--mc-draws", f.mc_draws,
                  "posterior draws used by criteria (0 = all)");
  cmd->add_option("--jobs", f.jobs, "parallel chains");
  cmd->add_option("--tolerance", f.tolerance, "series tolerance");
  cmd->add_flag("--standardize", f.standardize,
                "standardize covariates in-tool");
}

mixfht::io::RunConfig build_config(const CLI::App* cmd, const FitFlags& f) {
  mixfht::io::RunConfig cfg;
  if (!f.config.empty()) cfg = mixfht::io::load_config(f.config);
  if (cmd->count("--out")) cfg.out_dir = f.out;
  if (cmd->count("--model")) cfg.model = f.model;
  if (cmd->count("--mode")) cfg.mode = f.mode;
  if (cmd->count("--x0")) cfg.x0 = f.x0;
  if (cmd->count("--nu")) cfg.nu = f.nu;
  if (cmd->count("--iters")) cfg.sampler.n_iter = f.iters;
  if (cmd->count("--burnin")) cfg.sampler.burn_in = f.burnin;
  if (cmd->count("--thin")) cfg.sampler.thin = f.thin;
  if (cmd->count("--chains")) cfg.chains = f.chains;
  if (cmd->count("--seed")) cfg.sampler.seed = f.seed;
  if (cmd->count("--mc-S")) cfg.mc_s = f.mc_s;
  if (cmd->count("--mc-draws")) cfg.mc_draws = f.mc_draws;
  if (cmd->count("--jobs")) cfg.jobs = f.jobs;
  if (cmd->count("--tolerance")) cfg.tolerance = f.tolerance;
  if (cmd->count("--standardize")) cfg.standardize = true;
  return cfg;
}

std::vector<std::pair<std::string, double>> parse_profile(
    const std::string& text) {
  std::vector<std::pair<std::string, double>> out;
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    auto eq = cur.find('=');
    if (eq == std::string::npos)
      throw mixfht::ConfigError("profile entries use name=value: '" + cur + "'");
    out.emplace_back(cur.substr(0, eq),
                     mixfht::io::parse_double(cur.substr(eq + 1), 0));
    cur.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture first-hitting-time gap model toolkit"};
  app.require_subcommand(1);

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "fit one model and write artifacts");
  add_fit_flags(fit, fit_flags, true);

  FitFlags cmp_flags;
  std::string cmp_models = "cs-c-fv,cs-i-fv,cs-i,cs-n";
  auto* cmp = app.add_subcommand("compare", "fit several variants, rank by DIC");
  add_fit_flags(cmp, cmp_flags, true);
  cmp->add_option("--models", cmp_models, "comma-separated variant list");

  mixfht::cli::SimOptions sim;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic cohort");
  simulate->add_option("--n", sim.n_subjects, "subjects")->required();
  simulate->add_option("--model", sim.model, "generating variant");
  simulate->add_option("--seed", sim.seed, "root seed");
  simulate->add_option("--followup", sim.followup, "follow-up days");
  simulate->add_flag("--round-days", sim.round_days, "round gaps to whole days");
  simulate->add_option("--x0", sim.x0, "process start");
  simulate->add_option("--nu", sim.nu, "event threshold");
  simulate->add_option("--out", sim.out_dir, "output directory");

  mixfht::cli::PredictOptions pred;
  std::string profile_text;
  auto* predict = app.add_subcommand("predict", "posterior predictive CDF");
  predict->add_option("--draws", pred.draws_path, "draws CSV")->required();
  predict->add_option("--data", pred.data_path, "dataset CSV for names");
  predict->add_option("--profile", profile_text, "x1=v,x2=v covariate profile");
  predict->add_option("--component", pred.component, "0 mixture, else 1-based");
  predict->add_option("--tmax", pred.t_max, "grid end");
  predict->add_option("--steps", pred.steps, "grid steps");
  predict->add_option("--frailty-S", pred.frailty_draws,
                      "frailty draws per posterior draw (0 plugs in 0)");
  predict->add_option("--seed", pred.seed, "frailty seed");
  predict->add_option("--x0", pred.x0, "process start");
  predict->add_option("--nu", pred.nu, "event threshold");
  predict->add_option("--tolerance", pred.tolerance, "series tolerance");
  predict->add_option("--out", pred.out_path, "output CSV");

  std::string diag_draws, diag_out = "diagnostics.csv";
  auto* diagnose = app.add_subcommand("diagnose", "convergence report");
  diagnose->add_option("--draws", diag_draws, "draws CSV")->required();
  diagnose->add_option("--out", diag_out, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed())
      return mixfht::cli::cmd_fit(build_config(fit, fit_flags), fit_flags.data);
    if (cmp->parsed()) {
      std::vector<std::string> models;
      std::string cur;
      for (char c : cmp_models + ",") {
        if (c == ',') {
          if (!cur.empty()) models.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      return mixfht::cli::cmd_compare(build_config(cmp, cmp_flags),
                                      cmp_flags.data, models);
    }
    if (simulate->parsed()) return mixfht::cli::cmd_simulate(sim);
    if (predict->parsed()) {
      pred.profile = parse_profile(profile_text);
      return mixfht::cli::cmd_predict(pred);
    }
    if (diagnose->parsed())
      return mixfht::cli::cmd_diagnose(diag_draws, diag_out);
  } catch (const mixfht::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return mixfht::cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitConfig;
}
