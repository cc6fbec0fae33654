#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mixfht/io.hpp"

namespace mixfht::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 10;
inline constexpr int kExitIngest = 11;
inline constexpr int kExitNumeric = 12;
inline constexpr int kExitConvergence = 13;

// Maps a thrown error to the exit-code class above.
int exit_code_for(const Error& e);

struct FitArtifacts {
  std::vector<inference::ChainOutput> chains;
  std::vector<std::string> names;
  std::vector<diagnostics::SummaryRow> summary;
  bool converged = false;
};

// Runs cfg.chains chains (in threads up to cfg.jobs) and returns the raw
// outputs plus the pooled summary. Pure computation, no files.
FitArtifacts run_fit(const io::RunConfig& cfg, const model::Dataset& data);

// fit: reads the dataset, optionally standardizes covariates, runs chains and
// writes draws.csv, summary.csv, acceptance.csv, manifest.json to cfg.out_dir.
// Returns 0 or the convergence-warning code.
int cmd_fit(const io::RunConfig& cfg, const std::string& data_path);

struct SimOptions {
  int n_subjects = 200;
  std::string model = "cs-c-fv";
  double followup = 168.0;
  bool round_days = false;
  double x0 = 10.0;
  double nu = 3.9;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

// simulate: writes dataset.csv, truth.csv, manifest.json.
int cmd_simulate(const SimOptions& opt);

// compare: fits each listed variant on the same data, evaluates DIC and LPML
// with shared Monte Carlo draws, writes criteria.csv sorted by DIC.
int cmd_compare(const io::RunConfig& cfg, const std::string& data_path,
                const std::vector<std::string>& models);

struct PredictOptions {
  std::string draws_path;
  std::string data_path;  // optional; supplies covariate names
  std::vector<std::pair<std::string, double>> profile;
  int component = 0;  // 0 = mixture-weighted, else 1-based component
  double t_max = 200.0;
  int steps = 200;
  int frailty_draws = 0;  // 0 plugs in z = 0
  std::uint64_t seed = 1;
  double x0 = 10.0;
  double nu = 3.9;
  double tolerance = 1e-10;
  std::string out_path = "predictive.csv";
};

// predict: posterior-averaged hitting-time CDF on a time grid.
int cmd_predict(const PredictOptions& opt);

// diagnose: convergence report for an existing draws file.
int cmd_diagnose(const std::string& draws_path, const std::string& out_path);

}  // namespace mixfht::cli
