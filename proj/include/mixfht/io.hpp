#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mixfht/diagnostics.hpp"
#include "mixfht/inference.hpp"
#include "mixfht/model.hpp"
#include "mixfht/selection.hpp"
#include "mixfht/simulate.hpp"

namespace mixfht::io {

// Shortest round-trippable decimal rendering of a double.
std::string format_double(double v);
double parse_double(const std::string& s, long line_no);

std::string variant_to_string(model::Variant v);
model::Variant variant_from_string(const std::string& s);
std::string mode_to_string(model::LikelihoodMode m);
model::LikelihoodMode mode_from_string(const std::string& s);

// Dataset CSV: header subject_id,gap_time,event,<covariate...>; rows grouped
// by subject in time order; the final row of each subject is the censored
// one. Lines starting with '#' are comments; writers emit the run manifest
// digest in the first one.
struct DatasetFile {
  model::Dataset data;
  std::vector<std::string> covariate_names;  // intercept not included
  std::string manifest_digest;               // empty when absent
};

DatasetFile read_dataset(const std::string& path);
void write_dataset(const std::string& path, const model::Dataset& data,
                   const std::vector<std::string>& covariate_names,
                   const std::string& manifest_digest);

// Draws CSV, long format: chain,iteration,parameter,value.
struct DrawsFile {
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<double>>> chains;  // [chain][draw][param]
  std::string manifest_digest;
};

DrawsFile read_draws(const std::string& path);
void write_draws(const std::string& path, const std::vector<std::string>& names,
                 const std::vector<std::vector<std::vector<double>>>& chains,
                 const std::string& manifest_digest);

void write_summary(const std::string& path,
                   const std::vector<diagnostics::SummaryRow>& rows,
                   const std::string& manifest_digest);

struct CriteriaRow {
  std::string model;
  selection::CriteriaResult crit;
};

void write_criteria(const std::string& path,
                    const std::vector<CriteriaRow>& rows,
                    const std::string& manifest_digest);

void write_predictive(const std::string& path,
                      const std::vector<std::pair<double, double>>& curve,
                      const std::string& manifest_digest);

void write_truth(const std::string& path,
                 const std::vector<simulate::TruthRow>& rows,
                 const std::string& manifest_digest);

// Per-block acceptance report for a fitted chain set.
void write_acceptance(const std::string& path,
                      const std::vector<std::pair<int, inference::BlockStat>>& rows,
                      const std::string& manifest_digest);

// Everything a run needs; missing keys take defaults, unknown keys are
// rejected.
struct RunConfig {
  std::string model = "cs-c-fv";
  std::string mode = "interval";
  double x0 = 10.0;
  double nu = 3.9;
  model::PriorHyper prior;
  inference::SamplerConfig sampler;
  int chains = 2;
  int jobs = 1;
  int mc_s = 1000;
  long mc_draws = 0;  // criteria draw subsample; 0 uses all retained
  double tolerance = 1e-10;
  bool standardize = false;
  std::string out_dir = ".";
};

RunConfig load_config(const std::string& path);
// Canonical JSON text of the config (sorted keys); its hash names the run.
std::string config_canonical(const RunConfig& cfg);
std::string config_digest(const RunConfig& cfg);
model::ModelSpec to_spec(const RunConfig& cfg);

void write_manifest(const std::string& path, const std::string& command,
                    const RunConfig& cfg,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::pair<std::string, std::pair<double, double>>>&
                        standardization = {});

// First "# manifest <digest>" comment of a file, empty if none.
std::string read_manifest_digest(const std::string& path);

}  // namespace mixfht::io
