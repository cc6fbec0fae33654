#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mixfht/fht.hpp"
#include "mixfht/model.hpp"
#include "mixfht/rng.hpp"

namespace mixfht::simulate {

// Two gamma marginals coupled by a normal copula.
struct CovariateDesign {
  double shape1 = 2.0;
  double rate1 = 0.2;
  double shape2 = 25.0;
  double rate2 = 0.8;
  double corr = 0.3;
};

struct SimDesign {
  int n_subjects = 200;
  model::Variant variant = model::Variant::cs_c_fv;
  model::ParamState truth;  // regression part only; latents drawn per subject
  CovariateDesign covariates;
  double followup = 168.0;             // days, used when the pool is empty
  std::vector<double> followup_pool;   // empirical follow-up times
  bool round_days = false;             // round gaps to whole days, floor 0
  double x0 = 10.0;
  double nu = 3.9;
  fht::SeriesConfig series;
  std::uint64_t seed = 1;
};

// Cohort design with the reference true values for each variant.
SimDesign default_design(model::Variant v, int n_subjects, std::uint64_t seed);

void validate_design(const SimDesign& d);

// Raw covariate pairs before standardization; one subject per row.
std::vector<std::array<double, 2>> gen_covariates_raw(const CovariateDesign& c,
                                                      int n, Rng& rng);

// In-place column standardization (mean 0, sd 1, n-1 denominator). Constant
// columns are centred only.
void standardize_columns(std::vector<std::array<double, 2>>& x);

struct TruthRow {
  std::string id;
  int m = 0;  // 0-based component
  double z1_active = 0.0;
  double z2 = 0.0;
};

// One subject's full gap history: events until the accumulated time reaches
// the follow-up, then the censored residual.
struct SubjectDraw {
  model::SubjectRecord rec;
  TruthRow truth;
};

SubjectDraw gen_subject(const SimDesign& d, const std::vector<double>& x,
                        const std::string& id, Rng& rng);

struct SimResult {
  model::Dataset data;
  std::vector<TruthRow> truth;
};

// Whole cohort from per-subject substreams; reproducible for a given seed
// regardless of generation order.
SimResult gen_dataset(const SimDesign& d);

}  // namespace mixfht::simulate
