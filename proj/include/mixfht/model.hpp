#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixfht/common.hpp"
#include "mixfht/fht.hpp"
#include "mixfht/rng.hpp"

namespace mixfht::model {

// Two-component mixture variants plus the single-component reference model.
//   cs_c_fv : component-specific covariate effects, component-specific frailty
//             variances
//   cs_i_fv : slopes shared across components, frailty variances free
//   cs_i    : slopes shared and frailty variances tied
//   cs_n    : one component
enum class Variant { cs_c_fv, cs_i_fv, cs_i, cs_n };

enum class LikelihoodMode {
  interval_censored,  // day-rounded gap times, interval mass of width 1
  continuous,         // exact gap times
};

struct PriorHyper {
  double var_alpha = 100.0;       // normal prior variance on threshold effects
  double var_beta = 100.0;        // normal prior variance on volatility effects
  double ig_shape = 1.0;          // inverse gamma prior on frailty variances
  double ig_scale = 1.0;
  std::vector<double> xi = {1.0, 1.0};  // Dirichlet weights prior
};

struct ModelSpec {
  Variant variant = Variant::cs_c_fv;
  LikelihoodMode mode = LikelihoodMode::interval_censored;
  double x0 = 10.0;
  double nu = 3.9;
  PriorHyper prior;
  fht::SeriesConfig series;

  int n_components() const { return variant == Variant::cs_n ? 1 : 2; }
  bool tied_slopes() const {
    return variant == Variant::cs_i_fv || variant == Variant::cs_i;
  }
  bool tied_theta() const { return variant == Variant::cs_i; }
};

// One subject's recurrent gap times. x carries a leading 1 for the intercept.
// All records up to the last are events; the last is the censored residual.
struct SubjectRecord {
  std::string id;
  std::vector<double> x;
  std::vector<double> t;
  std::vector<std::uint8_t> event;
};

using Dataset = std::vector<SubjectRecord>;

// Full parameter and latent state. beta has one row per component; z1 carries
// both frailty columns even though only column m[i] enters the likelihood, so
// the augmented posterior has a fixed dimension.
struct ParamState {
  std::vector<double> alpha;
  std::vector<std::vector<double>> beta;
  std::vector<double> rho;
  std::vector<double> theta1;
  double theta2 = 1.0;
  std::vector<std::array<double, 2>> z1;
  std::vector<double> z2;
  std::vector<int> m;  // zero-based component labels
};

void validate_spec(const ModelSpec& spec);
void validate_data(const Dataset& data, const ModelSpec& spec);
// Checks dimensions, positivity, simplex and ordering constraints.
void validate_state(const ParamState& s, const ModelSpec& spec,
                    std::size_t n_subjects, std::size_t n_coef);

// Default starting state used by the sampler (m is drawn from rho).
ParamState default_init(const ModelSpec& spec, const Dataset& data, Rng& rng);

double dot(std::span<const double> a, std::span<const double> b);

// Volatility link: sigma_ik = exp(x_i' beta_k + z1_ik).
double link_sigma(const ParamState& s, const SubjectRecord& subj, int i, int k);
// Threshold link: kappa_i = x0 + exp(x_i' alpha + z2_i).
double link_kappa(const ParamState& s, const ModelSpec& spec,
                  const SubjectRecord& subj, int i);

// Gap-time log likelihood of one subject at explicit (kappa, sigma). Censored
// records with zero survival mass produce the distinguished log-zero value.
LogLik subject_loglik_at(const ModelSpec& spec, const SubjectRecord& subj,
                         double kappa, double sigma);

// Same, with kappa and sigma taken from the state and frailty column k.
LogLik subject_cond_loglik(const ParamState& s, const ModelSpec& spec,
                           const SubjectRecord& subj, int i, int k);

// Mixture density at gap time t given component volatilities and weights.
double mixture_pdf(double t, double x0, double nu, double kappa,
                   std::span<const double> sigma, std::span<const double> rho,
                   const fht::SeriesConfig& cfg = {});

struct ObsLogLik {
  LogLik value;
  long zero_draws = 0;  // component draws that carried no likelihood mass
};

// Observed-data log likelihood of one subject with the frailties integrated
// out by Monte Carlo over S standard-normal draws per component:
//   L_i = sum_k rho_k (1/S) sum_s L_i(z1 = sqrt(theta1k) e1[k][s],
//                                    z2 = sqrt(theta2) e2[s], m = k)
ObsLogLik observed_loglik_eps(const ParamState& s, const ModelSpec& spec,
                              const SubjectRecord& subj,
                              std::span<const double> eps1,  // K*S, k-major
                              std::span<const double> eps2); // S

ObsLogLik observed_loglik_mc(const ParamState& s, const ModelSpec& spec,
                             const SubjectRecord& subj, int S, Rng& rng);

// Augmented log posterior up to a constant: likelihood at the active frailty
// columns plus frailty, membership, coefficient, weight and variance priors.
// All two-component variants share this expression; the reduced variants
// restrict the state space rather than the formula, so tied states evaluate
// identically across them. Throws OrderingError when the intercept constraint
// is violated.
LogLik joint_log_posterior(const ParamState& s, const ModelSpec& spec,
                           const Dataset& data);

// Names of the population-level parameters in draw order, e.g. alpha[0],
// beta1[2], rho[1], theta1[2], theta2.
std::vector<std::string> parameter_names(const ModelSpec& spec,
                                         std::size_t n_coef);
// Flattens the population-level block of a state in parameter_names order.
std::vector<double> flatten(const ParamState& s, const ModelSpec& spec);

}  // namespace mixfht::model
