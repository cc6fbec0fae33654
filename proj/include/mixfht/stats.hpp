#pragma once

#include <cstddef>
#include <vector>

namespace mixfht {

// log(sum(exp(x))) with the usual max shift; -inf entries are skipped.
double lse(const double* x, int n);
double lse(const std::vector<double>& x);

// Log densities used by the priors and the joint posterior.
double log_normal_pdf(double x, double mean, double var);
double log_inv_gamma_pdf(double x, double shape, double scale);
double log_dirichlet_pdf(const std::vector<double>& p,
                         const std::vector<double>& concentration);

// Standard normal cdf and upper tail.
double norm_cdf(double x);
double norm_sf(double x);

// Regularised lower incomplete gamma P(a, x) and its inverse in x.
// Series/continued-fraction evaluation, Newton inverse with bisection guard.
double gamma_p(double a, double x);
double gamma_p_inv(double a, double p);

// Quantile of Gamma(shape, scale).
double gamma_quantile(double p, double shape, double scale);

double mean_of(const std::vector<double>& x);
// Sample variance with n-1 denominator.
double variance_of(const std::vector<double>& x);
double sd_of(const std::vector<double>& x);

}  // namespace mixfht
