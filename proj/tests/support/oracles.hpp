#pragma once

#include <functional>
#include <vector>

// Reference numerics used only by tests: slow, independent implementations to
// check the library against.
namespace oracles {

// Adaptive Simpson quadrature to an absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol);

// One-sample Kolmogorov-Smirnov statistic: sup |F_n - F| over the sample.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Sample mean / variance (n-1) helpers for test code.
double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);

}  // namespace oracles
