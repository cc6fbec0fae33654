#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace mixfht {

// Error taxonomy. Each class maps onto one CLI exit-code family, see cli.hpp.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid parameter or argument values (nu >= kappa, t < 0, q outside [0,1), ...).
struct DomainError : Error {
  using Error::Error;
};

// Eigenseries did not satisfy the truncation rule within max_terms.
// Carries the partial sum and the number of terms actually accumulated so the
// caller can report how far the evaluation got.
struct SeriesError : Error {
  double partial_sum;
  int terms_used;
  SeriesError(const std::string& msg, double partial, int terms)
      : Error(msg), partial_sum(partial), terms_used(terms) {}
};

// Mismatched dimensions between state, data and model layout.
struct ShapeError : Error {
  using Error::Error;
};

// Component ordering constraint violated (first volatility intercept must not
// exceed the second). The sampler treats this as an automatic rejection.
struct OrderingError : Error {
  using Error::Error;
};

// Bad run configuration (CLI flags, config file, sampler settings).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input files; message carries the file and line.
struct IngestError : Error {
  using Error::Error;
};

// Chain could not be initialised (zero posterior mass at the start state).
struct InitError : Error {
  using Error::Error;
};

// Numerical failure outside the series evaluator.
struct NumericError : Error {
  using Error::Error;
};

// Log-likelihood value that can represent an exact zero likelihood as a
// distinguished state instead of a floating -inf. Sums absorb zeros, and
// downstream code can count how often they occurred.
class LogLik {
 public:
  LogLik() : v_(0.0), zero_(false) {}
  explicit LogLik(double v) : v_(v), zero_(false) {}
  static LogLik zero() {
    LogLik l;
    l.zero_ = true;
    return l;
  }

  bool is_zero() const { return zero_; }
  // Finite log value; only meaningful when !is_zero().
  double value() const { return v_; }
  // Collapses the zero state to -inf for ratio arithmetic.
  double as_double() const {
    return zero_ ? -std::numeric_limits<double>::infinity() : v_;
  }

  LogLik& operator+=(const LogLik& o) {
    zero_ = zero_ || o.zero_;
    if (!zero_) v_ += o.v_;
    return *this;
  }
  LogLik& operator+=(double d) {
    if (!zero_) v_ += d;
    return *this;
  }
  friend LogLik operator+(LogLik a, const LogLik& b) { return a += b; }
  friend LogLik operator+(LogLik a, double b) { return a += b; }

 private:
  double v_;
  bool zero_;
};

// Values whose log would underflow are clamped here before taking logs.
inline constexpr double kLogFloor = 1e-300;

}  // namespace mixfht
