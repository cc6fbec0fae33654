#include "mixfht/rng.hpp"

#include <cmath>
#include <limits>

#include "mixfht/common.hpp"
#include "mixfht/stats.hpp"

namespace mixfht {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = 0x6a09e667f3bcc908ULL;  // arbitrary nonzero start
  std::uint64_t out = 0;
  for (std::uint64_t p : parts) {
    state ^= p + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
    out = splitmix64(state);
  }
  return out;
}

Rng::Rng(std::uint64_t key) {
  // Expand the key through splitmix64 so even small keys give full state.
  for (int i = 0; i < 4; ++i) s_[i] = splitmix64(key);
  // All-zero state is invalid for xoshiro; the expansion above cannot produce
  // it for any key, but guard anyway.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

static inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  for (;;) {
    double u = (next_u64() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::normal() {
  for (;;) {
    double u = 2.0 * uniform01() - 1.0;
    double v = 2.0 * uniform01() - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double Rng::exponential() { return -std::log(uniform01()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^{1/a}
    double g = gamma(shape + 1.0);
    double u = uniform01();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform01();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::inv_gamma(double shape, double scale) {
  if (!(scale > 0.0)) throw DomainError("inv_gamma: scale must be positive");
  return scale / gamma(shape);
}

std::vector<double> Rng::dirichlet(const std::vector<double>& concentration) {
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t i = 0; i < concentration.size(); ++i) {
    out[i] = gamma(concentration[i]);
    total += out[i];
  }
  if (total <= 0.0) throw NumericError("dirichlet: degenerate draw");
  for (double& v : out) v /= total;
  return out;
}

int Rng::categorical_logits(const double* logw, int k) {
  double norm = lse(logw, k);
  if (!std::isfinite(norm)) throw NumericError("categorical: no finite weight");
  double u = uniform01();
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += std::exp(logw[i] - norm);
    if (u <= acc) return i;
  }
  return k - 1;  // accumulated rounding
}

}  // namespace mixfht
