#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace mixfht {

// FNV-1a over bytes; stable key for strings (subject ids, config digests).
std::uint64_t fnv1a64(std::string_view bytes);

// One splitmix64 step; also used to derive stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Collapses (seed, stream ids...) into a single 64-bit stream key. Used to
// give chains, subjects and sweeps their own reproducible substreams.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

// xoshiro256** with splitmix64 seeding. Self-contained so that draws are
// bit-reproducible across platforms and toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t key);

  std::uint64_t next_u64();
  // Uniform on (0,1), never returns an endpoint.
  double uniform01();
  // Standard normal via the Marsaglia polar method (second value discarded).
  double normal();
  // Exponential with rate 1.
  double exponential();
  // Gamma(shape, 1), Marsaglia-Tsang; boosted for shape < 1.
  double gamma(double shape);
  // Inverse gamma with the scale parameterisation: 1/x is Gamma(shape, rate=scale).
  double inv_gamma(double shape, double scale);
  std::vector<double> dirichlet(const std::vector<double>& concentration);
  // Index draw from unnormalised log weights (log-sum-exp normalisation).
  int categorical_logits(const double* logw, int k);

 private:
  std::uint64_t s_[4];
};

}  // namespace mixfht
