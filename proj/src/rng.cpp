#include "rlgaf/rng.hpp"

#include <cmath>

#include "rlgaf/errors.hpp"

namespace rlgaf {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t root_seed, std::string_view name,
                     std::uint64_t counter) {
  std::uint64_t s = mix64(root_seed ^ fnv1a(name));
  s = mix64(s ^ counter);
  engine_.seed(s);
}

double RngStream::next_unit() {
  // 53 mantissa bits, offset by half an ulp so the result is strictly in (0,1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_unit();
}

int RngStream::next_int(int n) {
  if (n <= 0) throw InvalidInputError("next_int: n must be positive");
  // rejection sampling, no modulo bias
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<int>(x % un);
}

double RngStream::next_gumbel() { return -std::log(-std::log(next_unit())); }

int RngStream::next_categorical(const Eigen::VectorXd& probs) {
  if (probs.size() == 0) throw InvalidInputError("next_categorical: empty probs");
  if (!probs.allFinite() || probs.minCoeff() < 0.0)
    throw InvalidInputError("next_categorical: probabilities must be finite and non-negative");
  const double u = next_unit();
  double cum = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);  // rounding slack
}

}  // namespace rlgaf
