#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string_view>

namespace rlgaf {

// One deterministic random stream. All draws are implemented directly on top
// of the mt19937_64 word sequence (which the C++ standard pins bit-exactly),
// never through std:: distributions, so a (seed, name, counter) triple yields
// the same values on every platform/stdlib.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::string_view name, std::uint64_t counter);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double next_unit();
  double next_uniform(double lo, double hi);
  // Uniform integer in [0, n).
  int next_int(int n);
  // Standard Gumbel(0, 1) variate.
  double next_gumbel();
  // Index draw from an explicit probability vector (components >= 0, sum ~ 1).
  int next_categorical(const Eigen::VectorXd& probs);

 private:
  std::mt19937_64 engine_;
};

// Expands one root seed into independent named substreams. Streams are keyed
// by (name, counter): adding a new consumer name never perturbs existing ones,
// and per-item counters give trainers parallel-safe per-trajectory streams.
class RngFactory {
 public:
  explicit RngFactory(std::uint64_t root_seed) : root_(root_seed) {}

  std::uint64_t root_seed() const { return root_; }

  RngStream stream(std::string_view name, std::uint64_t counter = 0) const {
    return RngStream(root_, name, counter);
  }

 private:
  std::uint64_t root_;
};

}  // namespace rlgaf
