#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rlgaf/rng.hpp"

namespace rlgaf {

using Matrix = Eigen::MatrixXd;

// Trainers abort with a training-divergence error when any parameter
// magnitude crosses this.
inline constexpr double kParamMagnitudeGuard = 1e6;

// One named tensor. Rank is 1 or 2; rank-1 entries are stored as n x 1
// matrices. The flat serialization order is Eigen's column-major layout.
struct ParamEntry {
  std::vector<std::uint32_t> shape;
  Matrix values;
};

// Named, shaped, flat 64-bit parameter arrays. Shapes are fixed at creation;
// every mutation path re-checks finiteness. Iteration order is name order, so
// all derived artifacts (checkpoints, gradient reductions) are deterministic.
//
// Not internally synchronized: callers own exclusivity for mutation,
// concurrent read-only access is fine.
class ParamStore {
 public:
  using Map = std::map<std::string, ParamEntry>;

  void add(const std::string& name, std::vector<std::uint32_t> shape,
           Matrix values);
  // Adds a tensor initialized uniformly in [lo, hi] from `rng`.
  void add_uniform(const std::string& name, std::vector<std::uint32_t> shape,
                   RngStream& rng, double lo = -0.1, double hi = 0.1);
  void add_zeros(const std::string& name, std::vector<std::uint32_t> shape);

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  const ParamEntry& entry(const std::string& name) const;
  const Matrix& at(const std::string& name) const { return entry(name).values; }
  Matrix& at(const std::string& name);

  std::size_t size() const { return entries_.size(); }
  std::size_t total_values() const;
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }
  Map::iterator begin() { return entries_.begin(); }
  Map::iterator end() { return entries_.end(); }

  // Same name/shape sets.
  bool congruent_with(const ParamStore& other) const;

  // this += alpha * other, entrywise over congruent stores. Throws
  // TrainingDivergenceError if any updated value is non-finite.
  void axpy(double alpha, const ParamStore& other);

  void set_all_zero();
  double max_abs_value() const;
  bool all_finite() const;
  bool equals(const ParamStore& other) const;  // bitwise value equality

 private:
  Map entries_;
};

// Gradient slots carry the exact same structure as the parameters they
// differentiate.
using GradStore = ParamStore;

GradStore zeros_like(const ParamStore& params);

inline Matrix matrix_from_shape(const std::vector<std::uint32_t>& shape) {
  const Eigen::Index rows = shape.empty() ? 0 : static_cast<Eigen::Index>(shape[0]);
  const Eigen::Index cols =
      shape.size() > 1 ? static_cast<Eigen::Index>(shape[1]) : 1;
  return Matrix::Zero(rows, cols);
}

}  // namespace rlgaf
