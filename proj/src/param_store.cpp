#include "rlgaf/param_store.hpp"

#include <cstring>

#include "rlgaf/errors.hpp"

namespace rlgaf {

namespace {

Eigen::Index shape_rows(const std::vector<std::uint32_t>& shape) {
  return shape.empty() ? 0 : static_cast<Eigen::Index>(shape[0]);
}

Eigen::Index shape_cols(const std::vector<std::uint32_t>& shape) {
  return shape.size() > 1 ? static_cast<Eigen::Index>(shape[1]) : 1;
}

}  // namespace

void ParamStore::add(const std::string& name, std::vector<std::uint32_t> shape,
                     Matrix values) {
  if (entries_.count(name))
    throw InvalidInputError("ParamStore: duplicate tensor name '" + name + "'");
  if (shape.empty() || shape.size() > 2)
    throw InvalidInputError("ParamStore: tensor '" + name +
                            "' must have rank 1 or 2");
  for (std::uint32_t d : shape)
    if (d == 0)
      throw InvalidInputError("ParamStore: tensor '" + name +
                              "' has a zero dimension");
  if (values.rows() != shape_rows(shape) || values.cols() != shape_cols(shape))
    throw InvalidInputError("ParamStore: value matrix for '" + name +
                            "' does not match its shape");
  if (!values.allFinite())
    throw InvalidInputError("ParamStore: tensor '" + name +
                            "' contains non-finite values");
  entries_.emplace(name, ParamEntry{std::move(shape), std::move(values)});
}

void ParamStore::add_uniform(const std::string& name,
                             std::vector<std::uint32_t> shape, RngStream& rng,
                             double lo, double hi) {
  Matrix m(shape_rows(shape), shape_cols(shape));
  // fill in column-major (storage) order so init depends only on draw order
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.next_uniform(lo, hi);
  add(name, std::move(shape), std::move(m));
}

void ParamStore::add_zeros(const std::string& name,
                           std::vector<std::uint32_t> shape) {
  Matrix m = Matrix::Zero(shape_rows(shape), shape_cols(shape));
  add(name, std::move(shape), std::move(m));
}

const ParamEntry& ParamStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw InvalidInputError("ParamStore: unknown tensor '" + name + "'");
  return it->second;
}

Matrix& ParamStore::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw InvalidInputError("ParamStore: unknown tensor '" + name + "'");
  return it->second.values;
}

std::size_t ParamStore::total_values() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += static_cast<std::size_t>(e.values.size());
  return n;
}

bool ParamStore::congruent_with(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  auto it = entries_.begin();
  auto jt = other.entries_.begin();
  for (; it != entries_.end(); ++it, ++jt) {
    if (it->first != jt->first) return false;
    if (it->second.shape != jt->second.shape) return false;
  }
  return true;
}

void ParamStore::axpy(double alpha, const ParamStore& other) {
  if (!congruent_with(other))
    throw InvalidInputError("ParamStore::axpy: stores are not congruent");
  auto it = entries_.begin();
  auto jt = other.entries_.begin();
  for (; it != entries_.end(); ++it, ++jt) {
    it->second.values += alpha * jt->second.values;
    if (!it->second.values.allFinite())
      throw TrainingDivergenceError("non-finite values in tensor '" + it->first +
                                    "' after update");
  }
}

void ParamStore::set_all_zero() {
  for (auto& [name, e] : entries_) e.values.setZero();
}

double ParamStore::max_abs_value() const {
  double m = 0.0;
  for (const auto& [name, e] : entries_)
    if (e.values.size() > 0) m = std::max(m, e.values.cwiseAbs().maxCoeff());
  return m;
}

bool ParamStore::all_finite() const {
  for (const auto& [name, e] : entries_)
    if (!e.values.allFinite()) return false;
  return true;
}

bool ParamStore::equals(const ParamStore& other) const {
  if (!congruent_with(other)) return false;
  auto it = entries_.begin();
  auto jt = other.entries_.begin();
  for (; it != entries_.end(); ++it, ++jt) {
    const Matrix& a = it->second.values;
    const Matrix& b = jt->second.values;
    if (std::memcmp(a.data(), b.data(),
                    sizeof(double) * static_cast<std::size_t>(a.size())) != 0)
      return false;
  }
  return true;
}

GradStore zeros_like(const ParamStore& params) {
  GradStore g;
  for (const auto& [name, e] : params)
    g.add(name, e.shape, Matrix::Zero(e.values.rows(), e.values.cols()));
  return g;
}

}  // namespace rlgaf
