#pragma once

#include <functional>

#include "rlgaf/param_store.hpp"
#include "rlgaf/tape.hpp"

namespace rlgaf {

// A differentiable scalar program: records a forward computation of the given
// parameters on the tape and returns the terminal (scalar) node.
using TapeProgram = std::function<Var(Tape&, const ParamStore&)>;

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  Eigen::Index worst_index = -1;
};

// Central-difference check of the tape gradient of `f` at `params`, per
// coordinate. Relative error uses denominator max(|analytic|, |numeric|, 1e-8).
// Evaluates f twice up front and throws ContractError if the values differ
// (f must be deterministic given params).
FiniteDiffReport finite_diff_report(const TapeProgram& f, const ParamStore& params,
                                    double h);

inline double finite_diff_check(const TapeProgram& f, const ParamStore& params,
                                double h) {
  return finite_diff_report(f, params, h).max_rel_error;
}

}  // namespace rlgaf
