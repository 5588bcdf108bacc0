#include "rlgaf/finite_diff.hpp"

#include <cmath>

#include "rlgaf/errors.hpp"

namespace rlgaf {

namespace {

double evaluate(const TapeProgram& f, const ParamStore& params) {
  Tape tape;
  Var out = f(tape, params);
  return tape.scalar_value(out);
}

}  // namespace

FiniteDiffReport finite_diff_report(const TapeProgram& f, const ParamStore& params,
                                    double h) {
  if (!(h > 0.0)) throw InvalidInputError("finite_diff: h must be positive");

  const double v0 = evaluate(f, params);
  const double v1 = evaluate(f, params);
  if (v0 != v1)
    throw ContractError("finite_diff: f is not deterministic (" +
                        std::to_string(v0) + " vs " + std::to_string(v1) + ")");

  GradStore analytic;
  {
    Tape tape;
    Var out = f(tape, params);
    tape.backward(out);
    analytic = tape.grads_for(params);
  }

  FiniteDiffReport report;
  ParamStore probe = params;
  for (auto& [name, entry] : probe) {
    const Matrix& ga = analytic.at(name);
    for (Eigen::Index i = 0; i < entry.values.size(); ++i) {
      const double saved = entry.values(i);
      entry.values(i) = saved + h;
      const double fp = evaluate(f, probe);
      entry.values(i) = saved - h;
      const double fm = evaluate(f, probe);
      entry.values(i) = saved;

      const double numeric = (fp - fm) / (2.0 * h);
      const double a = ga(i);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_tensor = name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace rlgaf
