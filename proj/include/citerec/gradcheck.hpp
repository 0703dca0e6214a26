#ifndef CITEREC_GRADCHECK_HPP
#define CITEREC_GRADCHECK_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "citerec/adam.hpp"

namespace citerec::nd {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

struct GradCheckOptions {
  double step = 1e-5;       // central difference half-width
  std::size_t samples = 0;  // 0 checks every coordinate
  std::uint64_t seed = 17;
  // Coordinates for which this returns true are skipped. Used to step
  // around known non-differentiable points, e.g. relu inputs within
  // 1e-6 of zero where the two-sided difference straddles the kink.
  std::function<bool(const std::string& name, std::size_t index)> exclude;
};

// Compares analytic gradients (read from each tensor's .g buffer,
// which `loss` must fill when asked) against central finite
// differences of the scalar loss. Relative error per coordinate is
// |a - n| / max(|a|, |n|, 1e-8).
//
// `loss` is called with with_grad=false for probe evaluations and must
// not mutate parameters; with with_grad=true it must also accumulate
// gradients into zeroed .g buffers.
GradCheckReport grad_check(std::vector<ParamRef>& refs,
                           const std::function<double(bool with_grad)>& loss,
                           const GradCheckOptions& opts = {});

}  // namespace citerec::nd

#endif
