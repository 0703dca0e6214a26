#include "citerec/adam.hpp"

#include <cmath>

#include "citerec/error.hpp"

namespace citerec::nd {

void adam_step(std::vector<ParamRef>& refs, std::span<const double> grads, AdamState& state) {
  std::size_t n = total_size(refs);
  if (grads.size() != n)
    throw Error(ErrorKind::shape_mismatch, "adam_step: gradient buffer holds " +
                                               std::to_string(grads.size()) + " values, parameters hold " +
                                               std::to_string(n));
  if (state.m.size() != n || state.v.size() != n)
    throw Error(ErrorKind::shape_mismatch, "adam_step: optimizer state sized for " +
                                               std::to_string(state.m.size()) + " values, parameters hold " +
                                               std::to_string(n));
  state.t += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  std::size_t off = 0;
  for (ParamRef& r : refs) {
    double* p = r.tensor->v.data();
    std::size_t sz = r.tensor->size();
    for (std::size_t i = 0; i < sz; ++i) {
      double g = grads[off + i];
      double& m = state.m[off + i];
      double& v = state.v[off + i];
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g * g;
      double mhat = m / bc1;
      double vhat = v / bc2;
      p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    off += sz;
  }
}

void adam_step(Tensor& param, AdamState& state) {
  if (param.g.size() != param.v.size())
    throw Error(ErrorKind::shape_mismatch, "adam_step: tensor has no gradient buffer");
  std::vector<ParamRef> refs{{"param", &param}};
  adam_step(refs, param.g, state);
}

}  // namespace citerec::nd
