#ifndef CITEREC_ADAM_HPP
#define CITEREC_ADAM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "citerec/tensor.hpp"

namespace citerec::nd {

// Named view into a parameter tensor; the model hands the optimizer a
// fixed-order list of these so flat gradient buffers line up.
struct ParamRef {
  std::string name;
  Tensor* tensor = nullptr;
};

inline std::size_t total_size(const std::vector<ParamRef>& refs) {
  std::size_t n = 0;
  for (const ParamRef& r : refs) n += r.tensor->size();
  return n;
}

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;

  void init(std::size_t n) {
    t = 0;
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

// One update over every parameter in refs, reading gradients from the
// flat buffer (laid out in refs order). Uses the bias-corrected
// moment estimates. Throws ErrorKind::shape_mismatch when the buffer
// or state size disagrees with the parameters.
void adam_step(std::vector<ParamRef>& refs, std::span<const double> grads, AdamState& state);

// Convenience for a single tensor whose gradient sits in its .g buffer.
void adam_step(Tensor& param, AdamState& state);

}  // namespace citerec::nd

#endif
