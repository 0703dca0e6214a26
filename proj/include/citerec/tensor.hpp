#ifndef CITEREC_TENSOR_HPP
#define CITEREC_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "citerec/error.hpp"
#include "citerec/rng.hpp"

namespace citerec::nd {

// Dense row-major tensor of doubles with an optional gradient buffer of
// the same shape. Values and gradients are plain vectors so parameter
// structs copy cleanly (the trainer clones parameters per block).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;
  std::vector<double> g;

  Tensor() = default;

  static Tensor zeros(std::initializer_list<std::size_t> dims) {
    Tensor t;
    t.shape.assign(dims);
    std::size_t n = 1;
    for (std::size_t d : t.shape) n *= d;
    t.v.assign(n, 0.0);
    return t;
  }

  std::size_t size() const { return v.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t i) { return v[i]; }
  double at(std::size_t i) const { return v[i]; }
  double& at(std::size_t i, std::size_t j) { return v[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * cols() + j]; }

  void alloc_grad() { g.assign(v.size(), 0.0); }
  void zero_grad() { g.assign(g.size(), 0.0); }

  void fill_uniform(Rng& rng, double lo, double hi) {
    for (double& x : v) x = rng.uniform(lo, hi);
  }

  void require_shape(std::size_t r, std::size_t c, const std::string& name) const {
    if (rows() != r || cols() != c)
      throw Error(ErrorKind::shape_mismatch,
                  name + ": expected " + std::to_string(r) + "x" + std::to_string(c) + ", got " +
                      std::to_string(rows()) + "x" + std::to_string(cols()));
  }
};

}  // namespace citerec::nd

#endif
