#include "citerec/kernels.hpp"

namespace citerec::nd {

namespace serial {

void matvec_add(double* y, const double* W, const double* x, const double* b, std::size_t rows,
                std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* w = W + r * cols;
    double acc = b ? b[r] : 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
    y[r] = acc;
  }
}

void matvec_t_acc(double* dx, const double* W, const double* dy, std::size_t rows,
                  std::size_t cols) {
  // Column-parallel view: dx[c] = sum_r W[r][c] * dy[r], each c independent.
  for (std::size_t c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += W[r * cols + c] * dy[r];
    dx[c] += acc;
  }
}

void outer_acc(double* dW, double* db, const double* dy, const double* x, std::size_t rows,
               std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* w = dW + r * cols;
    double d = dy[r];
    for (std::size_t c = 0; c < cols; ++c) w[c] += d * x[c];
    if (db) db[r] += d;
  }
}

void vec_acc(double* acc, const double* add, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += add[i];
}

}  // namespace serial

// The parallel versions split work across rows (or columns for the
// transpose). Each output element has exactly one writer and is
// computed by the same inner loop as the serial kernel, which keeps
// the result independent of the thread count, including bitwise.

void matvec_add(double* y, const double* W, const double* x, const double* b, std::size_t rows,
                std::size_t cols) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (rows * cols > 16384)
#endif
  for (std::size_t r = 0; r < rows; ++r) {
    const double* w = W + r * cols;
    double acc = b ? b[r] : 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
    y[r] = acc;
  }
}

void matvec_t_acc(double* dx, const double* W, const double* dy, std::size_t rows,
                  std::size_t cols) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (rows * cols > 16384)
#endif
  for (std::size_t c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += W[r * cols + c] * dy[r];
    dx[c] += acc;
  }
}

void outer_acc(double* dW, double* db, const double* dy, const double* x, std::size_t rows,
               std::size_t cols) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (rows * cols > 16384)
#endif
  for (std::size_t r = 0; r < rows; ++r) {
    double* w = dW + r * cols;
    double d = dy[r];
    for (std::size_t c = 0; c < cols; ++c) w[c] += d * x[c];
    if (db) db[r] += d;
  }
}

void vec_acc(double* acc, const double* add, std::size_t n) {
  serial::vec_acc(acc, add, n);
}

}  // namespace citerec::nd
