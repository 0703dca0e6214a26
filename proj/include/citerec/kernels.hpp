#ifndef CITEREC_KERNELS_HPP
#define CITEREC_KERNELS_HPP

#include <cstddef>

namespace citerec::nd {

// Dense kernels behind the encoder layers. The default entry points
// parallelize over independent output rows with OpenMP; each row is
// produced by the same serial inner loop as the reference versions in
// nd::serial, so results are bitwise identical for any thread count.
// The serial copies stay around as the comparison baseline for tests
// and for the kernel benchmark.

// y = W x + b. W is rows x cols, row-major. b may be null.
void matvec_add(double* y, const double* W, const double* x, const double* b, std::size_t rows,
                std::size_t cols);

// dx += W^T dy.
void matvec_t_acc(double* dx, const double* W, const double* dy, std::size_t rows,
                  std::size_t cols);

// dW += dy x^T and db += dy. db may be null.
void outer_acc(double* dW, double* db, const double* dy, const double* x, std::size_t rows,
               std::size_t cols);

// acc += add, elementwise.
void vec_acc(double* acc, const double* add, std::size_t n);

namespace serial {

void matvec_add(double* y, const double* W, const double* x, const double* b, std::size_t rows,
                std::size_t cols);
void matvec_t_acc(double* dx, const double* W, const double* dy, std::size_t rows,
                  std::size_t cols);
void outer_acc(double* dW, double* db, const double* dy, const double* x, std::size_t rows,
               std::size_t cols);
void vec_acc(double* acc, const double* add, std::size_t n);

}  // namespace serial

}  // namespace citerec::nd

#endif
