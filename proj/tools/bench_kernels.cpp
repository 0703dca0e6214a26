// Times the OpenMP kernels against their serial reference twins at the
// matrix shapes the model actually uses. The parallel versions are
// written to produce bit-identical results, so this is purely a speed
// comparison; no assertions here.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "citerec/kernels.hpp"
#include "citerec/rng.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(void (*run)(std::vector<double>&, const std::vector<double>&,
                           const std::vector<double>&, std::size_t, std::size_t),
               std::vector<double>& y, const std::vector<double>& W,
               const std::vector<double>& x, std::size_t rows, std::size_t cols, int reps) {
  // warm up once, then take the best of `reps`
  run(y, W, x, rows, cols);
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = clock_type::now();
    run(y, W, x, rows, cols);
    auto t1 = clock_type::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

void run_parallel(std::vector<double>& y, const std::vector<double>& W,
                  const std::vector<double>& x, std::size_t rows, std::size_t cols) {
  citerec::nd::matvec_add(y.data(), W.data(), x.data(), nullptr, rows, cols);
}

void run_serial(std::vector<double>& y, const std::vector<double>& W,
                const std::vector<double>& x, std::size_t rows, std::size_t cols) {
  citerec::nd::serial::matvec_add(y.data(), W.data(), x.data(), nullptr, rows, cols);
}

void run_parallel_t(std::vector<double>& y, const std::vector<double>& W,
                    const std::vector<double>& x, std::size_t rows, std::size_t cols) {
  citerec::nd::matvec_t_acc(y.data(), W.data(), x.data(), rows, cols);
}

void run_serial_t(std::vector<double>& y, const std::vector<double>& W,
                  const std::vector<double>& x, std::size_t rows, std::size_t cols) {
  citerec::nd::serial::matvec_t_acc(y.data(), W.data(), x.data(), rows, cols);
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 50;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
#ifdef _OPENMP
      omp_set_num_threads(std::atoi(argv[++i]));
#else
      ++i;
#endif
    } else if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) {
      reps = std::atoi(argv[++i]);
    } else {
      std::printf("usage: bench_kernels [--threads N] [--reps N]\n");
      return 2;
    }
  }

#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without openmp; both columns run the same serial code\n");
#endif

  // (rows, cols) pairs that appear in the model: the recurrent input
  // and recurrent projections, the fusion layers, and the heads.
  struct Shape {
    const char* label;
    std::size_t rows, cols;
  };
  const Shape shapes[] = {
      {"lstm input  4H x E", 512, 200},
      {"lstm recur  4H x H", 512, 128},
      {"attention    A x S", 128, 256},
      {"paper fuse  F x 2S", 256, 256},
      {"match fuse F x S+F", 256, 384},
      {"embedding row gather", 4096, 200},
  };

  citerec::Rng rng(42);
  std::printf("%-22s %10s %10s %8s\n", "shape", "serial ms", "openmp ms", "ratio");
  for (const Shape& s : shapes) {
    std::vector<double> W(s.rows * s.cols), x(s.cols), y(s.rows, 0.0), dx(s.cols, 0.0);
    for (double& v : W) v = rng.uniform(-1.0, 1.0);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);

    double serial = time_ms(run_serial, y, W, x, s.rows, s.cols, reps);
    double parallel = time_ms(run_parallel, y, W, x, s.rows, s.cols, reps);
    std::printf("%-22s %10.4f %10.4f %8.2f\n", s.label, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0);

    std::vector<double> dy(s.rows);
    for (double& v : dy) v = rng.uniform(-1.0, 1.0);
    double serial_t = time_ms(run_serial_t, dx, W, dy, s.rows, s.cols, reps);
    double parallel_t = time_ms(run_parallel_t, dx, W, dy, s.rows, s.cols, reps);
    std::printf("%-22s %10.4f %10.4f %8.2f\n", "  (transpose acc)", serial_t, parallel_t,
                parallel_t > 0 ? serial_t / parallel_t : 0.0);
  }
  return 0;
}
