#pragma once

#include <cstddef>

// Double-precision array kernels behind a runtime-selected backend.
//
// Every kernel has a scalar reference implementation; on x86-64 an AVX2
// variant is compiled alongside and picked at startup when cpuid reports
// support (override with GRADAPT_KERNELS=scalar|avx2 or set_backend()).
// Transcendental loops (exp, tanh) are shared scalar code in both backends
// so softmax and activation outputs are bit-identical regardless of the
// selected backend; only the reassociating reductions differ, within the
// tolerances asserted by the equivalence tests.

namespace gradapt::kern {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_available(Backend b);
void set_backend(Backend b);  // throws std::runtime_error if unavailable
const char* backend_name(Backend b);

// Dispatched primitives. All pointers must reference n valid doubles;
// output ranges may alias inputs only where noted.
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);  // n >= 1
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void scale(double* x, double alpha, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void hadamard(const double* a, const double* b, double* out, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double l1_distance(const double* a, const double* b, std::size_t n);

// Shared scalar transcendentals (in-place allowed: out == x).
void exp_vec(const double* x, double* out, std::size_t n);
void tanh_vec(const double* x, double* out, std::size_t n);

// Convenience wrappers over the dispatched primitives. A is row-major.
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x,
          double* y);  // y = A x
void gemv_transposed_accumulate(const double* a, std::size_t rows, std::size_t cols,
                                const double* x, double* y);  // y += A^T x
void rank1_accumulate(double* a, std::size_t rows, std::size_t cols, double alpha,
                      const double* x, const double* y);  // A += alpha x y^T
double norm2(const double* x, std::size_t n);

}  // namespace gradapt::kern
