#include "gradapt/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace gradapt::kern {

namespace scalar {
double dot(const double*, const double*, std::size_t);
double sum(const double*, std::size_t);
double max_value(const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
void scale(double*, double, std::size_t);
void add(const double*, const double*, double*, std::size_t);
void sub(const double*, const double*, double*, std::size_t);
void hadamard(const double*, const double*, double*, std::size_t);
double squared_distance(const double*, const double*, std::size_t);
double l1_distance(const double*, const double*, std::size_t);
}  // namespace scalar

#if defined(GRADAPT_HAVE_AVX2)
namespace avx2 {
double dot(const double*, const double*, std::size_t);
double sum(const double*, std::size_t);
double max_value(const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
void scale(double*, double, std::size_t);
void add(const double*, const double*, double*, std::size_t);
void sub(const double*, const double*, double*, std::size_t);
void hadamard(const double*, const double*, double*, std::size_t);
double squared_distance(const double*, const double*, std::size_t);
double l1_distance(const double*, const double*, std::size_t);
}  // namespace avx2
#endif

namespace {

constexpr struct {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*max_value)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*hadamard)(const double*, const double*, double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  double (*l1_distance)(const double*, const double*, std::size_t);
} kScalarTable = {
    scalar::dot,      scalar::sum, scalar::max_value,        scalar::axpy,
    scalar::scale,    scalar::add, scalar::sub,              scalar::hadamard,
    scalar::squared_distance,      scalar::l1_distance,
};

#if defined(GRADAPT_HAVE_AVX2)
constexpr decltype(kScalarTable) kAvx2Table = {
    avx2::dot,      avx2::sum, avx2::max_value,        avx2::axpy,
    avx2::scale,    avx2::add, avx2::sub,              avx2::hadamard,
    avx2::squared_distance,    avx2::l1_distance,
};
#endif

bool cpu_has_avx2() {
#if defined(GRADAPT_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend pick_default_backend() {
  if (const char* env = std::getenv("GRADAPT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

const decltype(kScalarTable)* g_table = nullptr;
Backend g_backend = Backend::Scalar;

void apply_backend(Backend b) {
  g_backend = b;
#if defined(GRADAPT_HAVE_AVX2)
  g_table = (b == Backend::Avx2) ? &kAvx2Table : &kScalarTable;
#else
  g_table = &kScalarTable;
#endif
}

const decltype(kScalarTable)& table() {
  if (g_table == nullptr) apply_backend(pick_default_backend());
  return *g_table;
}

}  // namespace

Backend active_backend() {
  table();
  return g_backend;
}

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
  return cpu_has_avx2();
}

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::runtime_error("kernel backend unavailable on this machine");
  }
  apply_backend(b);
}

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
double sum(const double* x, std::size_t n) { return table().sum(x, n); }
double max_value(const double* x, std::size_t n) { return table().max_value(x, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { table().axpy(alpha, x, y, n); }
void scale(double* x, double alpha, std::size_t n) { table().scale(x, alpha, n); }
void add(const double* a, const double* b, double* out, std::size_t n) { table().add(a, b, out, n); }
void sub(const double* a, const double* b, double* out, std::size_t n) { table().sub(a, b, out, n); }
void hadamard(const double* a, const double* b, double* out, std::size_t n) {
  table().hadamard(a, b, out, n);
}
double squared_distance(const double* a, const double* b, std::size_t n) {
  return table().squared_distance(a, b, n);
}
double l1_distance(const double* a, const double* b, std::size_t n) {
  return table().l1_distance(a, b, n);
}

void exp_vec(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void tanh_vec(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
}

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

void gemv_transposed_accumulate(const double* a, std::size_t rows, std::size_t cols,
                                const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], a + r * cols, y, cols);
}

void rank1_accumulate(double* a, std::size_t rows, std::size_t cols, double alpha,
                      const double* x, const double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy(alpha * x[r], y, a + r * cols, cols);
}

double norm2(const double* x, std::size_t n) { return std::sqrt(dot(x, x, n)); }

}  // namespace gradapt::kern
