#pragma once

#include <cstdint>

// Reduction kernels compiled in a translation unit that permits
// floating-point reassociation (-funsafe-math-optimizations) so the compiler
// can vectorize them. Reassociation changes results only at roundoff level;
// NaN and Inf still propagate normally, so non-finite values remain
// detectable downstream. Keep classification logic (isnan/isfinite) out of
// this unit.
namespace phasor::fastmath {

float dot(const float* a, const float* b, int64_t n);
double dot(const double* a, const double* b, int64_t n);

float sum(const float* a, int64_t n);
double sum(const double* a, int64_t n);

// Double-precision sum and sum of squares in one pass (group-norm statistics).
void sum_sumsq(const float* x, int64_t n, double* s, double* q);
void sum_sumsq(const double* x, int64_t n, double* s, double* q);

// Group-norm backward reduction over one channel plane:
//   xh   = (x[k] - mean) * inv
//   gate = relu ? ((a * x[k] + b2) > 0) : 1      (a, b2: folded affine)
//   sg  += gate * g[k]
//   sgx += gate * g[k] * xh
void gn_bwd_reduce(const float* g, const float* x, int64_t n, float mean,
                   float inv, float a, float b2, bool relu, double* sg,
                   double* sgx);
void gn_bwd_reduce(const double* g, const double* x, int64_t n, double mean,
                   double inv, double a, double b2, bool relu, double* sg,
                   double* sgx);

// Group-norm backward write pass over one channel plane:
//   xh      = (x[k] - mean) * inv
//   gate    = relu ? ((a * x[k] + b2) > 0) : 1      (a, b2: folded affine)
//   d[k] (+)= inv * (gc * gate * g[k] - m1 - xh * m2)
// `fresh` selects plain store over accumulate.
void gn_bwd_write(const float* g, const float* x, int64_t n, float mean,
                  float inv, float gc, float a, float b2, float m1, float m2,
                  bool relu, bool fresh, float* d);
void gn_bwd_write(const double* g, const double* x, int64_t n, double mean,
                  double inv, double gc, double a, double b2, double m1,
                  double m2, bool relu, bool fresh, double* d);

}  // namespace phasor::fastmath
