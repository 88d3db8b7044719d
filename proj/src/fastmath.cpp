// Compiled with -funsafe-math-optimizations (see src/CMakeLists.txt): the
// loops below are plain reductions that only vectorize when the compiler may
// reassociate. No finite-math assumptions are enabled, so NaN/Inf propagate.

#include "fastmath.hpp"

#include <algorithm>

#define PHFM_R __restrict__

namespace phasor::fastmath {

namespace {

template <class S>
S dot_impl(const S* a, const S* b, int64_t n) {
  S acc(0);
  for (int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <class S>
S sum_impl(const S* a, int64_t n) {
  S acc(0);
  for (int64_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

template <class S>
void sum_sumsq_impl(const S* x, int64_t n, double* s, double* q) {
  double acc_s = 0.0, acc_q = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double v = double(x[i]);
    acc_s += v;
    acc_q += v * v;
  }
  *s = acc_s;
  *q = acc_q;
}

template <class S>
void gn_bwd_reduce_impl(const S* g, const S* x, int64_t n, S mean, S inv, S a,
                        S b2, bool relu, double* sg, double* sgx) {
  double acc_g = 0.0, acc_gx = 0.0;
  if (relu) {
    // Chunked so the gate select stays a vector blend feeding an
    // unconditional reduction (a fused conditional reduction does not
    // vectorize here).
    constexpr int64_t kChunk = 512;
    S buf[kChunk];
    for (int64_t base = 0; base < n; base += kChunk) {
      const int64_t m = std::min(kChunk, n - base);
      const S* __restrict__ xb = x + base;
      const S* __restrict__ gb = g + base;
      for (int64_t j = 0; j < m; ++j)
        buf[j] = (a * xb[j] + b2) > S(0) ? gb[j] : S(0);
      for (int64_t j = 0; j < m; ++j) {
        const S xh = (xb[j] - mean) * inv;
        acc_g += double(buf[j]);
        acc_gx += double(buf[j] * xh);
      }
    }
  } else {
    for (int64_t i = 0; i < n; ++i) {
      const S xh = (x[i] - mean) * inv;
      acc_g += double(g[i]);
      acc_gx += double(g[i] * xh);
    }
  }
  *sg = acc_g;
  *sgx = acc_gx;
}

template <class S>
void gn_bwd_write_impl(const S* PHFM_R g, const S* PHFM_R x, int64_t n, S mean,
                       S inv, S gc, S a, S b2, S m1, S m2, bool relu,
                       bool fresh, S* PHFM_R d) {
  if (relu) {
    if (fresh) {
      for (int64_t i = 0; i < n; ++i) {
        const S gg = (a * x[i] + b2) > S(0) ? gc * g[i] : S(0);
        d[i] = inv * (gg - m1 - (x[i] - mean) * inv * m2);
      }
    } else {
      for (int64_t i = 0; i < n; ++i) {
        const S gg = (a * x[i] + b2) > S(0) ? gc * g[i] : S(0);
        d[i] += inv * (gg - m1 - (x[i] - mean) * inv * m2);
      }
    }
  } else {
    if (fresh) {
      for (int64_t i = 0; i < n; ++i)
        d[i] = inv * (gc * g[i] - m1 - (x[i] - mean) * inv * m2);
    } else {
      for (int64_t i = 0; i < n; ++i)
        d[i] += inv * (gc * g[i] - m1 - (x[i] - mean) * inv * m2);
    }
  }
}

}  // namespace

float dot(const float* a, const float* b, int64_t n) {
  return dot_impl(a, b, n);
}
double dot(const double* a, const double* b, int64_t n) {
  return dot_impl(a, b, n);
}

float sum(const float* a, int64_t n) { return sum_impl(a, n); }
double sum(const double* a, int64_t n) { return sum_impl(a, n); }

void sum_sumsq(const float* x, int64_t n, double* s, double* q) {
  sum_sumsq_impl(x, n, s, q);
}
void sum_sumsq(const double* x, int64_t n, double* s, double* q) {
  sum_sumsq_impl(x, n, s, q);
}

void gn_bwd_reduce(const float* g, const float* x, int64_t n, float mean,
                   float inv, float a, float b2, bool relu, double* sg,
                   double* sgx) {
  gn_bwd_reduce_impl(g, x, n, mean, inv, a, b2, relu, sg, sgx);
}
void gn_bwd_reduce(const double* g, const double* x, int64_t n, double mean,
                   double inv, double a, double b2, bool relu, double* sg,
                   double* sgx) {
  gn_bwd_reduce_impl(g, x, n, mean, inv, a, b2, relu, sg, sgx);
}

void gn_bwd_write(const float* g, const float* x, int64_t n, float mean,
                  float inv, float gc, float a, float b2, float m1, float m2,
                  bool relu, bool fresh, float* d) {
  gn_bwd_write_impl(g, x, n, mean, inv, gc, a, b2, m1, m2, relu, fresh, d);
}
void gn_bwd_write(const double* g, const double* x, int64_t n, double mean,
                  double inv, double gc, double a, double b2, double m1,
                  double m2, bool relu, bool fresh, double* d) {
  gn_bwd_write_impl(g, x, n, mean, inv, gc, a, b2, m1, m2, relu, fresh, d);
}

}  // namespace phasor::fastmath
