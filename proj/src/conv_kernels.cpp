#include "phasor/conv_kernels.hpp"

#include <cblas.h>

#include <algorithm>
#include <vector>

#include "fastmath.hpp"

namespace phasor::kernels {

namespace {

// Reflect-101 index (no edge repeat), clamped for axes too short to reflect.
inline int64_t refl(int64_t i, int64_t n) {
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return std::clamp<int64_t>(i, 0, n - 1);
}

void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, float alpha,
          const float* a, int64_t lda, const float* b, int64_t ldb, float beta,
          float* c, int64_t ldc) {
  cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, int(m), int(n), int(k), alpha, a,
              int(lda), b, int(ldb), beta, c, int(ldc));
}

void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, double alpha,
          const double* a, int64_t lda, const double* b, int64_t ldb,
          double beta, double* c, int64_t ldc) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, int(m), int(n), int(k), alpha, a,
              int(lda), b, int(ldb), beta, c, int(ldc));
}

// Channel-mixing kernel behind the stride-1 pointwise conv and its input
// adjoint: out[o][p] (+)= sum_i coef(o,i) * in[i][p]. Tiled over the plane so
// the input tile set stays cached across output rows; at backbone channel
// counts this beats GEMM, whose packing never pays off at such a small inner
// dimension.
template <class S>
void pw_mix(const S* in, const S* w, int64_t rows_out, int64_t rows_in,
            int64_t plane, bool w_transposed, bool accumulate, S* out) {
  const int64_t tile = rows_in <= 16 ? 4096 : 1024;
  for (int64_t base = 0; base < plane; base += tile) {
    const int64_t m = std::min(tile, plane - base);
    for (int64_t o = 0; o < rows_out; ++o) {
      S* __restrict__ po = out + o * plane + base;
      const S c0 = w_transposed ? w[o] : w[o * rows_in];
      const S* __restrict__ p0 = in + base;
      if (accumulate) {
        for (int64_t p = 0; p < m; ++p) po[p] += c0 * p0[p];
      } else {
        for (int64_t p = 0; p < m; ++p) po[p] = c0 * p0[p];
      }
      for (int64_t i = 1; i < rows_in; ++i) {
        const S ci = w_transposed ? w[i * rows_out + o] : w[o * rows_in + i];
        const S* __restrict__ pi = in + i * plane + base;
        for (int64_t p = 0; p < m; ++p) po[p] += ci * pi[p];
      }
    }
  }
}

// GEMM only pays off once the mixing matrix is large.
constexpr int64_t kPwGemmThreshold = 4096;

}  // namespace

template <class S>
void conv_pw(const S* in, int64_t h_in, int64_t f, int64_t t, const S* w,
             int64_t h_out, int64_t stride, S* out) {
  const int64_t t_out = strided_len(t, stride);
  const int64_t plane_in = f * t;
  const int64_t plane_out = f * t_out;
  if (stride == 1) {
    if (h_in * h_out >= kPwGemmThreshold) {
      // out[h_out x plane] = w[h_out x h_in] * in[h_in x plane]
      gemm(false, false, h_out, plane_out, h_in, S(1), w, h_in, in, plane_in,
           S(0), out, plane_out);
    } else {
      pw_mix(in, w, h_out, h_in, plane_out, false, false, out);
    }
  } else {
    for (int64_t ho = 0; ho < h_out; ++ho) {
      S* __restrict__ po = out + ho * plane_out;
      std::fill(po, po + plane_out, S(0));
      for (int64_t hi = 0; hi < h_in; ++hi) {
        const S wv = w[ho * h_in + hi];
        const S* pi = in + hi * plane_in;
        for (int64_t ff = 0; ff < f; ++ff)
          for (int64_t tt = 0; tt < t_out; ++tt)
            po[ff * t_out + tt] += wv * pi[ff * t + tt * stride];
      }
    }
  }
}

template <class S>
void conv_pw_grad_in(const S* dout, int64_t h_out, int64_t f, int64_t t_out,
                     const S* w, int64_t h_in, int64_t stride, int64_t t_in,
                     S* din, bool accumulate) {
  const int64_t plane_out = f * t_out;
  const int64_t plane_in = f * t_in;
  if (stride == 1) {
    if (h_in * h_out >= kPwGemmThreshold) {
      // din[h_in x plane] (+)= w^T[h_in x h_out] * dout[h_out x plane]
      gemm(true, false, h_in, plane_out, h_out, S(1), w, h_in, dout, plane_out,
           accumulate ? S(1) : S(0), din, plane_out);
    } else {
      // coef(o=hi, i=ho) = w[ho * h_in + hi]
      pw_mix(dout, w, h_in, h_out, plane_out, true, accumulate, din);
    }
  } else {
    if (!accumulate) std::fill(din, din + h_in * plane_in, S(0));
    for (int64_t hi = 0; hi < h_in; ++hi) {
      S* pd = din + hi * plane_in;
      for (int64_t ho = 0; ho < h_out; ++ho) {
        const S wv = w[ho * h_in + hi];
        const S* pg = dout + ho * plane_out;
        for (int64_t ff = 0; ff < f; ++ff)
          for (int64_t tt = 0; tt < t_out; ++tt)
            pd[ff * t_in + tt * stride] += wv * pg[ff * t_out + tt];
      }
    }
  }
}

template <class S>
void conv_pw_grad_w(const S* dout, const S* in, int64_t h_out, int64_t h_in,
                    int64_t plane, S* dw) {
  if (h_in * h_out >= kPwGemmThreshold) {
    // dw[h_out x h_in] += dout[h_out x plane] * in[h_in x plane]^T
    gemm(false, true, h_out, h_in, plane, S(1), dout, plane, in, plane, S(1),
         dw, h_in);
    return;
  }
  // Tiled dot products with double partial sums; the inner dimension is far
  // too small for GEMM to win here.
  std::vector<double> acc(size_t(h_out * h_in), 0.0);
  constexpr int64_t kTile = 4096;
  for (int64_t base = 0; base < plane; base += kTile) {
    const int64_t m = std::min(kTile, plane - base);
    for (int64_t o = 0; o < h_out; ++o) {
      const S* po = dout + o * plane + base;
      for (int64_t i = 0; i < h_in; ++i)
        acc[size_t(o * h_in + i)] +=
            double(fastmath::dot(po, in + i * plane + base, m));
    }
  }
  for (int64_t k = 0; k < h_out * h_in; ++k) dw[k] += S(acc[size_t(k)]);
}

template <class S>
void conv_dw_freq(const S* in, int64_t h, int64_t f, int64_t t, const S* w,
                  S* out) {
  for (int64_t hh = 0; hh < h; ++hh) {
    const S* plane = in + hh * f * t;
    const S w0 = w[hh * 3], w1 = w[hh * 3 + 1], w2 = w[hh * 3 + 2];
    for (int64_t ff = 0; ff < f; ++ff) {
      const S* __restrict__ r0 = plane + refl(ff - 1, f) * t;
      const S* __restrict__ r1 = plane + ff * t;
      const S* __restrict__ r2 = plane + refl(ff + 1, f) * t;
      S* __restrict__ po = out + (hh * f + ff) * t;
      for (int64_t tt = 0; tt < t; ++tt)
        po[tt] = w0 * r0[tt] + w1 * r1[tt] + w2 * r2[tt];
    }
  }
}

template <class S>
void conv_dw_freq_grad(const S* dout, const S* in, int64_t h, int64_t f,
                       int64_t t, const S* w, S* din, S* dw, bool accumulate) {
  const int64_t plane = f * t;
  if (f < 3) {
    // Axis too short to reflect cleanly; scalar fallback.
    if (!accumulate) std::fill(din, din + h * plane, S(0));
    for (int64_t hh = 0; hh < h; ++hh) {
      const S* x = in + hh * plane;
      S* d = din + hh * plane;
      const S w0 = w[hh * 3], w1 = w[hh * 3 + 1], w2 = w[hh * 3 + 2];
      double dw0 = 0, dw1 = 0, dw2 = 0;
      for (int64_t ff = 0; ff < f; ++ff) {
        const int64_t fm = refl(ff - 1, f), fp = refl(ff + 1, f);
        const S* pg = dout + hh * plane + ff * t;
        for (int64_t tt = 0; tt < t; ++tt) {
          const S g = pg[tt];
          dw0 += double(g * x[fm * t + tt]);
          dw1 += double(g * x[ff * t + tt]);
          dw2 += double(g * x[fp * t + tt]);
          d[fm * t + tt] += w0 * g;
          d[ff * t + tt] += w1 * g;
          d[fp * t + tt] += w2 * g;
        }
      }
      dw[hh * 3] += S(dw0);
      dw[hh * 3 + 1] += S(dw1);
      dw[hh * 3 + 2] += S(dw2);
    }
    return;
  }
  for (int64_t hh = 0; hh < h; ++hh) {
    const S* x = in + hh * plane;
    const S* g = dout + hh * plane;
    S* d = din + hh * plane;
    const S w0 = w[hh * 3], w1 = w[hh * 3 + 1], w2 = w[hh * 3 + 2];

    // Input adjoint, gather form: row j collects w2*g[j-1] + w1*g[j] +
    // w0*g[j+1]; reflect-101 adds w0*g[0] into row 1 and w2*g[f-1] into
    // row f-2.
    {
      const S* g0 = g;
      const S* g1 = g + t;
      S* __restrict__ d0 = d;
      if (accumulate) {
        for (int64_t k = 0; k < t; ++k) d0[k] += w1 * g0[k] + w0 * g1[k];
      } else {
        for (int64_t k = 0; k < t; ++k) d0[k] = w1 * g0[k] + w0 * g1[k];
      }
    }
    for (int64_t j = 1; j + 1 < f; ++j) {
      const S* __restrict__ gm = g + (j - 1) * t;
      const S* __restrict__ gc = g + j * t;
      const S* __restrict__ gp = g + (j + 1) * t;
      S* __restrict__ dj = d + j * t;
      if (accumulate) {
        for (int64_t k = 0; k < t; ++k)
          dj[k] += w2 * gm[k] + w1 * gc[k] + w0 * gp[k];
      } else {
        for (int64_t k = 0; k < t; ++k)
          dj[k] = w2 * gm[k] + w1 * gc[k] + w0 * gp[k];
      }
    }
    {
      const S* gm = g + (f - 2) * t;
      const S* gl = g + (f - 1) * t;
      S* __restrict__ dl = d + (f - 1) * t;
      if (accumulate) {
        for (int64_t k = 0; k < t; ++k) dl[k] += w2 * gm[k] + w1 * gl[k];
      } else {
        for (int64_t k = 0; k < t; ++k) dl[k] = w2 * gm[k] + w1 * gl[k];
      }
    }
    {
      const S* g0 = g;
      S* __restrict__ d1 = d + t;
      for (int64_t k = 0; k < t; ++k) d1[k] += w0 * g0[k];
      const S* gl = g + (f - 1) * t;
      S* __restrict__ dp = d + (f - 2) * t;
      for (int64_t k = 0; k < t; ++k) dp[k] += w2 * gl[k];
    }

    // Weight adjoints: per-output-row dot products against the tap's source
    // row (reflected at the ends).
    double dw0 = fastmath::dot(g, x + t, t);
    double dw1 = fastmath::dot(g, x, t);
    double dw2 = fastmath::dot(g, x + t, t);
    for (int64_t j = 1; j < f; ++j) {
      const S* gj = g + j * t;
      dw0 += fastmath::dot(gj, x + (j - 1) * t, t);
      dw1 += fastmath::dot(gj, x + j * t, t);
      dw2 += fastmath::dot(gj, x + (j + 1 < f ? j + 1 : f - 2) * t, t);
    }
    dw[hh * 3] += S(dw0);
    dw[hh * 3 + 1] += S(dw1);
    dw[hh * 3 + 2] += S(dw2);
  }
}

template <class S>
void conv_dw_time(const S* in, int64_t h, int64_t f, int64_t t_in, const S* w,
                  int64_t stride, S* out) {
  const int64_t t_out = strided_len(t_in, stride);
  for (int64_t hh = 0; hh < h; ++hh) {
    const S w0 = w[hh * 3], w1 = w[hh * 3 + 1], w2 = w[hh * 3 + 2];
    for (int64_t ff = 0; ff < f; ++ff) {
      const S* __restrict__ row = in + (hh * f + ff) * t_in;
      S* __restrict__ po = out + (hh * f + ff) * t_out;
      if (stride == 1 && t_in >= 3) {
        po[0] = w0 * row[1] + w1 * row[0] + w2 * row[1];
        for (int64_t tt = 1; tt < t_in - 1; ++tt)
          po[tt] = w0 * row[tt - 1] + w1 * row[tt] + w2 * row[tt + 1];
        po[t_in - 1] =
            w0 * row[t_in - 2] + w1 * row[t_in - 1] + w2 * row[t_in - 2];
      } else {
        for (int64_t tt = 0; tt < t_out; ++tt) {
          const int64_t c = tt * stride;
          po[tt] = w0 * row[refl(c - 1, t_in)] + w1 * row[refl(c, t_in)] +
                   w2 * row[refl(c + 1, t_in)];
        }
      }
    }
  }
}

template <class S>
void conv_dw_time_grad(const S* dout, const S* in, int64_t h, int64_t f,
                       int64_t t_in, const S* w, int64_t stride, S* din, S* dw,
                       bool accumulate) {
  const int64_t t_out = strided_len(t_in, stride);
  const bool fast1 = stride == 1 && t_in >= 3;
  const bool fast2 = stride == 2 && t_in >= 3;
  if (!fast1 && !fast2) {
    if (!accumulate) std::fill(din, din + h * f * t_in, S(0));
    for (int64_t hh = 0; hh < h; ++hh) {
      const S w0 = w[hh * 3], w1 = w[hh * 3 + 1], w2 = w[hh * 3 + 2];
      double dw0 = 0, dw1 = 0, dw2 = 0;
      for (int64_t ff = 0; ff < f; ++ff) {
        const S* row = in + (hh * f + ff) * t_in;
        S* drow = din + (hh * f + ff) * t_in;
        const S* pg = dout + (hh * f + ff) * t_out;
        for (int64_t tt = 0; tt < t_out; ++tt) {
          const int64_t c = tt * stride;
          const int64_t im = refl(c - 1, t_in), i0 = refl(c, t_in),
                        ip = refl(c + 1, t_in);
          const S g = pg[tt];
          dw0 += double(g * row[im]);
          dw1 += double(g * row[i0]);
          dw2 += double(g * row[ip]);
          drow[im] += w0 * g;
          drow[i0] += w1 * g;
          drow[ip] += w2 * g;
        }
      }
      dw[hh * 3] += S(dw0);
      dw[hh * 3 + 1] += S(dw1);
      dw[hh * 3 + 2] += S(dw2);
    }
    return;
  }

  for (int64_t hh = 0; hh < h; ++hh) {
    const S w0 = w[hh * 3], w1 = w[hh * 3 + 1], w2 = w[hh * 3 + 2];
    double dw0 = 0, dw1 = 0, dw2 = 0;
    for (int64_t ff = 0; ff < f; ++ff) {
      const S* __restrict__ x = in + (hh * f + ff) * t_in;
      const S* __restrict__ g = dout + (hh * f + ff) * t_out;
      S* __restrict__ d = din + (hh * f + ff) * t_in;
      if (fast1) {
        const int64_t n = t_in;
        // Gather form with reflect-101 boundary corrections.
        if (accumulate) {
          d[0] += w1 * g[0] + w0 * g[1];
          for (int64_t j = 1; j + 1 < n; ++j)
            d[j] += w2 * g[j - 1] + w1 * g[j] + w0 * g[j + 1];
          d[n - 1] += w2 * g[n - 2] + w1 * g[n - 1];
        } else {
          d[0] = w1 * g[0] + w0 * g[1];
          for (int64_t j = 1; j + 1 < n; ++j)
            d[j] = w2 * g[j - 1] + w1 * g[j] + w0 * g[j + 1];
          d[n - 1] = w2 * g[n - 2] + w1 * g[n - 1];
        }
        d[1] += w0 * g[0];
        d[n - 2] += w2 * g[n - 1];
        dw0 += double(g[0] * x[1]) + fastmath::dot(g + 1, x, n - 1);
        dw1 += fastmath::dot(g, x, n);
        dw2 += fastmath::dot(g, x + 1, n - 1) + double(g[n - 1] * x[n - 2]);
      } else {
        // stride 2: output position j reads input 2j-1, 2j, 2j+1 (reflected
        // at the ends). Gather over input parity: even i=2m sees w1*g[m];
        // odd i=2m+1 sees w2*g[m] + w0*g[m+1].
        const int64_t n = t_in;
        if (accumulate) {
          for (int64_t m = 0; m < t_out; ++m) d[2 * m] += w1 * g[m];
          for (int64_t m = 0; 2 * m + 1 < n; ++m)
            d[2 * m + 1] +=
                w2 * g[m] + (m + 1 < t_out ? w0 * g[m + 1] : S(0));
        } else {
          for (int64_t m = 0; m < t_out; ++m) d[2 * m] = w1 * g[m];
          for (int64_t m = 0; 2 * m + 1 < n; ++m)
            d[2 * m + 1] = w2 * g[m] + (m + 1 < t_out ? w0 * g[m + 1] : S(0));
        }
        // Reflections: c=0 sends its w0 tap to input 1; when n is odd the
        // last window's w2 tap lands on input n-2.
        d[1] += w0 * g[0];
        if (n % 2 == 1) d[n - 2] += w2 * g[t_out - 1];
        // Weight adjoints: interior windows have in-range taps.
        const int64_t j1 = std::min(t_out, (n - 2) / 2 + 1);
        dw0 += double(g[0] * x[1]);
        dw1 += double(g[0] * x[0]);
        dw2 += double(g[0] * x[1 < n ? 1 : 0]);
        for (int64_t j = 1; j < j1; ++j) {
          const int64_t c = 2 * j;
          dw0 += double(g[j] * x[c - 1]);
          dw1 += double(g[j] * x[c]);
          dw2 += double(g[j] * x[c + 1]);
        }
        for (int64_t j = std::max<int64_t>(j1, 1); j < t_out; ++j) {
          const int64_t c = 2 * j;
          dw0 += double(g[j] * x[refl(c - 1, n)]);
          dw1 += double(g[j] * x[refl(c, n)]);
          dw2 += double(g[j] * x[refl(c + 1, n)]);
        }
      }
    }
    dw[hh * 3] += S(dw0);
    dw[hh * 3 + 1] += S(dw1);
    dw[hh * 3 + 2] += S(dw2);
  }
}

#define PHASOR_INSTANTIATE_KERNELS(S)                                          \
  template void conv_pw(const S*, int64_t, int64_t, int64_t, const S*,         \
                        int64_t, int64_t, S*);                                 \
  template void conv_pw_grad_in(const S*, int64_t, int64_t, int64_t, const S*, \
                                int64_t, int64_t, int64_t, S*, bool);          \
  template void conv_pw_grad_w(const S*, const S*, int64_t, int64_t, int64_t,  \
                               S*);                                            \
  template void conv_dw_freq(const S*, int64_t, int64_t, int64_t, const S*,    \
                             S*);                                              \
  template void conv_dw_freq_grad(const S*, const S*, int64_t, int64_t,        \
                                  int64_t, const S*, S*, S*, bool);            \
  template void conv_dw_time(const S*, int64_t, int64_t, int64_t, const S*,    \
                             int64_t, S*);                                     \
  template void conv_dw_time_grad(const S*, const S*, int64_t, int64_t,        \
                                  int64_t, const S*, int64_t, S*, S*, bool);

PHASOR_INSTANTIATE_KERNELS(float)
PHASOR_INSTANTIATE_KERNELS(double)

}  // namespace phasor::kernels
