#pragma once

#include <cstdint>

// Raw single-thread kernels for the axial backbone, layout [H, F, T] with T
// contiguous. Pointwise convs route through GEMM when unstrided; depthwise
// convs are broadcast-FMA loops over T, with backward passes written in
// gather form so they vectorize without read-modify-write hazards.
namespace phasor::kernels {

// Pointwise (1x1) conv with optional time stride:
//   out[ho, f, t] = sum_hi w[ho, hi] * in[hi, f, t*stride]
template <class S>
void conv_pw(const S* in, int64_t h_in, int64_t f, int64_t t, const S* w,
             int64_t h_out, int64_t stride, S* out);

// Adjoint w.r.t. input: din[hi, f, t*stride] (+)= sum_ho w[ho, hi] * dout[...]
// With accumulate=false the whole din buffer is overwritten.
template <class S>
void conv_pw_grad_in(const S* dout, int64_t h_out, int64_t f, int64_t t_out,
                     const S* w, int64_t h_in, int64_t stride, int64_t t_in,
                     S* din, bool accumulate);

// Adjoint w.r.t. the mixing matrix: dw[ho, hi] += <dout[ho], in[hi]>.
template <class S>
void conv_pw_grad_w(const S* dout, const S* in, int64_t h_out, int64_t h_in,
                    int64_t plane, S* dw);

// Depthwise 3-tap conv along the frequency axis, reflect-101 padding:
//   out[h, f, t] = sum_{d=0..2} w[h, d] * in[h, refl(f+d-1), t]
template <class S>
void conv_dw_freq(const S* in, int64_t h, int64_t f, int64_t t, const S* w,
                  S* out);

// din (+)= adjoint w.r.t. input (overwritten when accumulate=false);
// dw += adjoint w.r.t. the 3 taps (always accumulates).
template <class S>
void conv_dw_freq_grad(const S* dout, const S* in, int64_t h, int64_t f,
                       int64_t t, const S* w, S* din, S* dw, bool accumulate);

// Depthwise 3-tap conv along the time axis with stride, reflect-101 padding:
//   out[h, f, t] = sum_d w[h, d] * in[h, f, refl(t*stride+d-1)]
template <class S>
void conv_dw_time(const S* in, int64_t h, int64_t f, int64_t t_in, const S* w,
                  int64_t stride, S* out);

template <class S>
void conv_dw_time_grad(const S* dout, const S* in, int64_t h, int64_t f,
                       int64_t t_in, const S* w, int64_t stride, S* din, S* dw,
                       bool accumulate);

// Output length of a stride-s conv with same-style padding: ceil(n / s).
inline int64_t strided_len(int64_t n, int64_t s) { return (n + s - 1) / s; }

}  // namespace phasor::kernels
