#pragma once

#include "phasor/tape.hpp"

// Differentiable op library. Every op computes its forward value eagerly and
// records a backward closure on the tape; backward closures accumulate into
// input adjoints and skip themselves when no output adjoint exists.
namespace phasor::ops {

using phasor::CVal;
using phasor::Tape;
using phasor::Val;

// ---- real elementwise / linear algebra ----
template <class S> Val<S> t_add(Tape<S>& t, Val<S> a, Val<S> b);
template <class S> Val<S> t_sub(Tape<S>& t, Val<S> a, Val<S> b);
template <class S> Val<S> t_mul(Tape<S>& t, Val<S> a, Val<S> b);
template <class S> Val<S> t_scale(Tape<S>& t, Val<S> a, S c);
// a: [R, C], b: [C] broadcast-added to every row
template <class S> Val<S> t_add_rowvec(Tape<S>& t, Val<S> a, Val<S> b);
template <class S> Val<S> t_relu(Tape<S>& t, Val<S> a);
template <class S> Val<S> t_sum(Tape<S>& t, Val<S> a);          // -> scalar
template <class S> Val<S> t_mean_rows(Tape<S>& t, Val<S> a);    // [R,C] -> [C]
template <class S> Val<S> t_reshape(Tape<S>& t, Val<S> a, Shape s);
template <class S> Val<S> t_transpose(Tape<S>& t, Val<S> a);
template <class S>
Val<S> t_matmul(Tape<S>& t, Val<S> a, Val<S> b, bool trans_a = false,
                bool trans_b = false);
// Per-row L2 normalization of [R, C]; zero rows are a contract violation.
template <class S> Val<S> t_rownorm(Tape<S>& t, Val<S> a);
// Stack k equally sized values (treated as flat rows) into [k, D].
template <class S>
Val<S> t_stack_rows(Tape<S>& t, const std::vector<Val<S>>& rows);
template <class S>
CVal<S> c_stack_rows(Tape<S>& t, const std::vector<CVal<S>>& rows);

// ---- complex ops (CVal = independent re/im pair) ----
template <class S> CVal<S> c_add(Tape<S>& t, CVal<S> a, CVal<S> b);
template <class S> CVal<S> c_conj(Tape<S>& t, CVal<S> a);
template <class S> CVal<S> c_transpose(Tape<S>& t, CVal<S> a);
template <class S>
CVal<S> c_matmul(Tape<S>& t, CVal<S> a, CVal<S> b, bool trans_a = false,
                 bool trans_b = false);
template <class S> CVal<S> c_reshape(Tape<S>& t, CVal<S> a, Shape s);
// Elementwise |z| with zero subgradient at z = 0.
template <class S> Val<S> c_abs(Tape<S>& t, CVal<S> a);
// Per-row z / sqrt(mean_d |z_d|^2 + eps).
template <class S> CVal<S> c_rmsnorm(Tape<S>& t, CVal<S> a, S eps);
// Per-row-broadcast modReLU: e^{i angle(z)} * ReLU(|z| - b), b real [D].
template <class S> CVal<S> c_modrelu(Tape<S>& t, CVal<S> a, Val<S> b);
// Per-row global-phase-preserving L2 normalization; zero rows are an error.
template <class S> CVal<S> c_rownorm(Tape<S>& t, CVal<S> a);
// Learned spectral pooling: real [T', D] -> rfft over the T' axis -> keep the
// first c_bins rows (zero-padding when floor(T'/2)+1 < c_bins).
template <class S> CVal<S> c_spectral_pool(Tape<S>& t, Val<S> z_time, int64_t c_bins);

// ---- axial backbone primitives, layout [H, F, T] ----
template <class S>
Val<S> t_conv_pw(Tape<S>& t, Val<S> x, Val<S> w, int64_t stride = 1);
template <class S> Val<S> t_conv_dw_freq(Tape<S>& t, Val<S> x, Val<S> w);
template <class S>
Val<S> t_conv_dw_time(Tape<S>& t, Val<S> x, Val<S> w, int64_t stride);
template <class S> Val<S> t_subsample_time(Tape<S>& t, Val<S> x, int64_t stride);
template <class S>
Val<S> t_groupnorm(Tape<S>& t, Val<S> x, Val<S> gain, Val<S> bias,
                   int64_t groups, S eps);
// Fused variants used by the backbone blocks: same normalization with the
// activation clamp (relu) or the residual add folded into the output pass.
template <class S>
Val<S> t_groupnorm_relu(Tape<S>& t, Val<S> x, Val<S> gain, Val<S> bias,
                        int64_t groups, S eps);
template <class S>
Val<S> t_groupnorm_add(Tape<S>& t, Val<S> x, Val<S> gain, Val<S> bias,
                       Val<S> skip, int64_t groups, S eps);

// ---- contrastive loss ----
// Symmetrized label-smoothed InfoNCE over a [B, B] score matrix: mean of the
// row-wise and column-wise smoothed cross-entropies. Uniform scores give
// exactly ln B for any smoothing value.
template <class S> Val<S> t_infonce(Tape<S>& t, Val<S> scores, S smoothing);

}  // namespace phasor::ops
