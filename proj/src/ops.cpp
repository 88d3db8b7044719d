#include "phasor/ops.hpp"

#include "fastmath.hpp"

#include <cmath>

#include "phasor/conv_kernels.hpp"
#include "phasor/fft.hpp"

namespace phasor::ops {

namespace {
// y += g ⊙ x
template <class S>
void axpy_mul(const Tensor<S>& g, const Tensor<S>& x, Tensor<S>& y) {
  const S* pg = g.data();
  const S* px = x.data();
  S* py = y.data();
  for (int64_t i = 0, n = g.numel(); i < n; ++i) py[i] += pg[i] * px[i];
}
}  // namespace

template <class S>
Val<S> t_add(Tape<S>& t, Val<S> a, Val<S> b) {
  Val<S> out = t.make_val(add(t.val(a), t.val(b)));
  t.push_back_fn([a, b, out](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    tp.add_adj(a, g);
    tp.add_adj(b, g);
  });
  return out;
}

template <class S>
Val<S> t_sub(Tape<S>& t, Val<S> a, Val<S> b) {
  Val<S> out = t.make_val(sub(t.val(a), t.val(b)));
  t.push_back_fn([a, b, out](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    tp.add_adj(a, g);
    axpy(S(-1), g, tp.adj(b));
  });
  return out;
}

template <class S>
Val<S> t_mul(Tape<S>& t, Val<S> a, Val<S> b) {
  Val<S> out = t.make_val(mul(t.val(a), t.val(b)));
  t.push_back_fn([a, b, out](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    axpy_mul(g, tp.val(b), tp.adj(a));
    axpy_mul(g, tp.val(a), tp.adj(b));
  });
  return out;
}

template <class S>
Val<S> t_scale(Tape<S>& t, Val<S> a, S c) {
  Val<S> out = t.make_val(scale(t.val(a), c));
  t.push_back_fn([a, c, out](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    axpy(c, tp.adj(out), tp.adj(a));
  });
  return out;
}

template <class S>
Val<S> t_add_rowvec(Tape<S>& t, Val<S> a, Val<S> b) {
  const Tensor<S>& av = t.val(a);
  const Tensor<S>& bv = t.val(b);
  PHASOR_CHECK(av.rank() == 2 && bv.rank() == 1 && av.dim(1) == bv.dim(0),
               "add_rowvec: shapes ", shape_str(av.shape()), " vs ",
               shape_str(bv.shape()));
  Tensor<S> ov(av.shape());
  const int64_t r = av.dim(0), c = av.dim(1);
  for (int64_t i = 0; i < r; ++i)
    for (int64_t j = 0; j < c; ++j)
      ov[i * c + j] = av[i * c + j] + bv[j];
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([a, b, out, r, c](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    tp.add_adj(a, g);
    Tensor<S>& gb = tp.adj(b);
    for (int64_t i = 0; i < r; ++i)
      for (int64_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
  });
  return out;
}

template <class S>
Val<S> t_relu(Tape<S>& t, Val<S> a) {
  const Tensor<S>& av = t.val(a);
  Tensor<S> ov = Tensor<S>::uninit(av.shape());
  for (int64_t i = 0, n = av.numel(); i < n; ++i)
    ov[i] = av[i] > S(0) ? av[i] : S(0);
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([a, out](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    const Tensor<S>& x = tp.val(a);
    bool fresh = false;
    Tensor<S>& ga = tp.adj_raw(a, &fresh);
    if (fresh) {
      for (int64_t i = 0, n = x.numel(); i < n; ++i)
        ga[i] = x[i] > S(0) ? g[i] : S(0);
    } else {
      for (int64_t i = 0, n = x.numel(); i < n; ++i)
        if (x[i] > S(0)) ga[i] += g[i];
    }
  });
  return out;
}

template <class S>
Val<S> t_sum(Tape<S>& t, Val<S> a) {
  Tensor<S> ov(Shape{});
  ov[0] = sum(t.val(a));
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([a, out](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const S g = tp.adj(out)[0];
    Tensor<S>& ga = tp.adj(a);
    for (int64_t i = 0, n = ga.numel(); i < n; ++i) ga[i] += g;
  });
  return out;
}

template <class S>
Val<S> t_mean_rows(Tape<S>& t, Val<S> a) {
  const Tensor<S>& av = t.val(a);
  PHASOR_CHECK(av.rank() == 2 && av.dim(0) >= 1, "mean_rows: nonempty [R,C] required");
  const int64_t r = av.dim(0), c = av.dim(1);
  Tensor<S> ov({c});
  for (int64_t i = 0; i < r; ++i)
    for (int64_t j = 0; j < c; ++j) ov[j] += av[i * c + j];
  const S inv = S(1) / S(r);
  for (int64_t j = 0; j < c; ++j) ov[j] *= inv;
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([a, out, r, c, inv](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    Tensor<S>& ga = tp.adj(a);
    for (int64_t i = 0; i < r; ++i)
      for (int64_t j = 0; j < c; ++j) ga[i * c + j] += g[j] * inv;
  });
  return out;
}

template <class S>
Val<S> t_reshape(Tape<S>& t, Val<S> a, Shape s) {
  Val<S> out = t.make_val(t.val(a).reshape(s));
  Shape orig = t.val(a).shape();
  t.push_back_fn([a, out, orig](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    tp.add_adj(a, tp.adj(out).reshape(orig));
  });
  return out;
}

template <class S>
Val<S> t_transpose(Tape<S>& t, Val<S> a) {
  Val<S> out = t.make_val(transpose2d(t.val(a)));
  t.push_back_fn([a, out](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    tp.add_adj(a, transpose2d(tp.adj(out)));
  });
  return out;
}

template <class S>
Val<S> t_matmul(Tape<S>& t, Val<S> a, Val<S> b, bool trans_a, bool trans_b) {
  Val<S> out = t.make_val(matmul(t.val(a), t.val(b), trans_a, trans_b));
  t.push_back_fn([a, b, out, trans_a, trans_b](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    const Tensor<S>& av = tp.val(a);
    const Tensor<S>& bv = tp.val(b);
    Tensor<S>& ga = tp.adj(a);
    Tensor<S>& gb = tp.adj(b);
    if (!trans_a && !trans_b) {        // C = A·B
      matmul_acc(g, bv, ga, false, true);
      matmul_acc(av, g, gb, true, false);
    } else if (trans_a && !trans_b) {  // C = Aᵀ·B
      matmul_acc(bv, g, ga, false, true);
      matmul_acc(av, g, gb, false, false);
    } else if (!trans_a && trans_b) {  // C = A·Bᵀ
      matmul_acc(g, bv, ga, false, false);
      matmul_acc(g, av, gb, true, false);
    } else {                           // C = Aᵀ·Bᵀ
      matmul_acc(bv, g, ga, true, true);
      matmul_acc(g, av, gb, true, true);
    }
  });
  return out;
}

template <class S>
Val<S> t_rownorm(Tape<S>& t, Val<S> a) {
  const Tensor<S>& av = t.val(a);
  PHASOR_CHECK(av.rank() == 2, "rownorm: [R,C] required");
  const int64_t r = av.dim(0), c = av.dim(1);
  Tensor<S> ov(av.shape());
  Tensor<S> norms({r});
  for (int64_t i = 0; i < r; ++i) {
    double acc = 0;  // double accumulation keeps ‖row‖ = 1 within 1e-6 at f32
    for (int64_t j = 0; j < c; ++j)
      acc += double(av[i * c + j]) * double(av[i * c + j]);
    const S n = S(std::sqrt(acc));
    PHASOR_CHECK(n > S(0), "zero-norm embedding");
    norms[i] = n;
    const S inv = S(1) / n;
    for (int64_t j = 0; j < c; ++j) ov[i * c + j] = av[i * c + j] * inv;
  }
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([a, out, norms, r, c](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    const Tensor<S>& x = tp.val(a);
    Tensor<S>& ga = tp.adj(a);
    for (int64_t i = 0; i < r; ++i) {
      const S n = norms[i];
      S gdot(0);
      for (int64_t j = 0; j < c; ++j) gdot += g[i * c + j] * x[i * c + j];
      const S inv = S(1) / n, inv3 = inv * inv * inv;
      for (int64_t j = 0; j < c; ++j)
        ga[i * c + j] += g[i * c + j] * inv - x[i * c + j] * gdot * inv3;
    }
  });
  return out;
}

// ---- complex ----

template <class S>
CVal<S> c_add(Tape<S>& t, CVal<S> a, CVal<S> b) {
  return {t_add(t, a.re, b.re), t_add(t, a.im, b.im)};
}

template <class S>
CVal<S> c_conj(Tape<S>& t, CVal<S> a) {
  return {a.re, t_scale(t, a.im, S(-1))};
}

template <class S>
CVal<S> c_transpose(Tape<S>& t, CVal<S> a) {
  return {t_transpose(t, a.re), t_transpose(t, a.im)};
}

template <class S>
CVal<S> c_matmul(Tape<S>& t, CVal<S> a, CVal<S> b, bool trans_a, bool trans_b) {
  Val<S> rr = t_matmul(t, a.re, b.re, trans_a, trans_b);
  Val<S> ii = t_matmul(t, a.im, b.im, trans_a, trans_b);
  Val<S> ri = t_matmul(t, a.re, b.im, trans_a, trans_b);
  Val<S> ir = t_matmul(t, a.im, b.re, trans_a, trans_b);
  return {t_sub(t, rr, ii), t_add(t, ri, ir)};
}

template <class S>
CVal<S> c_reshape(Tape<S>& t, CVal<S> a, Shape s) {
  return {t_reshape(t, a.re, s), t_reshape(t, a.im, s)};
}

template <class S>
Val<S> c_abs(Tape<S>& t, CVal<S> a) {
  const Tensor<S>& x = t.val(a.re);
  const Tensor<S>& y = t.val(a.im);
  Tensor<S> m(x.shape());
  for (int64_t i = 0, n = x.numel(); i < n; ++i)
    m[i] = std::sqrt(x[i] * x[i] + y[i] * y[i]);
  Val<S> out = t.make_val(m);
  t.push_back_fn([a, out, m](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    const Tensor<S>& x = tp.val(a.re);
    const Tensor<S>& y = tp.val(a.im);
    Tensor<S>& gx = tp.adj(a.re);
    Tensor<S>& gy = tp.adj(a.im);
    for (int64_t i = 0, n = x.numel(); i < n; ++i) {
      if (m[i] > S(0)) {
        const S inv = g[i] / m[i];
        gx[i] += x[i] * inv;
        gy[i] += y[i] * inv;
      }
    }
  });
  return out;
}

template <class S>
CVal<S> c_rmsnorm(Tape<S>& t, CVal<S> a, S eps) {
  const Tensor<S>& x = t.val(a.re);
  const Tensor<S>& y = t.val(a.im);
  PHASOR_CHECK(x.rank() == 2, "rmsnorm: [R,D] required");
  const int64_t r = x.dim(0), d = x.dim(1);
  Tensor<S> ox(x.shape()), oy(x.shape());
  Tensor<S> rms({r});
  for (int64_t i = 0; i < r; ++i) {
    S acc(0);
    for (int64_t j = 0; j < d; ++j) {
      const int64_t k = i * d + j;
      acc += x[k] * x[k] + y[k] * y[k];
    }
    const S rr = std::sqrt(acc / S(d) + eps);
    rms[i] = rr;
    const S inv = S(1) / rr;
    for (int64_t j = 0; j < d; ++j) {
      const int64_t k = i * d + j;
      ox[k] = x[k] * inv;
      oy[k] = y[k] * inv;
    }
  }
  Val<S> ore = t.make_val(std::move(ox));
  Val<S> oim = t.make_val(std::move(oy));
  t.push_back_fn([a, ore, oim, rms, r, d](Tape<S>& tp) {
    const bool hr = tp.has_adj(ore), hi = tp.has_adj(oim);
    if (!hr && !hi) return;
    const Tensor<S>& x = tp.val(a.re);
    const Tensor<S>& y = tp.val(a.im);
    Tensor<S>& gx = tp.adj(a.re);
    Tensor<S>& gy = tp.adj(a.im);
    const Tensor<S>* gr = hr ? &tp.adj(ore) : nullptr;
    const Tensor<S>* gi = hi ? &tp.adj(oim) : nullptr;
    for (int64_t i = 0; i < r; ++i) {
      const S rr = rms[i];
      const S inv = S(1) / rr;
      S gdot(0);
      for (int64_t j = 0; j < d; ++j) {
        const int64_t k = i * d + j;
        if (gr) gdot += (*gr)[k] * x[k];
        if (gi) gdot += (*gi)[k] * y[k];
      }
      const S c = gdot * inv * inv * inv / S(d);
      for (int64_t j = 0; j < d; ++j) {
        const int64_t k = i * d + j;
        gx[k] += (gr ? (*gr)[k] * inv : S(0)) - x[k] * c;
        gy[k] += (gi ? (*gi)[k] * inv : S(0)) - y[k] * c;
      }
    }
  });
  return {ore, oim};
}

template <class S>
CVal<S> c_modrelu(Tape<S>& t, CVal<S> a, Val<S> b) {
  const Tensor<S>& x = t.val(a.re);
  const Tensor<S>& y = t.val(a.im);
  const Tensor<S>& bv = t.val(b);
  PHASOR_CHECK(x.rank() == 2 && bv.rank() == 1 && x.dim(1) == bv.dim(0),
               "modrelu: [R,D] input with [D] bias required");
  const int64_t r = x.dim(0), d = x.dim(1);
  Tensor<S> ox(x.shape()), oy(x.shape());
  for (int64_t i = 0; i < r; ++i)
    for (int64_t j = 0; j < d; ++j) {
      const int64_t k = i * d + j;
      const S m = std::sqrt(x[k] * x[k] + y[k] * y[k]);
      if (m > S(0) && m > bv[j]) {
        const S gate = (m - bv[j]) / m;
        ox[k] = x[k] * gate;
        oy[k] = y[k] * gate;
      }
    }
  Val<S> ore = t.make_val(std::move(ox));
  Val<S> oim = t.make_val(std::move(oy));
  t.push_back_fn([a, b, ore, oim, r, d](Tape<S>& tp) {
    const bool hr = tp.has_adj(ore), hi = tp.has_adj(oim);
    if (!hr && !hi) return;
    const Tensor<S>& x = tp.val(a.re);
    const Tensor<S>& y = tp.val(a.im);
    const Tensor<S>& bv = tp.val(b);
    Tensor<S>& gx = tp.adj(a.re);
    Tensor<S>& gy = tp.adj(a.im);
    Tensor<S>& gb = tp.adj(b);
    const Tensor<S>* gr = hr ? &tp.adj(ore) : nullptr;
    const Tensor<S>* gi = hi ? &tp.adj(oim) : nullptr;
    for (int64_t i = 0; i < r; ++i)
      for (int64_t j = 0; j < d; ++j) {
        const int64_t k = i * d + j;
        const S m = std::sqrt(x[k] * x[k] + y[k] * y[k]);
        if (!(m > S(0) && m > bv[j])) continue;
        const S grk = gr ? (*gr)[k] : S(0);
        const S gik = gi ? (*gi)[k] : S(0);
        const S gate = S(1) - bv[j] / m;
        const S zdot = x[k] * grk + y[k] * gik;
        const S c = bv[j] / (m * m * m);
        gx[k] += grk * gate + c * x[k] * zdot;
        gy[k] += gik * gate + c * y[k] * zdot;
        gb[j] -= zdot / m;
      }
  });
  return {ore, oim};
}

template <class S>
CVal<S> c_rownorm(Tape<S>& t, CVal<S> a) {
  const Tensor<S>& x = t.val(a.re);
  const Tensor<S>& y = t.val(a.im);
  PHASOR_CHECK(x.rank() == 2, "rownorm: [R,D] required");
  const int64_t r = x.dim(0), d = x.dim(1);
  Tensor<S> ox(x.shape()), oy(x.shape());
  Tensor<S> norms({r});
  for (int64_t i = 0; i < r; ++i) {
    double acc = 0;  // double accumulation keeps ‖row‖ = 1 within 1e-6 at f32
    for (int64_t j = 0; j < d; ++j) {
      const int64_t k = i * d + j;
      acc += double(x[k]) * double(x[k]) + double(y[k]) * double(y[k]);
    }
    const S n = S(std::sqrt(acc));
    PHASOR_CHECK(n > S(0), "degenerate embedding");
    norms[i] = n;
    const S inv = S(1) / n;
    for (int64_t j = 0; j < d; ++j) {
      const int64_t k = i * d + j;
      ox[k] = x[k] * inv;
      oy[k] = y[k] * inv;
    }
  }
  Val<S> ore = t.make_val(std::move(ox));
  Val<S> oim = t.make_val(std::move(oy));
  t.push_back_fn([a, ore, oim, norms, r, d](Tape<S>& tp) {
    const bool hr = tp.has_adj(ore), hi = tp.has_adj(oim);
    if (!hr && !hi) return;
    const Tensor<S>& x = tp.val(a.re);
    const Tensor<S>& y = tp.val(a.im);
    Tensor<S>& gx = tp.adj(a.re);
    Tensor<S>& gy = tp.adj(a.im);
    const Tensor<S>* gr = hr ? &tp.adj(ore) : nullptr;
    const Tensor<S>* gi = hi ? &tp.adj(oim) : nullptr;
    for (int64_t i = 0; i < r; ++i) {
      const S inv = S(1) / norms[i];
      const S inv3 = inv * inv * inv;
      S gdot(0);
      for (int64_t j = 0; j < d; ++j) {
        const int64_t k = i * d + j;
        if (gr) gdot += (*gr)[k] * x[k];
        if (gi) gdot += (*gi)[k] * y[k];
      }
      for (int64_t j = 0; j < d; ++j) {
        const int64_t k = i * d + j;
        gx[k] += (gr ? (*gr)[k] * inv : S(0)) - x[k] * gdot * inv3;
        gy[k] += (gi ? (*gi)[k] * inv : S(0)) - y[k] * gdot * inv3;
      }
    }
  });
  return {ore, oim};
}

template <class S>
CVal<S> c_spectral_pool(Tape<S>& t, Val<S> z_time, int64_t c_bins) {
  const Tensor<S>& z = t.val(z_time);
  PHASOR_CHECK(z.rank() == 2 && z.dim(0) >= 1, "spectral_pool: [T',D] required");
  const int64_t t_len = z.dim(0), d = z.dim(1);
  const int64_t k_len = t_len / 2 + 1;
  const int64_t keep = std::min(c_bins, k_len);

  CTensor<S> spec = rfft_time(transpose2d(z));  // [D, K]
  Tensor<S> sre({c_bins, d}), sim({c_bins, d});
  for (int64_t c = 0; c < keep; ++c)
    for (int64_t j = 0; j < d; ++j) {
      sre[c * d + j] = spec.re[j * k_len + c];
      sim[c * d + j] = spec.im[j * k_len + c];
    }
  Val<S> ore = t.make_val(std::move(sre));
  Val<S> oim = t.make_val(std::move(sim));
  t.push_back_fn([z_time, ore, oim, t_len, d, k_len, keep](Tape<S>& tp) {
    const bool hr = tp.has_adj(ore), hi = tp.has_adj(oim);
    if (!hr && !hi) return;
    CTensor<S> g({d, k_len});  // adjoint in [D, K] layout, padded bins dropped
    for (int64_t c = 0; c < keep; ++c)
      for (int64_t j = 0; j < d; ++j) {
        const int64_t cd = c * d + j;
        g.re[j * k_len + c] = hr ? tp.adj(ore)[cd] : S(0);
        g.im[j * k_len + c] = hi ? tp.adj(oim)[cd] : S(0);
      }
    tp.add_adj(z_time, transpose2d(rfft_time_adjoint(g, t_len)));
  });
  return {ore, oim};
}

// ---- backbone ----

template <class S>
Val<S> t_conv_pw(Tape<S>& t, Val<S> x, Val<S> w, int64_t stride) {
  const Tensor<S>& xv = t.val(x);
  const Tensor<S>& wv = t.val(w);
  PHASOR_CHECK(xv.rank() == 3 && wv.rank() == 2 && wv.dim(1) == xv.dim(0),
               "conv_pw: x [H,F,T] with w [H_out,H] required, got ",
               shape_str(xv.shape()), " and ", shape_str(wv.shape()));
  const int64_t h_in = xv.dim(0), f = xv.dim(1), t_in = xv.dim(2);
  const int64_t h_out = wv.dim(0);
  const int64_t t_out = kernels::strided_len(t_in, stride);
  PHASOR_CHECK(t_out >= 1, "conv_pw: empty time axis after stride");
  Tensor<S> ov = Tensor<S>::uninit({h_out, f, t_out});
  kernels::conv_pw(xv.data(), h_in, f, t_in, wv.data(), h_out, stride,
                   ov.data());
  // For strided convs keep the subsampled input so the weight gradient is a
  // plain GEMM over aligned views.
  Tensor<S> x_sub;
  if (stride != 1) {
    x_sub = Tensor<S>::uninit({h_in, f, t_out});
    for (int64_t hh = 0; hh < h_in; ++hh)
      for (int64_t ff = 0; ff < f; ++ff)
        for (int64_t tt = 0; tt < t_out; ++tt)
          x_sub[(hh * f + ff) * t_out + tt] =
              xv[(hh * f + ff) * t_in + tt * stride];
  }
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([x, w, out, h_in, f, t_in, h_out, t_out, stride,
                  x_sub](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    bool fresh = false;
    Tensor<S>& gx = tp.adj_raw(x, &fresh);
    kernels::conv_pw_grad_in(g.data(), h_out, f, t_out, tp.val(w).data(), h_in,
                             stride, t_in, gx.data(), !fresh);
    const Tensor<S>& xin = stride == 1 ? tp.val(x) : x_sub;
    kernels::conv_pw_grad_w(g.data(), xin.data(), h_out, h_in, f * t_out,
                            tp.adj(w).data());
  });
  return out;
}

template <class S>
Val<S> t_conv_dw_freq(Tape<S>& t, Val<S> x, Val<S> w) {
  const Tensor<S>& xv = t.val(x);
  const Tensor<S>& wv = t.val(w);
  PHASOR_CHECK(xv.rank() == 3 && wv.rank() == 2 && wv.dim(0) == xv.dim(0) &&
                   wv.dim(1) == 3,
               "conv_dw_freq: x [H,F,T] with w [H,3] required");
  const int64_t h = xv.dim(0), f = xv.dim(1), tt = xv.dim(2);
  Tensor<S> ov = Tensor<S>::uninit(xv.shape());
  kernels::conv_dw_freq(xv.data(), h, f, tt, wv.data(), ov.data());
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([x, w, out, h, f, tt](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    bool fresh = false;
    Tensor<S>& gx = tp.adj_raw(x, &fresh);
    kernels::conv_dw_freq_grad(tp.adj(out).data(), tp.val(x).data(), h, f, tt,
                               tp.val(w).data(), gx.data(),
                               tp.adj(w).data(), !fresh);
  });
  return out;
}

template <class S>
Val<S> t_conv_dw_time(Tape<S>& t, Val<S> x, Val<S> w, int64_t stride) {
  const Tensor<S>& xv = t.val(x);
  const Tensor<S>& wv = t.val(w);
  PHASOR_CHECK(xv.rank() == 3 && wv.rank() == 2 && wv.dim(0) == xv.dim(0) &&
                   wv.dim(1) == 3,
               "conv_dw_time: x [H,F,T] with w [H,3] required");
  PHASOR_CHECK(stride == 1 || stride == 2, "conv_dw_time: stride must be 1 or 2");
  const int64_t h = xv.dim(0), f = xv.dim(1), t_in = xv.dim(2);
  const int64_t t_out = kernels::strided_len(t_in, stride);
  PHASOR_CHECK(t_out >= 1, "conv_dw_time: empty time axis after stride");
  Tensor<S> ov = Tensor<S>::uninit({h, f, t_out});
  kernels::conv_dw_time(xv.data(), h, f, t_in, wv.data(), stride, ov.data());
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([x, w, out, h, f, t_in, stride](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    bool fresh = false;
    Tensor<S>& gx = tp.adj_raw(x, &fresh);
    kernels::conv_dw_time_grad(tp.adj(out).data(), tp.val(x).data(), h, f,
                               t_in, tp.val(w).data(), stride,
                               gx.data(), tp.adj(w).data(), !fresh);
  });
  return out;
}

template <class S>
Val<S> t_subsample_time(Tape<S>& t, Val<S> x, int64_t stride) {
  const Tensor<S>& xv = t.val(x);
  PHASOR_CHECK(xv.rank() == 3, "subsample_time: [H,F,T] required");
  const int64_t h = xv.dim(0), f = xv.dim(1), t_in = xv.dim(2);
  const int64_t t_out = kernels::strided_len(t_in, stride);
  Tensor<S> ov = Tensor<S>::uninit({h, f, t_out});
  for (int64_t p = 0; p < h * f; ++p)
    for (int64_t tt = 0; tt < t_out; ++tt)
      ov[p * t_out + tt] = xv[p * t_in + tt * stride];
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([x, out, h, f, t_in, t_out, stride](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    Tensor<S>& gx = tp.adj(x);
    for (int64_t p = 0; p < h * f; ++p)
      for (int64_t tt = 0; tt < t_out; ++tt)
        gx[p * t_in + tt * stride] += g[p * t_out + tt];
  });
  return out;
}

namespace {

// Shared implementation behind t_groupnorm / t_groupnorm_relu /
// t_groupnorm_add: normalize per group, apply the per-channel affine, then
// optionally clamp at zero or add a same-shape skip tensor in the same write
// pass. Group statistics are kept for backward; normalized values are
// recomputed there rather than stored.
template <class S>
Val<S> gn_impl(Tape<S>& t, Val<S> x, Val<S> gain, Val<S> bias, Val<S> skip,
               bool relu, int64_t groups, S eps) {
  const Tensor<S>& xv = t.val(x);
  PHASOR_CHECK(xv.rank() == 3, "groupnorm: [H,F,T] required");
  const int64_t h = xv.dim(0), f = xv.dim(1), tt = xv.dim(2);
  PHASOR_CHECK(h % groups == 0, "groupnorm: channels ", h,
               " not divisible by groups ", groups);
  PHASOR_CHECK(t.val(gain).numel() == h && t.val(bias).numel() == h,
               "groupnorm: gain/bias must have one entry per channel");
  if (skip.valid())
    PHASOR_CHECK(t.val(skip).same_shape(xv), "groupnorm: skip shape mismatch ",
                 shape_str(t.val(skip).shape()), " vs ", shape_str(xv.shape()));
  const int64_t per = h / groups;
  const int64_t plane = f * tt;
  const int64_t gsize = per * plane;

  const Tensor<S>& gv = t.val(gain);
  const Tensor<S>& bv = t.val(bias);
  Tensor<S> mean({groups}), inv_std({groups});
  Tensor<S> ov = Tensor<S>::uninit(xv.shape());
  const S* skp = skip.valid() ? t.val(skip).data() : nullptr;
  for (int64_t g = 0; g < groups; ++g) {
    const S* px = xv.data() + g * gsize;
    double sd = 0, qd = 0;
    fastmath::sum_sumsq(px, gsize, &sd, &qd);
    const double mu = sd / double(gsize);
    const double var = std::max(0.0, qd / double(gsize) - mu * mu);
    const S m = S(mu);
    const S inv = S(1.0 / std::sqrt(var + double(eps)));
    mean[g] = m;
    inv_std[g] = inv;
    S* po = ov.data() + g * gsize;
    for (int64_t c = 0; c < per; ++c) {
      const int64_t ch = g * per + c;
      const S a = gv[ch] * inv;
      const S b2 = bv[ch] - gv[ch] * m * inv;
      const S* __restrict__ xrow = px + c * plane;
      S* __restrict__ orow = po + c * plane;
      if (relu) {
        for (int64_t i = 0; i < plane; ++i) {
          const S v = a * xrow[i] + b2;
          orow[i] = v > S(0) ? v : S(0);
        }
      } else if (skp) {
        const S* __restrict__ srow = skp + g * gsize + c * plane;
        for (int64_t i = 0; i < plane; ++i)
          orow[i] = a * xrow[i] + b2 + srow[i];
      } else {
        for (int64_t i = 0; i < plane; ++i) orow[i] = a * xrow[i] + b2;
      }
    }
  }
  Val<S> out = t.make_val(std::move(ov));
  t.push_back_fn([x, gain, bias, skip, relu, out, mean, inv_std, groups, per,
                  plane, gsize](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    const Tensor<S>& xv = tp.val(x);
    const Tensor<S>& gv = tp.val(gain);
    const Tensor<S>& bv = tp.val(bias);
    if (skip.valid()) tp.add_adj(skip, g);
    bool fresh = false;
    Tensor<S>& gx = tp.adj_raw(x, &fresh);
    Tensor<S>& ggain = tp.adj(gain);
    Tensor<S>& gbias = tp.adj(bias);
    std::vector<double> sg(static_cast<size_t>(per));
    std::vector<double> sgx(static_cast<size_t>(per));
    for (int64_t gr = 0; gr < groups; ++gr) {
      const S m = mean[gr];
      const S inv = inv_std[gr];
      const S* pxg = xv.data() + gr * gsize;
      const S* pgg = g.data() + gr * gsize;
      // Reduction pass: per-channel sums of the (relu-gated) output adjoint
      // and of its product with the normalized input.
      double s1 = 0, s2 = 0;
      for (int64_t c = 0; c < per; ++c) {
        const int64_t ch = gr * per + c;
        const S a = gv[ch] * inv;
        const S b2 = bv[ch] - gv[ch] * m * inv;
        fastmath::gn_bwd_reduce(pgg + c * plane, pxg + c * plane, plane, m,
                                inv, a, b2, relu, &sg[size_t(c)],
                                &sgx[size_t(c)]);
        gbias[ch] += S(sg[size_t(c)]);
        ggain[ch] += S(sgx[size_t(c)]);
        s1 += double(gv[ch]) * sg[size_t(c)];
        s2 += double(gv[ch]) * sgx[size_t(c)];
      }
      const S m1 = S(s1 / double(gsize));
      const S m2 = S(s2 / double(gsize));
      // Write pass: the usual whitening backward within the group.
      for (int64_t c = 0; c < per; ++c) {
        const int64_t ch = gr * per + c;
        const S gc = gv[ch];
        const S a = gc * inv;
        const S b2 = bv[ch] - gc * m * inv;
        fastmath::gn_bwd_write(pgg + c * plane, pxg + c * plane, plane, m, inv,
                               gc, a, b2, m1, m2, relu, fresh,
                               gx.data() + gr * gsize + c * plane);
      }
    }
  });
  return out;
}

}  // namespace

template <class S>
Val<S> t_groupnorm(Tape<S>& t, Val<S> x, Val<S> gain, Val<S> bias,
                   int64_t groups, S eps) {
  return gn_impl(t, x, gain, bias, Val<S>{}, false, groups, eps);
}

template <class S>
Val<S> t_groupnorm_relu(Tape<S>& t, Val<S> x, Val<S> gain, Val<S> bias,
                        int64_t groups, S eps) {
  return gn_impl(t, x, gain, bias, Val<S>{}, true, groups, eps);
}

template <class S>
Val<S> t_groupnorm_add(Tape<S>& t, Val<S> x, Val<S> gain, Val<S> bias,
                       Val<S> skip, int64_t groups, S eps) {
  return gn_impl(t, x, gain, bias, skip, false, groups, eps);
}

// ---- loss ----

template <class S>
Val<S> t_infonce(Tape<S>& t, Val<S> scores, S smoothing) {
  const Tensor<S>& m = t.val(scores);
  PHASOR_CHECK(m.rank() == 2 && m.dim(0) == m.dim(1) && m.dim(0) >= 2,
               "infonce: square [B,B] score matrix with B >= 2 required");
  const int64_t b = m.dim(0);
  const S off = (S(1) - smoothing) / S(b - 1);

  // log-softmax over rows and over columns, evaluated stably.
  Tensor<S> prow({b, b}), pcol({b, b});
  S loss(0);
  for (int64_t pass = 0; pass < 2; ++pass) {
    Tensor<S>& p = pass == 0 ? prow : pcol;
    for (int64_t i = 0; i < b; ++i) {
      S mx = pass == 0 ? m[i * b] : m[i];
      for (int64_t j = 1; j < b; ++j)
        mx = std::max(mx, pass == 0 ? m[i * b + j] : m[j * b + i]);
      S lse(0);
      for (int64_t j = 0; j < b; ++j)
        lse += std::exp((pass == 0 ? m[i * b + j] : m[j * b + i]) - mx);
      lse = std::log(lse) + mx;
      for (int64_t j = 0; j < b; ++j) {
        const S v = pass == 0 ? m[i * b + j] : m[j * b + i];
        const S logp = v - lse;
        p[i * b + j] = std::exp(logp);
        const S target = j == i ? smoothing : off;
        loss -= target * logp;
      }
    }
  }
  loss /= S(2 * b);

  Tensor<S> lv(Shape{});
  lv[0] = loss;
  Val<S> out = t.make_val(std::move(lv));
  t.push_back_fn([scores, out, prow, pcol, b, smoothing, off](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const S g = tp.adj(out)[0] / S(2 * b);
    Tensor<S>& gm = tp.adj(scores);
    for (int64_t i = 0; i < b; ++i)
      for (int64_t j = 0; j < b; ++j) {
        const S target = j == i ? smoothing : off;
        gm[i * b + j] += g * (prow[i * b + j] - target);
        gm[j * b + i] += g * (pcol[i * b + j] - target);
      }
  });
  return out;
}

template <class S>
Val<S> t_stack_rows(Tape<S>& t, const std::vector<Val<S>>& rows) {
  PHASOR_CHECK(!rows.empty(), "stack_rows: need at least one row");
  const int64_t d = t.val(rows[0]).numel();
  const int64_t k = int64_t(rows.size());
  Tensor<S> ov({k, d});
  for (int64_t r = 0; r < k; ++r) {
    const Tensor<S>& rv = t.val(rows[size_t(r)]);
    PHASOR_CHECK(rv.numel() == d, "stack_rows: row ", r, " has ", rv.numel(),
                 " elements, expected ", d);
    for (int64_t i = 0; i < d; ++i) ov[r * d + i] = rv[i];
  }
  Val<S> out = t.make_val(std::move(ov));
  std::vector<Val<S>> rows_copy = rows;
  t.push_back_fn([rows_copy, out, k, d](Tape<S>& tp) {
    if (!tp.has_adj(out)) return;
    const Tensor<S>& g = tp.adj(out);
    for (int64_t r = 0; r < k; ++r) {
      Tensor<S>& ga = tp.adj(rows_copy[size_t(r)]);
      for (int64_t i = 0; i < d; ++i) ga[i] += g[r * d + i];
    }
  });
  return out;
}

template <class S>
CVal<S> c_stack_rows(Tape<S>& t, const std::vector<CVal<S>>& rows) {
  std::vector<Val<S>> re, im;
  re.reserve(rows.size());
  im.reserve(rows.size());
  for (const CVal<S>& r : rows) {
    re.push_back(r.re);
    im.push_back(r.im);
  }
  return CVal<S>{t_stack_rows(t, re), t_stack_rows(t, im)};
}

#define PHASOR_INSTANTIATE_OPS(S)                                              \
  template Val<S> t_stack_rows(Tape<S>&, const std::vector<Val<S>>&);          \
  template CVal<S> c_stack_rows(Tape<S>&, const std::vector<CVal<S>>&);        \
  template Val<S> t_add(Tape<S>&, Val<S>, Val<S>);                             \
  template Val<S> t_sub(Tape<S>&, Val<S>, Val<S>);                             \
  template Val<S> t_mul(Tape<S>&, Val<S>, Val<S>);                             \
  template Val<S> t_scale(Tape<S>&, Val<S>, S);                                \
  template Val<S> t_add_rowvec(Tape<S>&, Val<S>, Val<S>);                      \
  template Val<S> t_relu(Tape<S>&, Val<S>);                                    \
  template Val<S> t_sum(Tape<S>&, Val<S>);                                     \
  template Val<S> t_mean_rows(Tape<S>&, Val<S>);                               \
  template Val<S> t_reshape(Tape<S>&, Val<S>, Shape);                          \
  template Val<S> t_transpose(Tape<S>&, Val<S>);                               \
  template Val<S> t_matmul(Tape<S>&, Val<S>, Val<S>, bool, bool);              \
  template Val<S> t_rownorm(Tape<S>&, Val<S>);                                 \
  template CVal<S> c_add(Tape<S>&, CVal<S>, CVal<S>);                          \
  template CVal<S> c_conj(Tape<S>&, CVal<S>);                                  \
  template CVal<S> c_transpose(Tape<S>&, CVal<S>);                             \
  template CVal<S> c_matmul(Tape<S>&, CVal<S>, CVal<S>, bool, bool);           \
  template CVal<S> c_reshape(Tape<S>&, CVal<S>, Shape);                        \
  template Val<S> c_abs(Tape<S>&, CVal<S>);                                    \
  template CVal<S> c_rmsnorm(Tape<S>&, CVal<S>, S);                            \
  template CVal<S> c_modrelu(Tape<S>&, CVal<S>, Val<S>);                       \
  template CVal<S> c_rownorm(Tape<S>&, CVal<S>);                               \
  template CVal<S> c_spectral_pool(Tape<S>&, Val<S>, int64_t);                 \
  template Val<S> t_conv_pw(Tape<S>&, Val<S>, Val<S>, int64_t);                \
  template Val<S> t_conv_dw_freq(Tape<S>&, Val<S>, Val<S>);                    \
  template Val<S> t_conv_dw_time(Tape<S>&, Val<S>, Val<S>, int64_t);           \
  template Val<S> t_subsample_time(Tape<S>&, Val<S>, int64_t);                 \
  template Val<S> t_groupnorm(Tape<S>&, Val<S>, Val<S>, Val<S>, int64_t, S);  \
  template Val<S> t_groupnorm_relu(Tape<S>&, Val<S>, Val<S>, Val<S>,         \
                                   int64_t, S);                              \
  template Val<S> t_groupnorm_add(Tape<S>&, Val<S>, Val<S>, Val<S>, Val<S>,  \
                                  int64_t, S);   \
  template Val<S> t_infonce(Tape<S>&, Val<S>, S);

PHASOR_INSTANTIATE_OPS(float)
PHASOR_INSTANTIATE_OPS(double)
#undef PHASOR_INSTANTIATE_OPS

}  // namespace phasor::ops
