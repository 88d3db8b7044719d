#include "phasor/tensor.hpp"

#include <cblas.h>

#include "fastmath.hpp"

#include <algorithm>
#include <cmath>

namespace phasor {

template <class S>
bool Tensor<S>::all_finite() const {
  for (const S& x : *data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

namespace {

template <class S>
void check_same(const Tensor<S>& a, const Tensor<S>& b, const char* what) {
  PHASOR_CHECK(a.same_shape(b), what, ": shape mismatch ", shape_str(a.shape()),
               " vs ", shape_str(b.shape()));
}

void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, float alpha,
          const float* a, int64_t lda, const float* b, int64_t ldb, float beta,
          float* c, int64_t ldc) {
  cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, int(m), int(n), int(k), alpha, a,
              int(lda), b, int(ldb), beta, c, int(ldc));
}

void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, double alpha,
          const double* a, int64_t lda, const double* b, int64_t ldb, double beta,
          double* c, int64_t ldc) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, int(m), int(n), int(k), alpha, a,
              int(lda), b, int(ldb), beta, c, int(ldc));
}

}  // namespace

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  check_same(a, b, "add");
  Tensor<S> out = Tensor<S>::uninit(a.shape());
  const S* pa = a.data();
  const S* pb = b.data();
  S* po = out.data();
  for (int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = pa[i] + pb[i];
  return out;
}

template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  check_same(a, b, "sub");
  Tensor<S> out = Tensor<S>::uninit(a.shape());
  const S* pa = a.data();
  const S* pb = b.data();
  S* po = out.data();
  for (int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = pa[i] - pb[i];
  return out;
}

template <class S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  check_same(a, b, "mul");
  Tensor<S> out = Tensor<S>::uninit(a.shape());
  const S* pa = a.data();
  const S* pb = b.data();
  S* po = out.data();
  for (int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = pa[i] * pb[i];
  return out;
}

template <class S>
Tensor<S> scale(const Tensor<S>& a, S s) {
  Tensor<S> out = Tensor<S>::uninit(a.shape());
  const S* pa = a.data();
  S* po = out.data();
  for (int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = pa[i] * s;
  return out;
}

template <class S>
void axpy(S alpha, const Tensor<S>& x, Tensor<S>& y) {
  check_same(x, y, "axpy");
  const S* px = x.data();
  S* py = y.data();
  for (int64_t i = 0, n = x.numel(); i < n; ++i) py[i] += alpha * px[i];
}

template <class S>
S sum(const Tensor<S>& a) {
  return fastmath::sum(a.data(), a.numel());
}

template <class S>
S dot(const Tensor<S>& a, const Tensor<S>& b) {
  check_same(a, b, "dot");
  return fastmath::dot(a.data(), b.data(), a.numel());
}

template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b, bool trans_a,
                 bool trans_b) {
  PHASOR_CHECK(a.rank() == 2 && b.rank() == 2, "matmul: rank-2 tensors required, got ",
               shape_str(a.shape()), " and ", shape_str(b.shape()));
  int64_t m = trans_a ? a.dim(1) : a.dim(0);
  int64_t k = trans_a ? a.dim(0) : a.dim(1);
  int64_t kb = trans_b ? b.dim(1) : b.dim(0);
  int64_t n = trans_b ? b.dim(0) : b.dim(1);
  PHASOR_CHECK(k == kb, "matmul: inner dims disagree: ", shape_str(a.shape()),
               (trans_a ? "^T" : ""), " x ", shape_str(b.shape()),
               (trans_b ? "^T" : ""));
  Tensor<S> c = Tensor<S>::uninit({m, n});
  if (k) {
    gemm(trans_a, trans_b, m, n, k, S(1), a.data(), a.dim(1), b.data(), b.dim(1),
         S(0), c.data(), n);
  } else {
    std::fill(c.data(), c.data() + c.numel(), S(0));
  }
  return c;
}

template <class S>
void matmul_acc(const Tensor<S>& a, const Tensor<S>& b, Tensor<S>& c,
                bool trans_a, bool trans_b) {
  PHASOR_CHECK(a.rank() == 2 && b.rank() == 2 && c.rank() == 2,
               "matmul_acc: rank-2 tensors required");
  int64_t m = trans_a ? a.dim(1) : a.dim(0);
  int64_t k = trans_a ? a.dim(0) : a.dim(1);
  int64_t kb = trans_b ? b.dim(1) : b.dim(0);
  int64_t n = trans_b ? b.dim(0) : b.dim(1);
  PHASOR_CHECK(k == kb && c.dim(0) == m && c.dim(1) == n,
               "matmul_acc: shape mismatch");
  if (m && n && k)
    gemm(trans_a, trans_b, m, n, k, S(1), a.data(), a.dim(1), b.data(), b.dim(1),
         S(1), c.data(), n);
}

template <class S>
Tensor<S> transpose2d(const Tensor<S>& a) {
  PHASOR_CHECK(a.rank() == 2, "transpose2d: rank-2 required");
  int64_t m = a.dim(0), n = a.dim(1);
  Tensor<S> out({n, m});
  const S* pa = a.data();
  S* po = out.data();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) po[j * m + i] = pa[i * n + j];
  return out;
}

template <class S>
Tensor<S> slice_rows(const Tensor<S>& a, int64_t r0, int64_t r1) {
  PHASOR_CHECK(a.rank() >= 1 && r0 >= 0 && r0 <= r1 && r1 <= a.dim(0),
               "slice_rows: bad range [", r0, ",", r1, ") for ", shape_str(a.shape()));
  Shape s = a.shape();
  int64_t row = a.numel() / (a.dim(0) ? a.dim(0) : 1);
  s[0] = r1 - r0;
  Tensor<S> out(s);
  const S* pa = a.data() + r0 * row;
  S* po = out.data();
  for (int64_t i = 0, n = (r1 - r0) * row; i < n; ++i) po[i] = pa[i];
  return out;
}

template <class S>
CTensor<S> cplx_matmul(const CTensor<S>& a, const CTensor<S>& b) {
  Tensor<S> rr = matmul(a.re, b.re);
  Tensor<S> ii = matmul(a.im, b.im);
  Tensor<S> ri = matmul(a.re, b.im);
  Tensor<S> ir = matmul(a.im, b.re);
  return CTensor<S>(sub(rr, ii), add(ri, ir));
}

template <class S>
CTensor<S> cplx_adjoint(const CTensor<S>& a) {
  return CTensor<S>(transpose2d(a.re), scale(transpose2d(a.im), S(-1)));
}

template <class S>
S cplx_sq_norm(const CTensor<S>& z) {
  return dot(z.re, z.re) + dot(z.im, z.im);
}

template <class S>
CTensor<S> l2_normalize(const CTensor<S>& z) {
  S nrm = std::sqrt(cplx_sq_norm(z));
  PHASOR_CHECK(nrm > S(0), "zero-norm embedding");
  S inv = S(1) / nrm;
  return CTensor<S>(scale(z.re, inv), scale(z.im, inv));
}

template class Tensor<float>;
template class Tensor<double>;

#define PHASOR_INSTANTIATE(S)                                                  \
  template Tensor<S> add(const Tensor<S>&, const Tensor<S>&);                  \
  template Tensor<S> sub(const Tensor<S>&, const Tensor<S>&);                  \
  template Tensor<S> mul(const Tensor<S>&, const Tensor<S>&);                  \
  template Tensor<S> scale(const Tensor<S>&, S);                               \
  template void axpy(S, const Tensor<S>&, Tensor<S>&);                         \
  template S sum(const Tensor<S>&);                                            \
  template S dot(const Tensor<S>&, const Tensor<S>&);                          \
  template Tensor<S> matmul(const Tensor<S>&, const Tensor<S>&, bool, bool);   \
  template void matmul_acc(const Tensor<S>&, const Tensor<S>&, Tensor<S>&,     \
                           bool, bool);                                        \
  template Tensor<S> transpose2d(const Tensor<S>&);                            \
  template Tensor<S> slice_rows(const Tensor<S>&, int64_t, int64_t);           \
  template CTensor<S> cplx_matmul(const CTensor<S>&, const CTensor<S>&);       \
  template CTensor<S> cplx_adjoint(const CTensor<S>&);                         \
  template S cplx_sq_norm(const CTensor<S>&);                                  \
  template CTensor<S> l2_normalize(const CTensor<S>&);

PHASOR_INSTANTIATE(float)
PHASOR_INSTANTIATE(double)
#undef PHASOR_INSTANTIATE

}  // namespace phasor
