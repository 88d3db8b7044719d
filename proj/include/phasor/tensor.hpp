#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <new>
#include <type_traits>
#include <vector>

#include "phasor/common.hpp"
#include "phasor/rng.hpp"

namespace phasor {

using Shape = std::vector<int64_t>;

// Allocator that leaves trivially-constructible elements uninitialized on
// default construction. Tensor storage uses it so hot paths can allocate
// output buffers without a redundant zero-fill before overwriting them.
template <class T, class Base = std::allocator<T>>
struct default_init_allocator : Base {
  template <class U>
  struct rebind {
    using other = default_init_allocator<
        U, typename std::allocator_traits<Base>::template rebind_alloc<U>>;
  };
  using Base::Base;
  template <class U>
  void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
    ::new (static_cast<void*>(p)) U;
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    std::allocator_traits<Base>::construct(static_cast<Base&>(*this), p,
                                           std::forward<Args>(args)...);
  }
};

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

// Dense row-major tensor. Always contiguous; reshape shares the buffer,
// everything else copies. Scalar S is float in production, double in the
// 64-bit verification mode used by gradient and bound tests.
template <class S>
class Tensor {
 public:
  using Storage = std::vector<S, default_init_allocator<S>>;

  Tensor() : shape_{0}, data_(std::make_shared<Storage>()) {}

  explicit Tensor(Shape shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<Storage>(size_t(checked_numel(shape_)), S(0))) {}

  // Allocates without zero-filling; the caller must write every element.
  static Tensor uninit(Shape shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<Storage>(size_t(checked_numel(t.shape_)));
    return t;
  }

  static Tensor full(Shape shape, S v) {
    Tensor t = uninit(std::move(shape));
    for (S& x : *t.data_) x = v;
    return t;
  }

  static Tensor from(Shape shape, const std::vector<S>& vals) {
    PHASOR_CHECK(shape_numel(shape) == int64_t(vals.size()),
                 "tensor init size mismatch: shape ", shape_str(shape), " vs ",
                 vals.size(), " values");
    Tensor t = uninit(std::move(shape));
    std::copy(vals.begin(), vals.end(), t.data_->begin());
    return t;
  }

  static Tensor randn(Shape shape, Rng& rng, double stddev = 1.0) {
    Tensor t = uninit(std::move(shape));
    for (S& x : *t.data_) x = S(rng.gaussian() * stddev);
    return t;
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return int(shape_.size()); }
  int64_t dim(int i) const { return shape_[size_t(i)]; }
  int64_t numel() const { return int64_t(data_->size()); }

  S* data() { return data_->data(); }
  const S* data() const { return data_->data(); }

  S& operator[](int64_t i) { return (*data_)[size_t(i)]; }
  const S& operator[](int64_t i) const { return (*data_)[size_t(i)]; }

  S& at(std::initializer_list<int64_t> idx) { return (*data_)[size_t(flat(idx))]; }
  const S& at(std::initializer_list<int64_t> idx) const {
    return (*data_)[size_t(flat(idx))];
  }

  Tensor reshape(Shape new_shape) const {
    PHASOR_CHECK(shape_numel(new_shape) == numel(), "reshape ", shape_str(shape_),
                 " -> ", shape_str(new_shape), ": element count mismatch");
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.data_ = data_;
    return t;
  }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<Storage>(*data_);
    return t;
  }

  void zero() { for (S& x : *data_) x = S(0); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const;

 private:
  static int64_t checked_numel(const Shape& s) {
    for (int64_t d : s) PHASOR_CHECK(d >= 0, "negative axis length in shape ", shape_str(s));
    return shape_numel(s);
  }

  int64_t flat(std::initializer_list<int64_t> idx) const {
    PHASOR_CHECK(idx.size() == shape_.size(), "index rank mismatch");
    int64_t off = 0;
    size_t k = 0;
    for (int64_t i : idx) {
      off = off * shape_[k] + i;
      ++k;
    }
    return off;
  }

  Shape shape_;
  std::shared_ptr<Storage> data_;
};

// Complex tensor as an explicit (re, im) pair of equally-shaped real tensors.
// Gradients treat re and im as independent real parameters throughout.
template <class S>
struct CTensor {
  Tensor<S> re, im;

  CTensor() = default;
  explicit CTensor(Shape shape) : re(shape), im(std::move(shape)) {}
  CTensor(Tensor<S> r, Tensor<S> i) : re(std::move(r)), im(std::move(i)) {
    PHASOR_CHECK(re.same_shape(im), "complex tensor: re shape ", shape_str(re.shape()),
                 " != im shape ", shape_str(im.shape()));
  }

  const Shape& shape() const { return re.shape(); }
  int64_t numel() const { return re.numel(); }

  CTensor clone() const { return CTensor(re.clone(), im.clone()); }
  CTensor reshape(Shape s) const { return CTensor(re.reshape(s), im.reshape(s)); }
};

// ---- elementwise / BLAS-backed primitives (non-autodiff) ----

template <class S> Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> scale(const Tensor<S>& a, S s);
// y += alpha * x
template <class S> void axpy(S alpha, const Tensor<S>& x, Tensor<S>& y);
template <class S> S sum(const Tensor<S>& a);
template <class S> S dot(const Tensor<S>& a, const Tensor<S>& b);

// 2-D product C = op(A)·op(B), optionally transposing either input (BLAS).
template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b, bool trans_a = false,
                 bool trans_b = false);
// C += op(A)·op(B)
template <class S>
void matmul_acc(const Tensor<S>& a, const Tensor<S>& b, Tensor<S>& c,
                bool trans_a = false, bool trans_b = false);

template <class S> Tensor<S> transpose2d(const Tensor<S>& a);

// Rows [r0, r1) along the first axis.
template <class S> Tensor<S> slice_rows(const Tensor<S>& a, int64_t r0, int64_t r1);

// Standard complex matrix product via four real products:
// (Ar·Br − Ai·Bi) + i(Ar·Bi + Ai·Br).
template <class S>
CTensor<S> cplx_matmul(const CTensor<S>& a, const CTensor<S>& b);

// Conjugate transpose.
template <class S> CTensor<S> cplx_adjoint(const CTensor<S>& a);

// Global L2 normalization of a complex vector; preserves per-element phase.
// All-zero input is a contract violation ("zero-norm embedding").
template <class S> CTensor<S> l2_normalize(const CTensor<S>& z);

template <class S> S cplx_sq_norm(const CTensor<S>& z);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace phasor
