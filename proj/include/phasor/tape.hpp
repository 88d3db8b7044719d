#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "phasor/tensor.hpp"

namespace phasor {

// Named trainable tensor. grad is allocated eagerly at the value's shape and
// reset to zero by the optimizer after each step.
template <class S>
struct Parameter {
  Tensor<S> value;
  Tensor<S> grad;
  std::string name;

  Parameter() = default;
  Parameter(std::string n, Tensor<S> v)
      : value(std::move(v)), grad(value.shape()), name(std::move(n)) {}
};

// Complex parameter = independent re/im real parameters (gradients are taken
// with respect to re and im separately; the loss is always real).
template <class S>
struct CParameter {
  Parameter<S> re, im;

  CParameter() = default;
  CParameter(const std::string& n, CTensor<S> v)
      : re(n + ".re", std::move(v.re)), im(n + ".im", std::move(v.im)) {}

  CTensor<S> value() const { return CTensor<S>(re.value, im.value); }
};

template <class S>
struct Val {
  int id = -1;
  bool valid() const { return id >= 0; }
};

template <class S>
struct CVal {
  Val<S> re, im;
};

// Reverse-mode tape. Ops append value slots and a backward closure; backward
// replays closures in exact reverse order of recording. Single-writer: one
// tape is built and differentiated on one thread.
template <class S>
class Tape {
 public:
  Val<S> leaf(Tensor<S> v) { return make_val(std::move(v)); }

  CVal<S> leaf(CTensor<S> v) {
    return CVal<S>{leaf(std::move(v.re)), leaf(std::move(v.im))};
  }

  // Leaf bound to a parameter: after backward, the slot adjoint is flushed
  // into p->grad (accumulating).
  Val<S> leaf(Parameter<S>* p) {
    Val<S> v = make_val(p->value);
    param_leaves_.emplace_back(v.id, p);
    return v;
  }

  CVal<S> leaf(CParameter<S>* p) { return CVal<S>{leaf(&p->re), leaf(&p->im)}; }

  Val<S> make_val(Tensor<S> v) {
    slots_.push_back(SlotData{std::move(v), Tensor<S>(), false});
    return Val<S>{int(slots_.size()) - 1};
  }

  void push_back_fn(std::function<void(Tape&)> fn) {
    nodes_.push_back(std::move(fn));
  }

  const Tensor<S>& val(Val<S> v) const { return slots_[size_t(v.id)].value; }

  CTensor<S> cval(CVal<S> v) const { return CTensor<S>(val(v.re), val(v.im)); }

  bool has_adj(Val<S> v) const { return slots_[size_t(v.id)].has_adjoint; }

  // Adjoint tensor, lazily allocated as zeros.
  Tensor<S>& adj(Val<S> v) {
    SlotData& s = slots_[size_t(v.id)];
    if (!s.has_adjoint) {
      s.adjoint = Tensor<S>(s.value.shape());
      s.has_adjoint = true;
    }
    return s.adjoint;
  }

  // Adjoint buffer for kernels that can overwrite on first touch. If *fresh
  // comes back true the buffer is uninitialized and the caller must write
  // every element; otherwise the caller must accumulate into it.
  Tensor<S>& adj_raw(Val<S> v, bool* fresh) {
    SlotData& s = slots_[size_t(v.id)];
    if (!s.has_adjoint) {
      s.adjoint = Tensor<S>::uninit(s.value.shape());
      s.has_adjoint = true;
      *fresh = true;
    } else {
      *fresh = false;
    }
    return s.adjoint;
  }

  void add_adj(Val<S> v, const Tensor<S>& g) {
    bool fresh = false;
    Tensor<S>& a = adj_raw(v, &fresh);
    if (fresh) {
      std::copy(g.data(), g.data() + g.numel(), a.data());
    } else {
      axpy(S(1), g, a);
    }
  }

  // Backward from a scalar loss (seeds d loss/d loss = 1).
  void backward(Val<S> loss) {
    PHASOR_CHECK(val(loss).numel() == 1, "backward: loss must be scalar");
    adj(loss)[0] = S(1);
    run_backward();
  }

  // Backward from externally supplied cotangents (used when a downstream tape
  // consumes this tape's outputs).
  void backward_seed(const std::vector<std::pair<Val<S>, Tensor<S>>>& seeds) {
    for (const auto& [v, g] : seeds) add_adj(v, g);
    run_backward();
  }

  size_t num_nodes() const { return nodes_.size(); }

 private:
  void run_backward() {
    for (size_t i = nodes_.size(); i-- > 0;) nodes_[i](*this);
    for (auto& [id, p] : param_leaves_) {
      SlotData& s = slots_[size_t(id)];
      if (s.has_adjoint) axpy(S(1), s.adjoint, p->grad);
    }
  }

  struct SlotData {
    Tensor<S> value;
    Tensor<S> adjoint;
    bool has_adjoint = false;
  };

  std::vector<SlotData> slots_;
  std::vector<std::function<void(Tape&)>> nodes_;
  std::vector<std::pair<int, Parameter<S>*>> param_leaves_;
};

}  // namespace phasor
