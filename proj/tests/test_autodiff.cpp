#include <cmath>
#include <functional>

#include "doctest.h"
#include "phasor/gradcheck.hpp"
#include "phasor/ops.hpp"
#include "phasor/rng.hpp"

using namespace phasor;
namespace op = phasor::ops;

namespace {

using D = double;
using GraphFn = std::function<Val<D>(Tape<D>&, std::vector<Parameter<D>*>&)>;

// Runs grad_check on a freshly built graph at `points` random parameter
// draws; returns the max relative error across all of them.
double max_err_over_points(int points,
                           const std::function<void(Rng&, std::vector<Parameter<D>>&)>& init,
                           const GraphFn& graph, bool detect_kinks = false,
                           int64_t* excluded_total = nullptr) {
  double worst = 0.0;
  for (int pt = 0; pt < points; ++pt) {
    Rng rng(1000 + uint64_t(pt));
    std::vector<Parameter<D>> params;
    init(rng, params);
    std::vector<Parameter<D>*> ptrs;
    for (auto& p : params) ptrs.push_back(&p);

    auto loss = [&](bool with_grad) {
      Tape<D> t;
      std::vector<Parameter<D>*> copy = ptrs;
      Val<D> l = graph(t, copy);
      const D v = t.val(l)[0];
      if (with_grad) t.backward(l);
      return v;
    };
    GradCheckOptions opt;
    opt.eps = 1e-5;
    opt.detect_kinks = detect_kinks;
    GradCheckReport rep = grad_check(ptrs, loss, opt);
    worst = std::max(worst, rep.max_rel_err);
    if (excluded_total) *excluded_total += rep.excluded;
  }
  return worst;
}

Parameter<D> randp(const char* name, Shape s, Rng& rng, double scale = 1.0) {
  return Parameter<D>(name, Tensor<D>::randn(std::move(s), rng, scale));
}

// Weighted scalar readout with fixed weights so every output component
// contributes to the loss.
Val<D> readout(Tape<D>& t, Val<D> v) {
  const Tensor<D>& x = t.val(v);
  Tensor<D> w(x.shape());
  Rng rng(555);
  for (int64_t i = 0; i < w.numel(); ++i) w[i] = rng.gaussian();
  return op::t_sum(t, op::t_mul(t, v, t.leaf(w)));
}

Val<D> readout_c(Tape<D>& t, CVal<D> v) {
  return op::t_add(t, readout(t, v.re), readout(t, v.im));
}

}  // namespace

TEST_CASE("gradcheck: real elementwise and reductions") {
  auto init2 = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("a", {3, 4}, rng));
    p.push_back(randp("b", {3, 4}, rng));
  };
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_add(t, t.leaf(p[0]), t.leaf(p[1])));
        }) < 1e-5);
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_sub(t, t.leaf(p[0]), t.leaf(p[1])));
        }) < 1e-5);
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_mul(t, t.leaf(p[0]), t.leaf(p[1])));
        }) < 1e-5);
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_scale(t, t.leaf(p[0]), D(-2.5)));
        }) < 1e-5);
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return op::t_sum(t, t.leaf(p[0]));
        }) < 1e-5);
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_mean_rows(t, t.leaf(p[0])));
        }) < 1e-5);
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_transpose(t, t.leaf(p[0])));
        }) < 1e-5);
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_reshape(t, t.leaf(p[0]), {4, 3}));
        }) < 1e-5);
  // relu: random points sit away from 0 with probability 1
  CHECK(max_err_over_points(25, init2, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_relu(t, t.leaf(p[0])));
        }) < 1e-4);

  auto init_rows = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("a", {3, 4}, rng));
    p.push_back(randp("b", {4}, rng));
  };
  CHECK(max_err_over_points(25, init_rows, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_add_rowvec(t, t.leaf(p[0]), t.leaf(p[1])));
        }) < 1e-5);
  CHECK(max_err_over_points(25, init_rows, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_rownorm(t, t.leaf(p[0])));
        }) < 1e-5);
}

TEST_CASE("gradcheck: matmul, all transpose combinations") {
  for (bool ta : {false, true})
    for (bool tb : {false, true}) {
      auto init = [ta, tb](Rng& rng, std::vector<Parameter<D>>& p) {
        p.push_back(randp("a", ta ? Shape{4, 3} : Shape{3, 4}, rng));
        p.push_back(randp("b", tb ? Shape{5, 4} : Shape{4, 5}, rng));
      };
      CHECK(max_err_over_points(25, init, [ta, tb](Tape<D>& t, auto& p) {
              return readout(t, op::t_matmul(t, t.leaf(p[0]), t.leaf(p[1]), ta, tb));
            }) < 1e-5);
    }
}

TEST_CASE("gradcheck: complex primitives") {
  auto initc = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("zr", {3, 5}, rng));
    p.push_back(randp("zi", {3, 5}, rng));
  };
  auto z_of = [](Tape<D>& t, auto& p) {
    return CVal<D>{t.leaf(p[0]), t.leaf(p[1])};
  };

  CHECK(max_err_over_points(25, initc, [&](Tape<D>& t, auto& p) {
          return readout_c(t, op::c_conj(t, z_of(t, p)));
        }) < 1e-5);
  CHECK(max_err_over_points(25, initc, [&](Tape<D>& t, auto& p) {
          return readout(t, op::c_abs(t, z_of(t, p)));
        }) < 1e-4);
  CHECK(max_err_over_points(25, initc, [&](Tape<D>& t, auto& p) {
          return readout_c(t, op::c_rmsnorm(t, z_of(t, p), D(1e-6)));
        }) < 1e-5);
  CHECK(max_err_over_points(25, initc, [&](Tape<D>& t, auto& p) {
          return readout_c(t, op::c_rownorm(t, z_of(t, p)));
        }) < 1e-5);

  auto init_mm = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("ar", {3, 4}, rng));
    p.push_back(randp("ai", {3, 4}, rng));
    p.push_back(randp("br", {4, 2}, rng));
    p.push_back(randp("bi", {4, 2}, rng));
  };
  CHECK(max_err_over_points(25, init_mm, [](Tape<D>& t, auto& p) {
          CVal<D> a{t.leaf(p[0]), t.leaf(p[1])};
          CVal<D> b{t.leaf(p[2]), t.leaf(p[3])};
          return readout_c(t, op::c_matmul(t, a, b));
        }) < 1e-5);

  // modrelu away from the kink: |z| ~ O(1), b small
  auto init_mr = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("zr", {3, 5}, rng));
    p.push_back(randp("zi", {3, 5}, rng));
    p.push_back(randp("b", {5}, rng, 0.05));
  };
  CHECK(max_err_over_points(25, init_mr, [](Tape<D>& t, auto& p) {
          CVal<D> z{t.leaf(p[0]), t.leaf(p[1])};
          return readout_c(t, op::c_modrelu(t, z, t.leaf(p[2])));
        }) < 1e-4);
}

TEST_CASE("gradcheck: modrelu kink is identified numerically and excluded") {
  // Place several |z_d| exactly at the bias (the subgradient region); the
  // two-scale probe must flag them while smooth components still pass.
  auto init = [](Rng& rng, std::vector<Parameter<D>>& p) {
    Tensor<D> zr = Tensor<D>::randn({1, 6}, rng);
    Tensor<D> zi = Tensor<D>::randn({1, 6}, rng);
    Tensor<D> b({6});
    for (int64_t j = 0; j < 6; ++j) {
      const double m = std::hypot(zr[j], zi[j]);
      b[j] = j < 3 ? m + 2e-5 * (rng.uniform() - 0.5)  // straddles the kink
                   : 0.1;                              // comfortably active
    }
    p.emplace_back("zr", zr);
    p.emplace_back("zi", zi);
    p.emplace_back("b", b);
  };
  int64_t excluded = 0;
  double err = max_err_over_points(
      10, init,
      [](Tape<D>& t, auto& p) {
        CVal<D> z{t.leaf(p[0]), t.leaf(p[1])};
        return readout_c(t, op::c_modrelu(t, z, t.leaf(p[2])));
      },
      /*detect_kinks=*/true, &excluded);
  CHECK(excluded > 0);       // kink components reported
  CHECK(err < 1e-4);         // smooth components still pass
}

TEST_CASE("gradcheck: spectral pooling (truncation and zero-pad regimes)") {
  for (int64_t t_len : {4, 5, 10, 20}) {
    auto init = [t_len](Rng& rng, std::vector<Parameter<D>>& p) {
      p.push_back(randp("z", {t_len, 3}, rng));
    };
    CHECK(max_err_over_points(25, init, [](Tape<D>& t, auto& p) {
            return readout_c(t, op::c_spectral_pool(t, t.leaf(p[0]), 8));
          }) < 1e-5);
  }
}

TEST_CASE("gradcheck: backbone primitives") {
  auto init_pw = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("x", {3, 4, 5}, rng));
    p.push_back(randp("w", {2, 3}, rng));
  };
  for (int64_t stride : {1, 2}) {
    CHECK(max_err_over_points(25, init_pw, [stride](Tape<D>& t, auto& p) {
            return readout(t, op::t_conv_pw(t, t.leaf(p[0]), t.leaf(p[1]), stride));
          }) < 1e-5);
  }

  auto init_dw = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("x", {3, 4, 5}, rng));
    p.push_back(randp("w", {3, 3}, rng));
  };
  CHECK(max_err_over_points(25, init_dw, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_conv_dw_freq(t, t.leaf(p[0]), t.leaf(p[1])));
        }) < 1e-5);
  for (int64_t stride : {1, 2}) {
    CHECK(max_err_over_points(25, init_dw, [stride](Tape<D>& t, auto& p) {
            return readout(t, op::t_conv_dw_time(t, t.leaf(p[0]), t.leaf(p[1]), stride));
          }) < 1e-5);
  }
  auto init_x = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("x", {4, 3, 6}, rng));
    p.push_back(randp("gain", {4}, rng));
    p.push_back(randp("bias", {4}, rng));
  };
  CHECK(max_err_over_points(25, init_x, [](Tape<D>& t, auto& p) {
          return readout(t, op::t_subsample_time(t, t.leaf(p[0]), 2));
        }) < 1e-5);
  for (int64_t groups : {1, 2, 4}) {
    CHECK(max_err_over_points(25, init_x, [groups](Tape<D>& t, auto& p) {
            return readout(t, op::t_groupnorm(t, t.leaf(p[0]), t.leaf(p[1]),
                                              t.leaf(p[2]), groups, D(1e-5)));
          }) < 1e-5);
  }
}

TEST_CASE("gradcheck: InfoNCE loss") {
  auto init = [](Rng& rng, std::vector<Parameter<D>>& p) {
    p.push_back(randp("scores", {5, 5}, rng));
  };
  for (double l : {1.0, 0.9}) {
    CHECK(max_err_over_points(25, init, [l](Tape<D>& t, auto& p) {
            return op::t_infonce(t, t.leaf(p[0]), D(l));
          }) < 1e-5);
  }
}

TEST_CASE("InfoNCE on uniform scores equals ln B exactly") {
  for (int64_t b : {2, 8, 32}) {
    for (double smoothing : {1.0, 0.9, 0.5}) {
      Tape<double> t;
      Val<double> s = t.leaf(Tensor<double>::full({b, b}, 0.37));
      Val<double> loss = op::t_infonce(t, s, smoothing);
      CHECK(std::abs(t.val(loss)[0] - std::log(double(b))) < 1e-12);
    }
  }
  // Single precision agrees to accumulation roundoff.
  for (int64_t b : {2, 8, 32}) {
    Tape<float> t;
    Val<float> s = t.leaf(Tensor<float>::full({b, b}, 0.37f));
    Val<float> loss = op::t_infonce(t, s, 0.9f);
    CHECK(double(t.val(loss)[0]) ==
          doctest::Approx(std::log(double(b))).epsilon(1e-4));
  }
  Tape<float> t;
  Val<float> bad = t.leaf(Tensor<float>({1, 1}));
  CHECK_THROWS_AS(op::t_infonce(t, bad, 0.9f), Error);
}

TEST_CASE("conv kernels match naive reflect-101 oracles") {
  Rng rng(77);
  const int64_t h = 3, f = 5, tt = 7;
  Tensor<float> x = Tensor<float>::randn({h, f, tt}, rng);

  auto refl = [](int64_t i, int64_t n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return std::clamp<int64_t>(i, 0, n - 1);
  };

  SUBCASE("depthwise frequency conv") {
    Tensor<float> w = Tensor<float>::randn({h, 3}, rng);
    Tape<float> tp;
    Val<float> out = op::t_conv_dw_freq(tp, tp.leaf(x), tp.leaf(w));
    for (int64_t c = 0; c < h; ++c)
      for (int64_t i = 0; i < f; ++i)
        for (int64_t j = 0; j < tt; ++j) {
          float want = 0;
          for (int64_t d = 0; d < 3; ++d)
            want += w[c * 3 + d] * x[(c * f + refl(i + d - 1, f)) * tt + j];
          CHECK(tp.val(out)[(c * f + i) * tt + j] == doctest::Approx(want));
        }
  }

  SUBCASE("depthwise time conv, stride 2") {
    Tensor<float> w = Tensor<float>::randn({h, 3}, rng);
    Tape<float> tp;
    Val<float> out = op::t_conv_dw_time(tp, tp.leaf(x), tp.leaf(w), 2);
    const int64_t t_out = (tt + 1) / 2;
    REQUIRE(tp.val(out).shape() == Shape{h, f, t_out});
    for (int64_t c = 0; c < h; ++c)
      for (int64_t i = 0; i < f; ++i)
        for (int64_t j = 0; j < t_out; ++j) {
          float want = 0;
          for (int64_t d = 0; d < 3; ++d)
            want += w[c * 3 + d] * x[(c * f + i) * tt + refl(2 * j + d - 1, tt)];
          CHECK(tp.val(out)[(c * f + i) * t_out + j] == doctest::Approx(want));
        }
  }

  SUBCASE("pointwise conv vs naive channel mix") {
    const int64_t h_out = 4;
    Tensor<float> w = Tensor<float>::randn({h_out, h}, rng);
    Tape<float> tp;
    Val<float> out = op::t_conv_pw(tp, tp.leaf(x), tp.leaf(w), 1);
    for (int64_t c = 0; c < h_out; ++c)
      for (int64_t p = 0; p < f * tt; ++p) {
        float want = 0;
        for (int64_t ci = 0; ci < h; ++ci)
          want += w[c * h + ci] * x[ci * f * tt + p];
        CHECK(tp.val(out)[c * f * tt + p] == doctest::Approx(want));
      }
  }
}

TEST_CASE("tape accumulates parameter gradients across reuse") {
  // f(a) = sum(a ⊙ a) ⇒ df/da = 2a: exercises adjoint accumulation when one
  // value feeds two inputs of the same node.
  Parameter<double> a("a", Tensor<double>::from({3}, {1.0, -2.0, 0.5}));
  Tape<double> t;
  Val<double> av = t.leaf(&a);
  Val<double> loss = op::t_sum(t, op::t_mul(t, av, av));
  t.backward(loss);
  for (int64_t i = 0; i < 3; ++i)
    CHECK(a.grad[i] == doctest::Approx(2.0 * a.value[i]));
}
