#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "phasor/gradcheck.hpp"
#include "phasor/linalg.hpp"
#include "phasor/model.hpp"
#include "phasor/ops.hpp"
#include "phasor/rng.hpp"

using namespace phasor;
using namespace phasor::ops;

namespace {

// Random unit-norm complex vector [d].
template <class S>
CTensor<S> random_unit(int64_t d, Rng& rng) {
  CTensor<S> z({d});
  double nrm2 = 0;
  for (int64_t i = 0; i < d; ++i) {
    z.re[i] = S(rng.gaussian());
    z.im[i] = S(rng.gaussian());
    nrm2 += double(z.re[i]) * z.re[i] + double(z.im[i]) * z.im[i];
  }
  const S inv = S(1.0 / std::sqrt(nrm2));
  for (int64_t i = 0; i < d; ++i) {
    z.re[i] *= inv;
    z.im[i] *= inv;
  }
  return z;
}

template <class S>
CTensor<S> random_cmatrix(int64_t n, int64_t c, Rng& rng) {
  return CTensor<S>(Tensor<S>::randn({n, c}, rng), Tensor<S>::randn({n, c}, rng));
}

// z · e^{iθ}
template <class S>
CTensor<S> rotate(const CTensor<S>& z, double theta) {
  const S c = S(std::cos(theta)), s = S(std::sin(theta));
  CTensor<S> out(z.shape());
  for (int64_t i = 0; i < z.numel(); ++i) {
    out.re[i] = c * z.re[i] - s * z.im[i];
    out.im[i] = s * z.re[i] + c * z.im[i];
  }
  return out;
}

// Oracle: s = Re(z_xᴴ W z_y) by explicit double loop.
double score_oracle(const CTensor<double>& zx, const CTensor<double>& zy,
                    const CTensor<double>& w) {
  const int64_t d = zx.numel();
  double re = 0;
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = 0; j < d; ++j) {
      const double wr = w.re[i * d + j], wi = w.im[i * d + j];
      // conj(zx_i) · W_ij · zy_j, real part
      const double ar = zx.re[i], ai = -zx.im[i];
      const double br = wr * zy.re[j] - wi * zy.im[j];
      const double bi = wr * zy.im[j] + wi * zy.re[j];
      re += ar * br - ai * bi;
    }
  return re;
}

// Tiny geometry that exercises every stage of the pipeline cheaply.
ModelConfig tiny_config(ScoreVariant sv, MetricVariant mv) {
  ModelConfig c;
  c.preset = "tiny";
  c.channels = {2, 3};
  c.freq_bins = 6;
  c.d_dim = 4;
  c.c_bins = 3;
  c.head_hidden = 12;
  c.embed_dim = 5;
  c.mlp_hidden = 7;
  c.gap_hidden = 9;
  c.score_variant = sv;
  c.metric_variant = mv;
  return c;
}

}  // namespace

TEST_CASE("backbone output-shape law: T' = ceil(T/32), H and F fixed") {
  auto m = Model<float>::init(desk_config(), 11);
  Rng rng(5);
  for (int64_t t_in : {32, 33, 63, 64, 100, 320, 321, 511, 1024, 2048}) {
    Tape<float> t;
    Val<float> x = t.leaf(Tensor<float>::randn({84, t_in}, rng, 0.5));
    Val<float> y = m.backbone_forward(t, x);
    const Shape& s = t.val(y).shape();
    REQUIRE(s.size() == 3);
    CHECK(s[0] == 32);
    CHECK(s[1] == 84);
    CHECK(s[2] == (t_in + 31) / 32);
  }
}

TEST_CASE("backbone rejects too-short input naming the minimum") {
  auto m = Model<float>::init(desk_config(), 11);
  for (int64_t t_in : {1, 7, 31}) {
    Tape<float> t;
    Val<float> x = t.leaf(Tensor<float>({84, t_in}));
    CHECK_THROWS_WITH_AS(m.backbone_forward(t, x),
                         doctest::Contains("minimum is 32"), std::runtime_error);
  }
}

TEST_CASE("single block: stride-2 ceil law and zero-input propagation") {
  auto m = Model<float>::init(desk_config(), 3);
  // blocks[1] is 8 -> 8 with stride 2
  Rng rng(1);
  Tape<float> t;
  Val<float> x = t.leaf(Tensor<float>::randn({8, 5, 7}, rng, 1.0));
  Val<float> y = m.blocks[1].forward(t, x);
  CHECK(t.val(y).shape() == Shape{8, 5, 4});  // ceil(7/2)

  // Zero input, zero-initialized biases: the whole backbone emits zeros.
  Tape<float> tz;
  Val<float> xz = tz.leaf(Tensor<float>({84, 64}));
  Val<float> yz = m.backbone_forward(tz, xz);
  const Tensor<float>& ov = tz.val(yz);
  float mx = 0;
  for (int64_t i = 0; i < ov.numel(); ++i) mx = std::max(mx, std::abs(ov[i]));
  CHECK(mx == 0.0f);

  // ... and the embedding head refuses the all-zero summary.
  Tape<float> te;
  Val<float> xe = te.leaf(Tensor<float>({84, 64}));
  CHECK_THROWS_WITH_AS(m.embed(te, xe), doctest::Contains("degenerate embedding"),
                       std::runtime_error);
}

TEST_CASE("single axial block gradients match central differences (64-bit)") {
  auto m = Model<double>::init(tiny_config(ScoreVariant::bilinear,
                                           MetricVariant::full), 21);
  AxialBlock<double>& blk = m.blocks[1];  // 2 -> 3, stride 2
  Rng rx(7), rw(8);
  Parameter<double> x("x", Tensor<double>::randn({2, 6, 9}, rx, 1.0));
  Tensor<double> wfix = Tensor<double>::randn({3, 6, 5}, rw, 1.0);

  std::vector<Parameter<double>*> params;
  blk.collect(params);
  params.push_back(&x);

  auto loss = [&](bool with_grad) -> double {
    Tape<double> t;
    Val<double> y = blk.forward(t, t.leaf(&x));
    Val<double> l = t_sum(t, t_mul(t, y, t.leaf(wfix)));
    if (with_grad) t.backward(l);
    return t.val(l)[0];
  };

  GradCheckOptions opt;
  opt.detect_kinks = true;  // ReLU
  auto rep = grad_check<double>(params, loss, opt);
  CHECK(rep.max_rel_err < 1e-5);
  CHECK(rep.checked > 100);
}

TEST_CASE("full pipeline gradients on a 3-crop batch, every variant (64-bit)") {
  struct Case {
    ScoreVariant sv;
    MetricVariant mv;
  };
  const Case cases[] = {
      {ScoreVariant::bilinear, MetricVariant::full},
      {ScoreVariant::bilinear, MetricVariant::psd},
      {ScoreVariant::bilinear, MetricVariant::hermitian},
      {ScoreVariant::complex_cosine, MetricVariant::full},
      {ScoreVariant::magnitude_only_mlp, MetricVariant::full},
      {ScoreVariant::gap_real_mlp, MetricVariant::full},
  };
  for (const Case& c : cases) {
    CAPTURE(to_string(c.sv));
    CAPTURE(to_string(c.mv));
    auto m = Model<double>::init(tiny_config(c.sv, c.mv), 31);
    Rng rng(17);
    std::vector<Tensor<double>> xs, ys;
    for (int i = 0; i < 3; ++i) {
      xs.push_back(Tensor<double>::randn({6, 33}, rng, 0.7));
      ys.push_back(Tensor<double>::randn({6, 33}, rng, 0.7));
    }
    auto loss = [&](bool with_grad) -> double {
      Tape<double> t;
      std::vector<CVal<double>> zx, zy;
      for (int i = 0; i < 3; ++i) {
        zx.push_back(m.embed(t, t.leaf(xs[size_t(i)].clone())));
        zy.push_back(m.embed(t, t.leaf(ys[size_t(i)].clone())));
      }
      Val<double> scores =
          m.score_matrix(t, c_stack_rows(t, zx), c_stack_rows(t, zy));
      Val<double> l = t_infonce(t, scores, 0.9);
      if (with_grad) t.backward(l);
      return t.val(l)[0];
    };
    GradCheckOptions opt;
    opt.detect_kinks = true;
    opt.max_components_per_param = 40;
    auto rep = grad_check<double>(m.parameters(), loss, opt);
    CAPTURE(rep.worst);
    CHECK(rep.max_rel_err < 1e-4);
  }
}

TEST_CASE("head phase equivariance over 100 random rotations (32-bit)") {
  auto m = Model<float>::init(desk_config(), 41);
  Rng rng(42);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    CTensor<float> s(Tensor<float>::randn({8, 80}, rng, 1.0),
                     Tensor<float>::randn({8, 80}, rng, 1.0));
    const double theta = rng.uniform(0, 2 * 3.14159265358979323846);
    Tape<float> t;
    CTensor<float> z = t.cval(m.head_forward(t, t.leaf(s.clone())));
    Tape<float> t2;
    CTensor<float> zr = t2.cval(m.head_forward(t2, t2.leaf(rotate(s, theta))));
    CTensor<float> expect = rotate(z, theta);
    for (int64_t i = 0; i < z.numel(); ++i) {
      worst = std::max(worst, std::abs(double(zr.re[i]) - expect.re[i]));
      worst = std::max(worst, std::abs(double(zr.im[i]) - expect.im[i]));
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("head is invariant to positive scaling and emits unit norm") {
  auto m = Model<float>::init(desk_config(), 43);
  Rng rng(44);
  double worst_scale = 0, worst_norm = 0;
  for (int trial = 0; trial < 20; ++trial) {
    CTensor<float> s(Tensor<float>::randn({8, 80}, rng, 1.0),
                     Tensor<float>::randn({8, 80}, rng, 1.0));
    Tape<float> t;
    CTensor<float> z = t.cval(m.head_forward(t, t.leaf(s.clone())));
    double nrm2 = 0;
    for (int64_t i = 0; i < z.numel(); ++i)
      nrm2 += double(z.re[i]) * z.re[i] + double(z.im[i]) * z.im[i];
    worst_norm = std::max(worst_norm, std::abs(std::sqrt(nrm2) - 1.0));

    for (double alpha : {0.5, 4.0}) {
      CTensor<float> sa(scale(s.re, float(alpha)), scale(s.im, float(alpha)));
      Tape<float> ta;
      CTensor<float> za = ta.cval(m.head_forward(ta, ta.leaf(std::move(sa))));
      for (int64_t i = 0; i < z.numel(); ++i) {
        worst_scale = std::max(worst_scale, std::abs(double(za.re[i]) - z.re[i]));
        worst_scale = std::max(worst_scale, std::abs(double(za.im[i]) - z.im[i]));
      }
    }
  }
  CHECK(worst_norm <= 1e-6);
  CHECK(worst_scale <= 1e-5);
}

TEST_CASE("backbone shifts along time with its compression factor") {
  auto m = Model<float>::init(desk_config(), 51);
  Rng rng(52);
  const int64_t t_in = 512, shift = 32;
  Tensor<float> x = Tensor<float>::randn({84, t_in}, rng, 1.0);
  Tensor<float> xs({84, t_in});
  for (int64_t f = 0; f < 84; ++f)
    for (int64_t tt = 0; tt < t_in; ++tt)
      xs[f * t_in + tt] = x[f * t_in + (tt - shift + t_in) % t_in];

  Tape<float> t1, t2;
  const Tensor<float>& y = t1.val(m.backbone_forward(t1, t1.leaf(x.clone())));
  const Tensor<float>& ys = t2.val(m.backbone_forward(t2, t2.leaf(xs.clone())));
  const int64_t tp = y.dim(2);  // 16
  REQUIRE(tp == 16);

  double peak = 0;
  for (int64_t i = 0; i < y.numel(); ++i)
    peak = std::max(peak, std::abs(double(y[i])));
  double dev = 0;
  for (int64_t h = 0; h < y.dim(0); ++h)
    for (int64_t f = 0; f < 84; ++f)
      for (int64_t k = 4; k < 12; ++k) {  // interior frames only
        const double a = y[(h * 84 + f) * tp + k];
        const double b = ys[(h * 84 + f) * tp + k + 1];
        dev = std::max(dev, std::abs(a - b));
      }
  CHECK(dev / peak < 0.15);
}

TEST_CASE("pitch translation by 12 bins moves the activation centroid 12 +/- 1") {
  auto m = Model<float>::init(desk_config(), 61);
  const int64_t t_in = 64;
  // A tone stack occupying bins 24..32 with mild temporal modulation.
  const double weights[9] = {0.3, 0.6, 1.0, 0.8, 1.0, 0.7, 0.9, 0.5, 0.4};
  auto make_input = [&](int64_t base) {
    Tensor<float> x({84, t_in});
    for (int64_t k = 0; k < 9; ++k)
      for (int64_t tt = 0; tt < t_in; ++tt)
        x[(base + k) * t_in + tt] =
            float(weights[k] * (0.8 + 0.2 * std::sin(2 * 3.14159265 * tt / 16.0)));
    return x;
  };
  Tape<float> t1, t2;
  const Tensor<float>& y1 = t1.val(m.backbone_forward(t1, t1.leaf(make_input(24))));
  const Tensor<float>& y2 = t2.val(m.backbone_forward(t2, t2.leaf(make_input(36))));
  const int64_t h = y1.dim(0), tp = y1.dim(2);

  // Both outputs share a constant per-(h,t) background (group-norm offset on
  // the empty regions); measure the response relative to bin 0, far from both
  // stacks.
  auto centroid = [&](const Tensor<float>& y) {
    double num = 0, den = 0;
    for (int64_t f = 0; f < 84; ++f) {
      double mf = 0;
      for (int64_t hh = 0; hh < h; ++hh)
        for (int64_t tt = 0; tt < tp; ++tt)
          mf += std::abs(double(y[(hh * 84 + f) * tp + tt]) -
                         double(y[(hh * 84 + 0) * tp + tt]));
      num += double(f) * mf;
      den += mf;
    }
    return num / den;
  };
  const double shift = centroid(y2) - centroid(y1);
  CHECK(shift == doctest::Approx(12.0).epsilon(0.085));  // 12 +/- 1

  // Translation equivariance pointwise on the response region.
  double peak = 0, dev = 0;
  for (int64_t i = 0; i < y1.numel(); ++i)
    peak = std::max(peak, std::abs(double(y1[i])));
  for (int64_t hh = 0; hh < h; ++hh)
    for (int64_t f = 14; f <= 54; ++f)
      for (int64_t tt = 0; tt < tp; ++tt)
        dev = std::max(dev, std::abs(double(y2[(hh * 84 + f + 12) * tp + tt]) -
                                     double(y1[(hh * 84 + f) * tp + tt])));
  CHECK(dev / peak < 1e-3);
}

TEST_CASE("time projection is pointwise in time") {
  auto m = Model<float>::init(desk_config(), 71);
  Rng rng(72);
  const int64_t h = 32, f = 84, tp = 5;

  // Constant frames project to identical rows.
  Tensor<float> frame = Tensor<float>::randn({h, f, 1}, rng, 1.0);
  Tensor<float> xconst({h, f, tp});
  for (int64_t i = 0; i < h * f; ++i)
    for (int64_t tt = 0; tt < tp; ++tt) xconst[i * tp + tt] = frame[i];
  Tape<float> t;
  const Tensor<float>& zc = t.val(m.project_time(t, t.leaf(xconst.clone())));
  REQUIRE(zc.shape() == Shape{tp, 80});
  for (int64_t tt = 1; tt < tp; ++tt)
    for (int64_t d = 0; d < 80; ++d)
      CHECK(zc[tt * 80 + d] == doctest::Approx(zc[d]).epsilon(1e-6));

  // Permuting frames permutes rows identically.
  Tensor<float> x = Tensor<float>::randn({h, f, tp}, rng, 1.0);
  const int64_t perm[5] = {3, 0, 4, 1, 2};
  Tensor<float> xp({h, f, tp});
  for (int64_t i = 0; i < h * f; ++i)
    for (int64_t tt = 0; tt < tp; ++tt)
      xp[i * tp + tt] = x[i * tp + perm[tt]];
  Tape<float> t2;
  const Tensor<float> z = t2.val(m.project_time(t2, t2.leaf(x.clone())));
  const Tensor<float> zp = t2.val(m.project_time(t2, t2.leaf(xp.clone())));
  for (int64_t tt = 0; tt < tp; ++tt)
    for (int64_t d = 0; d < 80; ++d)
      CHECK(zp[tt * 80 + d] == doctest::Approx(z[perm[tt] * 80 + d]).epsilon(1e-6));

  // Zero projection matrix sends everything to zero.
  m.w_proj.value.zero();
  Tape<float> t3;
  const Tensor<float>& z0 = t3.val(m.project_time(t3, t3.leaf(x.clone())));
  for (int64_t i = 0; i < z0.numel(); ++i) CHECK(z0[i] == 0.0f);
}

TEST_CASE("score matches the elementwise double-sum oracle") {
  Rng rng(81);
  for (int rep = 0; rep < 50; ++rep) {
    const int64_t d = 8;
    CTensor<double> zx = random_unit<double>(d, rng);
    CTensor<double> zy = random_unit<double>(d, rng);
    CTensor<double> w = random_cmatrix<double>(d, d, rng);
    CHECK(std::abs(score(zx, zy, w) - score_oracle(zx, zy, w)) < 1e-10);
    // W = I special cases.
    CTensor<double> eye({d, d});
    for (int64_t i = 0; i < d; ++i) eye.re[i * d + i] = 1;
    CHECK(score(zx, zx, eye) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(score(zx, rotate(zx, 3.14159265358979 / 2), eye)) < 1e-9);
  }
}

TEST_CASE("score_symmetric: swap symmetry and Hermitian-part identity") {
  Rng rng(82);
  for (int rep = 0; rep < 50; ++rep) {
    const int64_t d = 8;
    CTensor<double> zx = random_unit<double>(d, rng);
    CTensor<double> zy = random_unit<double>(d, rng);
    CTensor<double> w = random_cmatrix<double>(d, d, rng);
    const double s1 = score_symmetric(zx, zy, w);
    const double s2 = score_symmetric(zy, zx, w);
    CHECK(std::abs(s1 - s2) < 1e-12);
    CHECK(std::abs(s1 - score_oracle(zx, zy, hermitian_part(w))) < 1e-10);
  }
}

TEST_CASE("bound chain: |score| <= sigma_max and |symmetric| <= eig bound") {
  Rng rng(83);
  const int64_t d = 8;
  CTensor<double> w = random_cmatrix<double>(d, d, rng);
  const double smax = spectral_norm(w);
  const double lmax = hermitian_abs_eigmax(w);
  CHECK(lmax <= smax + 1e-6);
  for (int rep = 0; rep < 2000; ++rep) {
    CTensor<double> zx = random_unit<double>(d, rng);
    CTensor<double> zy = random_unit<double>(d, rng);
    CHECK(std::abs(score(zx, zy, w)) <= smax + 1e-6);
    CHECK(std::abs(score_symmetric(zx, zy, w)) <= lmax + 1e-6);
  }
}

TEST_CASE("psd variant scores itself nonnegatively; full variant need not") {
  Rng rng(84);
  const int64_t d = 8;
  // Any L gives W = L Lᴴ with z ᴴ W z = ‖Lᴴz‖² >= 0.
  CTensor<double> l = random_cmatrix<double>(d, d, rng);
  CTensor<double> w = cplx_matmul(l, cplx_adjoint(l));
  for (int rep = 0; rep < 200; ++rep) {
    CTensor<double> z = random_unit<double>(d, rng);
    CHECK(score_symmetric(z, z, w) >= -1e-10);
  }
  // An indefinite W admits negative self-similarity along its negative
  // eigenvector (here: a basis direction).
  CTensor<double> wneg({d, d});
  for (int64_t i = 0; i < d; ++i) wneg.re[i * d + i] = 1;
  wneg.re[(d - 1) * d + (d - 1)] = -2;
  CTensor<double> en({d});
  en.re[d - 1] = 1;
  CHECK(score_symmetric(en, en, wneg) == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("model metric variants: hermitian symmetry and psd construction") {
  ModelConfig cfg = tiny_config(ScoreVariant::bilinear, MetricVariant::hermitian);
  auto mh = Model<double>::init(cfg, 91);
  CTensor<double> wh = mh.effective_metric();
  const int64_t d = wh.shape()[0];
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = 0; j < d; ++j) {
      CHECK(wh.re[i * d + j] == doctest::Approx(wh.re[j * d + i]).epsilon(1e-12));
      CHECK(wh.im[i * d + j] == doctest::Approx(-wh.im[j * d + i]).epsilon(1e-12));
    }
  Rng rng(92);
  CTensor<double> zx = random_unit<double>(d, rng);
  CTensor<double> zy = random_unit<double>(d, rng);
  CHECK(std::abs(score(zx, zy, wh) - score_symmetric(zx, zy, wh)) < 1e-12);

  cfg.metric_variant = MetricVariant::psd;
  auto mp = Model<double>::init(cfg, 93);
  CTensor<double> wp = mp.effective_metric();
  for (int rep = 0; rep < 100; ++rep) {
    CTensor<double> z = random_unit<double>(d, rng);
    CHECK(score_symmetric(z, z, wp) >= -1e-10);
  }
}

TEST_CASE("cosine is rotation invariant; the bilinear score is not") {
  Rng rng(101);
  const int64_t d = 8;
  CTensor<double> zx = random_unit<double>(d, rng);
  CTensor<double> zy = random_unit<double>(d, rng);
  CTensor<double> w = random_cmatrix<double>(d, d, rng);
  const double c0 = complex_cosine(zx, zy);
  const double s0 = score(zx, zy, w);
  CHECK(complex_cosine(zx, rotate(zx, 0.77)) == doctest::Approx(1.0).epsilon(1e-9));

  double mean_change = 0;
  for (int k = 0; k < 50; ++k) {
    const double theta = rng.uniform(0, 2 * 3.14159265358979);
    CHECK(std::abs(complex_cosine(rotate(zx, theta), zy) - c0) < 1e-12);
    // Joint rotation cancels; single-argument rotation does not.
    CHECK(std::abs(score(rotate(zx, theta), rotate(zy, theta), w) - s0) < 1e-10);
    mean_change += std::abs(score(rotate(zx, theta), zy, w) - s0);
  }
  CHECK(mean_change / 50 >= 1e-2);
}

TEST_CASE("scoring rejects non-normalized embeddings") {
  Rng rng(111);
  const int64_t d = 8;
  CTensor<double> z = random_unit<double>(d, rng);
  CTensor<double> w = random_cmatrix<double>(d, d, rng);
  CTensor<double> bad(scale(z.re, 1.01), scale(z.im, 1.01));
  CHECK_THROWS_WITH_AS(score(bad, z, w), doctest::Contains("unit-norm"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(complex_cosine(z, bad), doctest::Contains("unit-norm"),
                       std::runtime_error);
  // Deviations inside the 1e-3 tolerance are accepted.
  CTensor<double> ok(scale(z.re, 1.0005), scale(z.im, 1.0005));
  CHECK_NOTHROW(score(ok, z, w));
}

TEST_CASE("spectral normalization: unit norm after, exact score scaling, rank order") {
  ModelConfig cfg = tiny_config(ScoreVariant::bilinear, MetricVariant::full);
  cfg.embed_dim = 8;
  auto m = Model<double>::init(cfg, 121);
  // Make the metric less identity-like so rankings are nontrivial.
  Rng rng(122);
  CTensor<double> noise = random_cmatrix<double>(8, 8, rng);
  axpy(0.5, noise.re, m.metric_w.re.value);
  axpy(0.5, noise.im, m.metric_w.im.value);

  const CTensor<double> w_before = m.metric_w.value().clone();
  const double sigma = spectral_norm(w_before);
  CTensor<double> q = random_unit<double>(8, rng);
  std::vector<CTensor<double>> cands;
  std::vector<double> before;
  for (int k = 0; k < 30; ++k) {
    cands.push_back(random_unit<double>(8, rng));
    before.push_back(score_symmetric(q, cands.back(), w_before));
  }

  m.spectral_normalize_inference();
  CHECK(spectral_norm(m.metric_w.value()) == doctest::Approx(1.0).epsilon(1e-6));
  std::vector<size_t> order_before(30), order_after(30);
  for (size_t k = 0; k < 30; ++k) order_before[k] = order_after[k] = k;
  std::vector<double> after;
  for (int k = 0; k < 30; ++k)
    after.push_back(score_symmetric(q, cands[size_t(k)], m.metric_w.value()));
  for (int k = 0; k < 30; ++k)
    CHECK(after[size_t(k)] == doctest::Approx(before[size_t(k)] / sigma).epsilon(1e-9));
  std::sort(order_before.begin(), order_before.end(),
            [&](size_t a, size_t b) { return before[a] > before[b]; });
  std::sort(order_after.begin(), order_after.end(),
            [&](size_t a, size_t b) { return after[a] > after[b]; });
  CHECK(order_before == order_after);

  // Constrained variants refuse; a zero metric refuses.
  ModelConfig cp = tiny_config(ScoreVariant::bilinear, MetricVariant::psd);
  auto mp = Model<double>::init(cp, 123);
  CHECK_THROWS_AS(mp.spectral_normalize_inference(), std::runtime_error);
  m.metric_w.re.value.zero();
  m.metric_w.im.value.zero();
  CHECK_THROWS_WITH_AS(m.spectral_normalize_inference(), doctest::Contains("zero"),
                       std::runtime_error);
}

TEST_CASE("symmetric score matrix agrees with pairwise evaluation") {
  Rng rng(131);
  const int64_t d = 8, n = 5, mm = 7;
  CTensor<double> w = random_cmatrix<double>(d, d, rng);
  CTensor<double> zx({n, d}), zy({mm, d});
  for (int64_t r = 0; r < n; ++r) {
    CTensor<double> z = random_unit<double>(d, rng);
    for (int64_t i = 0; i < d; ++i) {
      zx.re[r * d + i] = z.re[i];
      zx.im[r * d + i] = z.im[i];
    }
  }
  for (int64_t r = 0; r < mm; ++r) {
    CTensor<double> z = random_unit<double>(d, rng);
    for (int64_t i = 0; i < d; ++i) {
      zy.re[r * d + i] = z.re[i];
      zy.im[r * d + i] = z.im[i];
    }
  }
  Tensor<double> s = score_symmetric_matrix(zx, zy, w);
  REQUIRE(s.shape() == Shape{n, mm});
  for (int64_t r = 0; r < n; ++r)
    for (int64_t c = 0; c < mm; ++c) {
      CTensor<double> a(slice_rows(zx.re, r, r + 1).reshape({d}),
                        slice_rows(zx.im, r, r + 1).reshape({d}));
      CTensor<double> b(slice_rows(zy.re, c, c + 1).reshape({d}),
                        slice_rows(zy.im, c, c + 1).reshape({d}));
      CHECK(s[r * mm + c] ==
            doctest::Approx(score_symmetric(a, b, w)).epsilon(1e-10));
    }
}

TEST_CASE("parameter counts: presets and matched ablation heads") {
  auto desk = Model<float>::init(desk_config(), 141);
  CHECK(desk.parameter_count() == 2221386);
  CHECK(desk.muon_parameters().size() == 16);  // 10 pointwise + 5 skip + proj

  auto paper = Model<float>::init(paper_scale_config(), 141);
  // within +/- 15% of the reference budget of 2.3M
  CHECK(paper.parameter_count() == 2453162);
  CHECK(paper.parameter_count() >= int64_t(2.3e6 * 0.85));
  CHECK(paper.parameter_count() <= int64_t(2.3e6 * 1.15));

  ModelConfig c_mlp = desk_config();
  c_mlp.score_variant = ScoreVariant::magnitude_only_mlp;
  auto mlp = Model<float>::init(c_mlp, 141);
  ModelConfig c_gap = desk_config();
  c_gap.score_variant = ScoreVariant::gap_real_mlp;
  auto gap = Model<float>::init(c_gap, 141);

  // Ablation heads replace the complex head at matched size (within 0.1%).
  const int64_t head_reals = 2 * 640 * 640 + 640 + 2 * 640 * 512;
  CHECK(desk.parameter_count() - mlp.parameter_count() == 640);
  CHECK(gap.parameter_count() - desk.parameter_count() == 64);
  CHECK(std::abs(double(desk.parameter_count() - mlp.parameter_count())) /
            double(head_reals) <
        1e-3);
  CHECK(std::abs(double(gap.parameter_count() - desk.parameter_count())) /
            double(head_reals) <
        1e-3);
}

TEST_CASE("init is seed-deterministic; embedding is a pure function") {
  auto a = Model<float>::init(desk_config(), 151);
  auto b = Model<float>::init(desk_config(), 151);
  auto c = Model<float>::init(desk_config(), 152);
  bool same = true, diff = false;
  for (int64_t i = 0; i < a.w_proj.value.numel(); ++i) {
    same = same && a.w_proj.value[i] == b.w_proj.value[i];
    diff = diff || a.w_proj.value[i] != c.w_proj.value[i];
  }
  CHECK(same);
  CHECK(diff);

  Rng rng(153);
  Tensor<float> x = Tensor<float>::randn({84, 64}, rng, 0.5);
  CTensor<float> z1 = embed_inference(a, x);
  CTensor<float> z2 = embed_inference(a, x);
  for (int64_t i = 0; i < z1.numel(); ++i) {
    CHECK(z1.re[i] == z2.re[i]);
    CHECK(z1.im[i] == z2.im[i]);
  }
}

TEST_CASE("every variant emits a unit embedding; real variants have zero phase") {
  Rng rng(161);
  Tensor<float> x = Tensor<float>::randn({84, 64}, rng, 0.5);
  for (ScoreVariant sv :
       {ScoreVariant::bilinear, ScoreVariant::complex_cosine,
        ScoreVariant::magnitude_only_mlp, ScoreVariant::gap_real_mlp}) {
    CAPTURE(to_string(sv));
    ModelConfig cfg = desk_config();
    cfg.score_variant = sv;
    auto m = Model<float>::init(cfg, 162);
    CTensor<float> z = embed_inference(m, x);
    REQUIRE(z.shape() == Shape{512});
    double nrm2 = 0, im_mx = 0;
    for (int64_t i = 0; i < 512; ++i) {
      nrm2 += double(z.re[i]) * z.re[i] + double(z.im[i]) * z.im[i];
      im_mx = std::max(im_mx, std::abs(double(z.im[i])));
    }
    CHECK(std::abs(std::sqrt(nrm2) - 1.0) <= 1e-6);
    if (sv == ScoreVariant::magnitude_only_mlp || sv == ScoreVariant::gap_real_mlp)
      CHECK(im_mx == 0.0);
  }
}

TEST_CASE("variant and metric names round-trip through parsing") {
  for (ScoreVariant sv :
       {ScoreVariant::bilinear, ScoreVariant::complex_cosine,
        ScoreVariant::magnitude_only_mlp, ScoreVariant::gap_real_mlp})
    CHECK(score_variant_from_string(to_string(sv)) == sv);
  for (MetricVariant mv :
       {MetricVariant::full, MetricVariant::psd, MetricVariant::hermitian})
    CHECK(metric_variant_from_string(to_string(mv)) == mv);
  CHECK_THROWS_WITH_AS(score_variant_from_string("dot"),
                       doctest::Contains("bilinear"), std::runtime_error);
  CHECK_THROWS_WITH_AS(metric_variant_from_string("low_rank"),
                       doctest::Contains("hermitian"), std::runtime_error);
}
