#include "phasor/model.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "phasor/linalg.hpp"

namespace phasor {

using namespace phasor::ops;

ScoreVariant score_variant_from_string(const std::string& s) {
  if (s == "bilinear") return ScoreVariant::bilinear;
  if (s == "complex_cosine") return ScoreVariant::complex_cosine;
  if (s == "magnitude_only_mlp") return ScoreVariant::magnitude_only_mlp;
  if (s == "gap_real_mlp") return ScoreVariant::gap_real_mlp;
  PHASOR_CHECK(false, "unknown score variant '", s,
               "'; expected one of bilinear, complex_cosine, "
               "magnitude_only_mlp, gap_real_mlp");
  return ScoreVariant::bilinear;
}

MetricVariant metric_variant_from_string(const std::string& s) {
  if (s == "full") return MetricVariant::full;
  if (s == "psd") return MetricVariant::psd;
  if (s == "hermitian") return MetricVariant::hermitian;
  PHASOR_CHECK(false, "unknown metric variant '", s,
               "'; expected one of full, psd, hermitian");
  return MetricVariant::full;
}

std::string to_string(ScoreVariant v) {
  switch (v) {
    case ScoreVariant::bilinear: return "bilinear";
    case ScoreVariant::complex_cosine: return "complex_cosine";
    case ScoreVariant::magnitude_only_mlp: return "magnitude_only_mlp";
    case ScoreVariant::gap_real_mlp: return "gap_real_mlp";
  }
  return "?";
}

std::string to_string(MetricVariant v) {
  switch (v) {
    case MetricVariant::full: return "full";
    case MetricVariant::psd: return "psd";
    case MetricVariant::hermitian: return "hermitian";
  }
  return "?";
}

namespace {

ModelConfig base_config() {
  ModelConfig c;
  c.head_hidden = c.c_bins * c.d_dim;  // 640
  // Hidden widths chosen so each ablation head's real parameter count matches
  // the complex head it replaces to within 0.1% (no-bias two-layer MLPs):
  //   head reals = 2*640*640 + 2*640*512 + 640        = 1,475,200
  //   |S| MLP    = 640*1280 + 1280*512                 = 1,474,560
  //   averaged   = 80*2492 + 2492*512                  = 1,475,264
  c.mlp_hidden = 1280;
  c.gap_hidden = 2492;
  return c;
}

// Group count for a channel width: 8 when divisible, otherwise the largest
// common divisor so per-group statistics stay well defined.
int64_t norm_groups(int64_t ch) { return std::gcd(ch, int64_t(8)); }

constexpr double kGnEps = 1e-5;
constexpr double kRmsEps = 1e-6;

}  // namespace

ModelConfig desk_config() {
  ModelConfig c = base_config();
  c.preset = "desk";
  c.channels = {4, 4, 6, 6, 8, 8, 12, 12, 16, 16};
  return c;
}

ModelConfig paper_scale_config() {
  ModelConfig c = base_config();
  c.preset = "paper-scale";
  c.channels = {16, 16, 24, 24, 32, 32, 48, 48, 64, 64};
  return c;
}

// ---- axial block ----

template <class S>
Val<S> AxialBlock<S>::forward(Tape<S>& t, Val<S> x) const {
  auto* self = const_cast<AxialBlock<S>*>(this);
  Val<S> a = t_conv_dw_freq(t, x, t.leaf(&self->fw));
  a = t_groupnorm_relu(t, a, t.leaf(&self->gn1_gain), t.leaf(&self->gn1_bias),
                       groups_in, S(kGnEps));
  a = t_conv_dw_time(t, a, t.leaf(&self->tw), stride);
  a = t_groupnorm_relu(t, a, t.leaf(&self->gn2_gain), t.leaf(&self->gn2_bias),
                       groups_in, S(kGnEps));
  a = t_conv_pw(t, a, t.leaf(&self->pw), 1);
  Val<S> s;
  if (skip.has_value())
    s = t_conv_pw(t, x, t.leaf(&self->skip.value()), stride);
  else if (stride != 1)
    s = t_subsample_time(t, x, stride);
  else
    s = x;
  return t_groupnorm_add(t, a, t.leaf(&self->gn3_gain),
                         t.leaf(&self->gn3_bias), s, groups_out, S(kGnEps));
}

template <class S>
void AxialBlock<S>::collect(std::vector<Parameter<S>*>& out) {
  out.push_back(&fw);
  out.push_back(&tw);
  out.push_back(&pw);
  if (skip.has_value()) out.push_back(&skip.value());
  out.push_back(&gn1_gain);
  out.push_back(&gn1_bias);
  out.push_back(&gn2_gain);
  out.push_back(&gn2_bias);
  out.push_back(&gn3_gain);
  out.push_back(&gn3_bias);
}

// ---- construction ----

namespace {

template <class S>
Parameter<S> randn_param(const std::string& name, Shape shape, Rng& rng,
                         double stddev) {
  return Parameter<S>(name, Tensor<S>::randn(std::move(shape), rng, stddev));
}

template <class S>
CTensor<S> randn_ctensor(Shape shape, Rng& rng, double stddev) {
  Tensor<S> re = Tensor<S>::randn(shape, rng, stddev);
  Tensor<S> im = Tensor<S>::randn(std::move(shape), rng, stddev);
  return CTensor<S>(std::move(re), std::move(im));
}

template <class S>
void add_diag(CTensor<S>& w, S v) {
  const int64_t n = w.shape()[0];
  for (int64_t i = 0; i < n; ++i) w.re[i * n + i] += v;
}

}  // namespace

template <class S>
Model<S> Model<S>::init(const ModelConfig& cfg, uint64_t seed) {
  PHASOR_CHECK(!cfg.channels.empty(), "model config has an empty channel plan");
  Model<S> m;
  m.cfg = cfg;
  Rng root = Rng(seed).derive("model");

  int64_t in = 1;
  for (size_t i = 0; i < cfg.channels.size(); ++i) {
    const int64_t out = cfg.channels[i];
    const int64_t stride = (i % 2 == 1) ? 2 : 1;  // halve time every 2nd block
    Rng br = root.derive("block", uint64_t(i));
    AxialBlock<S> b;
    b.in_ch = in;
    b.out_ch = out;
    b.stride = stride;
    b.groups_in = norm_groups(in);
    b.groups_out = norm_groups(out);
    const std::string p = "backbone." + std::to_string(i) + ".";
    b.fw = randn_param<S>(p + "fw", {in, 3}, br, std::sqrt(2.0 / 3.0));
    b.tw = randn_param<S>(p + "tw", {in, 3}, br, std::sqrt(2.0 / 3.0));
    b.pw = randn_param<S>(p + "pw", {out, in}, br, std::sqrt(2.0 / double(in)));
    if (in != out)
      b.skip = randn_param<S>(p + "skip", {out, in}, br,
                              std::sqrt(1.0 / double(in)));
    b.gn1_gain = Parameter<S>(p + "gn1.gain", Tensor<S>::full({in}, S(1)));
    b.gn1_bias = Parameter<S>(p + "gn1.bias", Tensor<S>({in}));
    b.gn2_gain = Parameter<S>(p + "gn2.gain", Tensor<S>::full({in}, S(1)));
    b.gn2_bias = Parameter<S>(p + "gn2.bias", Tensor<S>({in}));
    b.gn3_gain = Parameter<S>(p + "gn3.gain", Tensor<S>::full({out}, S(1)));
    b.gn3_bias = Parameter<S>(p + "gn3.bias", Tensor<S>({out}));
    m.blocks.push_back(std::move(b));
    in = out;
  }

  const int64_t hf = in * cfg.freq_bins;
  {
    Rng pr = root.derive("proj");
    m.w_proj = randn_param<S>("embedder.w_proj", {hf, cfg.d_dim}, pr,
                              std::sqrt(1.0 / double(hf)));
  }

  const int64_t cd = cfg.head_hidden;
  const bool complex_head = cfg.score_variant == ScoreVariant::bilinear ||
                            cfg.score_variant == ScoreVariant::complex_cosine;
  if (complex_head) {
    Rng hr = root.derive("head");
    const double s1 = 1.0 / std::sqrt(2.0 * double(cd));
    m.head_l1 = CParameter<S>("head.l1", randn_ctensor<S>({cd, cd}, hr, s1));
    m.head_b = Parameter<S>("head.b", Tensor<S>({cd}));
    m.head_l2 = CParameter<S>(
        "head.l2", randn_ctensor<S>({cd, cfg.embed_dim}, hr, s1));
  }

  if (cfg.score_variant != ScoreVariant::complex_cosine) {
    Rng mr = root.derive("metric");
    CTensor<S> w =
        randn_ctensor<S>({cfg.embed_dim, cfg.embed_dim}, mr, 0.01);
    // Start each parameterization near the identity form.
    switch (cfg.metric_variant) {
      case MetricVariant::full: add_diag(w, S(1)); break;
      case MetricVariant::psd: add_diag(w, S(1)); break;        // L ≈ I
      case MetricVariant::hermitian: add_diag(w, S(0.5)); break; // L+Lᴴ ≈ I
    }
    m.metric_w = CParameter<S>("metric.w", std::move(w));
  }

  if (cfg.score_variant == ScoreVariant::magnitude_only_mlp) {
    Rng ar = root.derive("ablation");
    m.mlp_w1 = randn_param<S>("mlp.w1", {cd, cfg.mlp_hidden}, ar,
                              std::sqrt(2.0 / double(cd)));
    m.mlp_w2 = randn_param<S>("mlp.w2", {cfg.mlp_hidden, cfg.embed_dim}, ar,
                              std::sqrt(1.0 / double(cfg.mlp_hidden)));
  } else if (cfg.score_variant == ScoreVariant::gap_real_mlp) {
    Rng ar = root.derive("ablation");
    m.gap_w1 = randn_param<S>("gap.w1", {cfg.d_dim, cfg.gap_hidden}, ar,
                              std::sqrt(2.0 / double(cfg.d_dim)));
    m.gap_w2 = randn_param<S>("gap.w2", {cfg.gap_hidden, cfg.embed_dim}, ar,
                              std::sqrt(1.0 / double(cfg.gap_hidden)));
  }
  return m;
}

template <class S>
std::vector<Parameter<S>*> Model<S>::parameters() {
  std::vector<Parameter<S>*> out;
  for (auto& b : blocks) b.collect(out);
  out.push_back(&w_proj);
  switch (cfg.score_variant) {
    case ScoreVariant::bilinear:
    case ScoreVariant::complex_cosine:
      out.push_back(&head_l1.re);
      out.push_back(&head_l1.im);
      out.push_back(&head_b);
      out.push_back(&head_l2.re);
      out.push_back(&head_l2.im);
      break;
    case ScoreVariant::magnitude_only_mlp:
      out.push_back(&mlp_w1);
      out.push_back(&mlp_w2);
      break;
    case ScoreVariant::gap_real_mlp:
      out.push_back(&gap_w1);
      out.push_back(&gap_w2);
      break;
  }
  if (cfg.score_variant != ScoreVariant::complex_cosine) {
    out.push_back(&metric_w.re);
    out.push_back(&metric_w.im);
  }
  return out;
}

template <class S>
std::vector<Parameter<S>*> Model<S>::muon_parameters() {
  std::vector<Parameter<S>*> out;
  for (auto& b : blocks) {
    out.push_back(&b.pw);
    if (b.skip.has_value()) out.push_back(&b.skip.value());
  }
  out.push_back(&w_proj);
  return out;
}

template <class S>
int64_t Model<S>::parameter_count() {
  int64_t n = 0;
  for (auto* p : parameters()) n += p->value.numel();
  return n;
}

// ---- forward passes ----

template <class S>
Val<S> Model<S>::backbone_forward(Tape<S>& t, Val<S> cqt_mag) const {
  const Tensor<S>& xv = t.val(cqt_mag);
  PHASOR_CHECK(xv.rank() == 2 && xv.dim(0) == cfg.freq_bins,
               "backbone: expected a [", cfg.freq_bins,
               ", T] spectrogram, got ", shape_str(xv.shape()));
  PHASOR_CHECK(xv.dim(1) >= cfg.min_frames(), "backbone: input has ",
               xv.dim(1), " frames, minimum is ", cfg.min_frames());
  Val<S> h = t_reshape(t, cqt_mag, {1, cfg.freq_bins, xv.dim(1)});
  for (const auto& b : blocks) h = b.forward(t, h);
  return h;
}

template <class S>
Val<S> Model<S>::project_time(Tape<S>& t, Val<S> feat) const {
  auto* self = const_cast<Model<S>*>(this);
  const Tensor<S>& fv = t.val(feat);
  PHASOR_CHECK(fv.rank() == 3, "project_time: expected [H, F, T'] features");
  const int64_t hf = fv.dim(0) * fv.dim(1);
  PHASOR_CHECK(hf == w_proj.value.dim(0),
               "project_time: feature plane ", hf,
               " does not match the projection rows ", w_proj.value.dim(0));
  Val<S> flat = t_reshape(t, feat, {hf, fv.dim(2)});
  return t_matmul(t, flat, t.leaf(&self->w_proj), /*trans_a=*/true,
                  /*trans_b=*/false);
}

template <class S>
CVal<S> Model<S>::head_forward(Tape<S>& t, CVal<S> pooled) const {
  auto* self = const_cast<Model<S>*>(this);
  const int64_t cd = cfg.head_hidden;
  const Tensor<S>& pv = t.val(pooled.re);
  PHASOR_CHECK(pv.numel() == cd || (pv.rank() == 2 && pv.dim(1) == cd),
               "head: expected a [", cfg.c_bins, ", ", cfg.d_dim,
               "] pooled summary or a [B, ", cd, "] stack of them");
  // Row-major flatten: coefficient index outer, embedding dimension inner.
  CVal<S> h = pv.numel() == cd ? c_reshape(t, pooled, {1, cd}) : pooled;
  h = c_matmul(t, h, t.leaf(&self->head_l1));
  h = c_rmsnorm(t, h, S(kRmsEps));
  h = c_modrelu(t, h, t.leaf(&self->head_b));
  h = c_matmul(t, h, t.leaf(&self->head_l2));
  return c_rownorm(t, h);
}

template <class S>
CVal<S> Model<S>::embed(Tape<S>& t, Val<S> cqt_mag) const {
  auto* self = const_cast<Model<S>*>(this);
  Val<S> feat = backbone_forward(t, cqt_mag);
  Val<S> ztime = project_time(t, feat);  // [T', D]
  switch (cfg.score_variant) {
    case ScoreVariant::bilinear:
    case ScoreVariant::complex_cosine: {
      CVal<S> pooled = c_spectral_pool(t, ztime, cfg.c_bins);
      return head_forward(t, pooled);
    }
    case ScoreVariant::magnitude_only_mlp: {
      CVal<S> pooled = c_spectral_pool(t, ztime, cfg.c_bins);
      Val<S> mag = c_abs(t, pooled);  // [C, D]
      Val<S> h = t_reshape(t, mag, {1, cfg.head_hidden});
      h = t_matmul(t, h, t.leaf(&self->mlp_w1));
      h = t_relu(t, h);
      h = t_matmul(t, h, t.leaf(&self->mlp_w2));
      h = t_rownorm(t, h);
      return CVal<S>{h, t.leaf(Tensor<S>({1, cfg.embed_dim}))};
    }
    case ScoreVariant::gap_real_mlp: {
      Val<S> mean = t_mean_rows(t, ztime);  // [D]
      Val<S> h = t_reshape(t, mean, {1, cfg.d_dim});
      h = t_matmul(t, h, t.leaf(&self->gap_w1));
      h = t_relu(t, h);
      h = t_matmul(t, h, t.leaf(&self->gap_w2));
      h = t_rownorm(t, h);
      return CVal<S>{h, t.leaf(Tensor<S>({1, cfg.embed_dim}))};
    }
  }
  PHASOR_CHECK(false, "unreachable score variant");
  return {};
}

template <class S>
CVal<S> Model<S>::embed_batch(Tape<S>& t,
                              const std::vector<Val<S>>& cqt_mags) const {
  auto* self = const_cast<Model<S>*>(this);
  PHASOR_CHECK(!cqt_mags.empty(), "embed_batch: empty batch");
  const int64_t b = int64_t(cqt_mags.size());
  std::vector<Val<S>> ztimes;
  ztimes.reserve(cqt_mags.size());
  for (Val<S> cqt : cqt_mags)
    ztimes.push_back(project_time(t, backbone_forward(t, cqt)));
  switch (cfg.score_variant) {
    case ScoreVariant::bilinear:
    case ScoreVariant::complex_cosine: {
      std::vector<CVal<S>> rows;
      rows.reserve(ztimes.size());
      for (Val<S> zt : ztimes)
        rows.push_back(
            c_reshape(t, c_spectral_pool(t, zt, cfg.c_bins),
                      {1, cfg.head_hidden}));
      return head_forward(t, c_stack_rows(t, rows));
    }
    case ScoreVariant::magnitude_only_mlp: {
      std::vector<Val<S>> rows;
      rows.reserve(ztimes.size());
      for (Val<S> zt : ztimes)
        rows.push_back(t_reshape(
            t, c_abs(t, c_spectral_pool(t, zt, cfg.c_bins)),
            {1, cfg.head_hidden}));
      Val<S> h = t_stack_rows(t, rows);
      h = t_matmul(t, h, t.leaf(&self->mlp_w1));
      h = t_relu(t, h);
      h = t_matmul(t, h, t.leaf(&self->mlp_w2));
      h = t_rownorm(t, h);
      return CVal<S>{h, t.leaf(Tensor<S>({b, cfg.embed_dim}))};
    }
    case ScoreVariant::gap_real_mlp: {
      std::vector<Val<S>> rows;
      rows.reserve(ztimes.size());
      for (Val<S> zt : ztimes)
        rows.push_back(t_reshape(t, t_mean_rows(t, zt), {1, cfg.d_dim}));
      Val<S> h = t_stack_rows(t, rows);
      h = t_matmul(t, h, t.leaf(&self->gap_w1));
      h = t_relu(t, h);
      h = t_matmul(t, h, t.leaf(&self->gap_w2));
      h = t_rownorm(t, h);
      return CVal<S>{h, t.leaf(Tensor<S>({b, cfg.embed_dim}))};
    }
  }
  PHASOR_CHECK(false, "unreachable score variant");
  return {};
}

template <class S>
CVal<S> Model<S>::metric_on_tape(Tape<S>& t) const {
  auto* self = const_cast<Model<S>*>(this);
  CVal<S> l = t.leaf(&self->metric_w);
  switch (cfg.metric_variant) {
    case MetricVariant::full:
      return l;
    case MetricVariant::psd:
      // L Lᴴ = L · conj(L)ᵀ
      return c_matmul(t, l, c_conj(t, l), false, true);
    case MetricVariant::hermitian:
      return c_add(t, l, c_conj(t, c_transpose(t, l)));
  }
  PHASOR_CHECK(false, "unreachable metric variant");
  return {};
}

template <class S>
Val<S> Model<S>::score_matrix(Tape<S>& t, CVal<S> zx, CVal<S> zy) const {
  if (cfg.score_variant == ScoreVariant::complex_cosine) {
    CVal<S> gram = c_matmul(t, c_conj(t, zx), zy, false, true);
    return c_abs(t, gram);
  }
  CVal<S> w = metric_on_tape(t);
  CVal<S> a = c_matmul(t, c_conj(t, zx), w);       // [B, D]
  CVal<S> gram = c_matmul(t, a, zy, false, true);  // [B, B]
  return gram.re;  // training score is Re(z_xᴴ W z_y)
}

// ---- metric utilities ----

template <class S>
CTensor<S> Model<S>::effective_metric() const {
  PHASOR_CHECK(cfg.score_variant != ScoreVariant::complex_cosine,
               "the cosine variant has no learned metric");
  CTensor<S> l = metric_w.value();
  switch (cfg.metric_variant) {
    case MetricVariant::full:
      return l.clone();
    case MetricVariant::psd:
      return cplx_matmul(l, cplx_adjoint(l));
    case MetricVariant::hermitian: {
      CTensor<S> lh = cplx_adjoint(l);
      return CTensor<S>(add(l.re, lh.re), add(l.im, lh.im));
    }
  }
  PHASOR_CHECK(false, "unreachable metric variant");
  return {};
}

template <class S>
void Model<S>::spectral_normalize_inference() {
  PHASOR_CHECK(cfg.metric_variant == MetricVariant::full,
               "spectral normalization rescales the stored matrix directly "
               "and is defined for the unconstrained metric only, not '",
               to_string(cfg.metric_variant), "'");
  const S sigma = spectral_norm(metric_w.value());
  PHASOR_CHECK(sigma > S(0),
               "cannot spectrally normalize a metric with zero largest "
               "singular value");
  metric_w.re.value = scale(metric_w.re.value, S(1) / sigma);
  metric_w.im.value = scale(metric_w.im.value, S(1) / sigma);
}

// ---- inference-side scoring ----

namespace {

template <class S>
void check_unit_rows(const CTensor<S>& z, const char* who) {
  const Shape& s = z.shape();
  const int64_t rows = s.size() == 1 ? 1 : s[0];
  const int64_t d = s.size() == 1 ? s[0] : s[1];
  for (int64_t r = 0; r < rows; ++r) {
    double nrm2 = 0;
    for (int64_t i = 0; i < d; ++i) {
      const double re = z.re[r * d + i], im = z.im[r * d + i];
      nrm2 += re * re + im * im;
    }
    const double dev = std::abs(std::sqrt(nrm2) - 1.0);
    PHASOR_CHECK(dev <= 1e-3, who, ": embedding row ", r,
                 " is not unit-norm (|‖z‖ − 1| = ", dev,
                 " exceeds the 1e-3 tolerance)");
  }
}

}  // namespace

template <class S>
S score(const CTensor<S>& zx, const CTensor<S>& zy, const CTensor<S>& w) {
  PHASOR_CHECK(zx.shape() == zy.shape() && zx.numel() == w.shape()[0] &&
                   w.shape().size() == 2 && w.shape()[0] == w.shape()[1],
               "score: expected two [D] embeddings and a [D, D] metric");
  check_unit_rows(zx, "score");
  check_unit_rows(zy, "score");
  CTensor<S> wy = cplx_matvec(w, zy, /*adjoint=*/false);
  // Re(z_xᴴ (W z_y)) = Σ Re(conj(zx_i) wy_i)
  return dot(zx.re, wy.re) + dot(zx.im, wy.im);
}

template <class S>
S score_symmetric(const CTensor<S>& zx, const CTensor<S>& zy,
                  const CTensor<S>& w) {
  return (score(zx, zy, w) + score(zy, zx, w)) / S(2);
}

template <class S>
S complex_cosine(const CTensor<S>& zx, const CTensor<S>& zy) {
  PHASOR_CHECK(zx.shape() == zy.shape(), "complex_cosine: shape mismatch");
  check_unit_rows(zx, "complex_cosine");
  check_unit_rows(zy, "complex_cosine");
  // <zx, zy> = Σ conj(zx_i) zy_i
  const S re = dot(zx.re, zy.re) + dot(zx.im, zy.im);
  const S im = dot(zx.re, zy.im) - dot(zx.im, zy.re);
  return S(std::hypot(double(re), double(im)));
}

template <class S>
Tensor<S> score_symmetric_matrix(const CTensor<S>& zx, const CTensor<S>& zy,
                                 const CTensor<S>& w) {
  PHASOR_CHECK(zx.shape().size() == 2 && zy.shape().size() == 2 &&
                   zx.shape()[1] == zy.shape()[1],
               "score matrix: expected [N, D] and [M, D] embeddings");
  check_unit_rows(zx, "score matrix");
  check_unit_rows(zy, "score matrix");
  const CTensor<S> weff = hermitian_part(w);
  // A = conj(Zx) · W_eff ; S = Re(A · Zyᵀ)
  Tensor<S> a_re = matmul(zx.re, weff.re);
  matmul_acc(zx.im, weff.im, a_re);
  Tensor<S> a_im = matmul(zx.re, weff.im);
  matmul_acc(zx.im, scale(weff.re, S(-1)), a_im);
  Tensor<S> out = matmul(a_re, zy.re, false, true);
  Tensor<S> neg = matmul(a_im, zy.im, false, true);
  axpy(S(-1), neg, out);
  return out;
}

template <class S>
CTensor<S> embed_inference(Model<S>& m, const Tensor<S>& cqt_mag) {
  Tape<S> t;
  Val<S> x = t.leaf(cqt_mag.clone());
  CVal<S> z = m.embed(t, x);
  CTensor<S> zt = t.cval(z);
  return zt.reshape({m.cfg.embed_dim});
}

#define PHASOR_INSTANTIATE_MODEL(S)                                          \
  template struct AxialBlock<S>;                                             \
  template struct Model<S>;                                                  \
  template S score(const CTensor<S>&, const CTensor<S>&, const CTensor<S>&); \
  template S score_symmetric(const CTensor<S>&, const CTensor<S>&,           \
                             const CTensor<S>&);                             \
  template S complex_cosine(const CTensor<S>&, const CTensor<S>&);           \
  template Tensor<S> score_symmetric_matrix(                                 \
      const CTensor<S>&, const CTensor<S>&, const CTensor<S>&);              \
  template CTensor<S> embed_inference(Model<S>&, const Tensor<S>&);

PHASOR_INSTANTIATE_MODEL(float)
PHASOR_INSTANTIATE_MODEL(double)
#undef PHASOR_INSTANTIATE_MODEL

}  // namespace phasor
