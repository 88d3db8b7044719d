#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phasor/ops.hpp"
#include "phasor/rng.hpp"
#include "phasor/tape.hpp"

// The coherence model: a real-valued axial convolutional backbone over
// constant-Q magnitudes, a spectral pooling stage that summarizes each
// embedding dimension's temporal trajectory by its low-frequency Fourier
// coefficients, a complex-valued head producing a unit-norm embedding, and a
// learned bilinear similarity acting on embedding pairs.
namespace phasor {

// How pairs of embeddings are scored / which head produces the embedding.
enum class ScoreVariant {
  bilinear,            // complex embedding, learned bilinear form
  complex_cosine,      // complex embedding, |<z_x, z_y>| (no learned metric)
  magnitude_only_mlp,  // real MLP on |S| (drops pooled phases)
  gap_real_mlp,        // real MLP on the time-averaged trajectory (no pooling)
};

// Parameterization of the bilinear form.
enum class MetricVariant {
  full,       // W unconstrained
  psd,        // W = L Lᴴ (scores of a vector with itself are >= 0)
  hermitian,  // W = L + Lᴴ (score is symmetric by construction)
};

ScoreVariant score_variant_from_string(const std::string& s);
MetricVariant metric_variant_from_string(const std::string& s);
std::string to_string(ScoreVariant v);
std::string to_string(MetricVariant v);

struct ModelConfig {
  std::string preset = "desk";   // "desk" or "paper-scale"
  std::vector<int64_t> channels; // backbone output channels, one per block
  int64_t freq_bins = 84;        // spectrogram rows fed to the backbone
  int64_t d_dim = 80;            // per-frame embedding width after projection
  int64_t c_bins = 8;            // retained spectral-pool coefficients
  int64_t embed_dim = 512;       // final embedding dimension
  int64_t head_hidden = 0;       // = c_bins * d_dim, set by the presets
  int64_t mlp_hidden = 0;        // hidden width of the magnitude-MLP ablation
  int64_t gap_hidden = 0;        // hidden width of the time-average ablation
  ScoreVariant score_variant = ScoreVariant::bilinear;
  MetricVariant metric_variant = MetricVariant::full;

  int64_t time_compression() const { return 32; } // product of block strides
  int64_t min_frames() const { return 32; }
};

// "desk": small channel plan sized so a training step fits a single-core
// budget. "paper-scale": the reference-sized plan.
ModelConfig desk_config();
ModelConfig paper_scale_config();

// One block of the backbone: depthwise 3x1 conv along frequency, depthwise
// 1x3 conv along time (carrying the block's stride), then a full pointwise
// channel mix, each preceded/followed by group norm + ReLU as
//   y = skip(x) + GN(PW(ReLU(GN(TW(ReLU(GN(FW(x))))))))   [GN per stage]
// The skip is the identity when shapes match, a strided subsample when only
// time is reduced, and a strided 1x1 conv when the channel count changes.
template <class S>
struct AxialBlock {
  int64_t in_ch = 0, out_ch = 0, stride = 1;
  Parameter<S> fw;  // [in_ch, 3]
  Parameter<S> tw;  // [in_ch, 3]
  Parameter<S> pw;  // [out_ch, in_ch]
  std::optional<Parameter<S>> skip;  // [out_ch, in_ch]
  Parameter<S> gn1_gain, gn1_bias;   // [in_ch]
  Parameter<S> gn2_gain, gn2_bias;   // [in_ch]
  Parameter<S> gn3_gain, gn3_bias;   // [out_ch]
  int64_t groups_in = 1, groups_out = 1;

  Val<S> forward(Tape<S>& t, Val<S> x) const;
  void collect(std::vector<Parameter<S>*>& out);
};

template <class S>
struct Model {
  ModelConfig cfg;

  std::vector<AxialBlock<S>> blocks;
  Parameter<S> w_proj;       // [H_last * F, D]
  CParameter<S> head_l1;     // [CD, CD]
  Parameter<S> head_b;       // [CD] modReLU thresholds
  CParameter<S> head_l2;     // [CD, embed_dim]
  CParameter<S> metric_w;    // [embed_dim, embed_dim]; W itself or the L factor
  // Ablation heads (allocated only for their variants).
  Parameter<S> mlp_w1, mlp_w2;  // magnitude_only_mlp
  Parameter<S> gap_w1, gap_w2;  // gap_real_mlp

  static Model init(const ModelConfig& cfg, uint64_t seed);

  std::vector<Parameter<S>*> parameters();
  // Parameters routed to the matrix-orthogonalizing optimizer: the hidden
  // channel-mixing matrices (pointwise/skip convs and the time projection).
  // Everything else (depthwise stencils, norms, head, metric) uses Adam.
  std::vector<Parameter<S>*> muon_parameters();
  int64_t parameter_count();

  // Backbone: [F, T] magnitudes -> [H_last, F, T'] with T' = ceil(T / 32).
  // T below min_frames() is an error naming the minimum.
  Val<S> backbone_forward(Tape<S>& t, Val<S> cqt_mag) const;
  // [H, F, T'] -> [T', D] per-frame projections.
  Val<S> project_time(Tape<S>& t, Val<S> feat) const;
  // Head on the pooled [C, D] summary -> unit-norm complex [1, embed_dim].
  CVal<S> head_forward(Tape<S>& t, CVal<S> pooled) const;
  // Full pipeline for the configured variant; always [1, embed_dim] complex
  // (the real-MLP ablations return a zero imaginary part).
  CVal<S> embed(Tape<S>& t, Val<S> cqt_mag) const;
  // Batched pipeline: runs the backbone per crop, then the head once on the
  // stacked pooled rows, so weight gradients accumulate through single
  // full-batch matmuls instead of one rank-1 update per crop. Returns
  // [B, embed_dim] complex with rows in input order.
  CVal<S> embed_batch(Tape<S>& t, const std::vector<Val<S>>& cqt_mags) const;

  // [B, embed_dim] x [B, embed_dim] -> real [B, B] training scores under the
  // configured variant (bilinear variants use the asymmetric form).
  Val<S> score_matrix(Tape<S>& t, CVal<S> zx, CVal<S> zy) const;

  // The metric as a tape value (W itself, or L Lᴴ / L + Lᴴ composed on tape
  // so gradients reach the factor).
  CVal<S> metric_on_tape(Tape<S>& t) const;

  // The matrix the bilinear form is evaluated with (W, L Lᴴ, or L + Lᴴ).
  CTensor<S> effective_metric() const;
  // Rescale the stored metric so its largest singular value is 1. Rankings
  // under the score are unchanged. Only meaningful for the unconstrained
  // variant; zero spectral norm is an error.
  void spectral_normalize_inference();
};

// ---- inference-side scoring (plain tensors, no tape) ----

// Asymmetric bilinear score Re(z_xᴴ W z_y). Inputs must be unit-norm within
// 1e-3 or the call is rejected.
template <class S>
S score(const CTensor<S>& zx, const CTensor<S>& zy, const CTensor<S>& w);

// (score(x,y) + score(y,x)) / 2 = Re(z_xᴴ W_eff z_y), W_eff = (W + Wᴴ)/2.
template <class S>
S score_symmetric(const CTensor<S>& zx, const CTensor<S>& zy, const CTensor<S>& w);

// |<z_x, z_y>| — invariant to a global phase on either argument.
template <class S>
S complex_cosine(const CTensor<S>& zx, const CTensor<S>& zy);

// All-pairs symmetric scores: rows index zx entries, columns zy entries.
// zx, zy: [N, D] and [M, D] complex; result [N, M] real.
template <class S>
Tensor<S> score_symmetric_matrix(const CTensor<S>& zx, const CTensor<S>& zy,
                                 const CTensor<S>& w);

// Embedding helper used by evaluation paths: runs the model forward on a
// throwaway tape and returns the [embed_dim] complex embedding.
template <class S>
CTensor<S> embed_inference(Model<S>& m, const Tensor<S>& cqt_mag);

}  // namespace phasor
