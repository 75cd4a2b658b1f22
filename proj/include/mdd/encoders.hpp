/* Copyright 2026 The mddkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "mdd/fusion.hpp"
#include "mdd/matrix.hpp"
#include "mdd/phone.hpp"
#include "mdd/rng.hpp"

// Desk-scale recognizer: a position-free residual MLP stack over per-frame
// features (audio encoder), an embedding + self-attention stack over the
// canonical phones (text encoder), the fusion layer, and an attention +
// projection output head emitting a normalized log-probability lattice.
// Forward keeps every intermediate needed so backward() can produce exact
// gradients for all parameters; gradients are verified against central finite
// differences in the test suite.

namespace mdd {

inline constexpr double kLayerNormEpsilon = 1e-5;

template <class S>
struct LinearParams {
  Matrix<S> w;  // fan_in x fan_out
  Matrix<S> b;  // 1 x fan_out
};

template <class S>
struct LayerNormParams {
  Matrix<S> gain;  // 1 x d
  Matrix<S> bias;  // 1 x d
};

template <class S>
struct ResidualBlockParams {
  LinearParams<S> lin;
  LayerNormParams<S> norm;
};

template <class S>
struct SelfAttnBlockParams {
  LinearParams<S> out;  // d x d projection of the attention context
  LayerNormParams<S> norm;
};

template <class S>
struct AudioEncoderParams {
  LinearParams<S> input;  // d_in -> d
  std::vector<ResidualBlockParams<S>> blocks;
};

template <class S>
struct TextEncoderParams {
  Matrix<S> embeddings;  // V x d, row id-1
  Matrix<S> positions;   // n_max x d, learned
  std::vector<SelfAttnBlockParams<S>> blocks;
};

template <class S>
struct OutputHeadParams {
  SelfAttnBlockParams<S> attn;
  LinearParams<S> proj;  // d -> V+1
};

struct ModelDims {
  int d_in = 16;
  int d = 32;
  int num_phones = 12;
  int audio_blocks = 2;
  int text_blocks = 2;
  int n_max = 16;

  void validate() const {
    if (d_in < 1 || d < 1 || num_phones < 1 || audio_blocks < 1 || text_blocks < 1 ||
        n_max < 1) {
      throw InvalidArgument("model dims must all be positive");
    }
  }
  bool operator==(const ModelDims&) const = default;
};

template <class S>
struct ModelParams {
  ModelDims dims;
  GateVariant variant;
  AudioEncoderParams<S> audio;
  TextEncoderParams<S> text;
  GateParams<S> fusion;
  OutputHeadParams<S> head;
};

enum class ParamGroup { kAudio, kText, kFusion, kHead };

template <class S>
struct ParamRef {
  ParamGroup group;
  std::string name;
  Matrix<S>* matrix;
};

// Every trainable tensor, in a fixed order shared by the optimizer, the
// checkpoint format and the finite-difference harness.
template <class S>
std::vector<ParamRef<S>> param_refs(ModelParams<S>& m) {
  std::vector<ParamRef<S>> refs;
  auto add = [&](ParamGroup g, std::string name, Matrix<S>& mat) {
    refs.push_back(ParamRef<S>{g, std::move(name), &mat});
  };
  add(ParamGroup::kAudio, "audio.input.w", m.audio.input.w);
  add(ParamGroup::kAudio, "audio.input.b", m.audio.input.b);
  for (std::size_t k = 0; k < m.audio.blocks.size(); ++k) {
    const std::string p = "audio.block" + std::to_string(k);
    add(ParamGroup::kAudio, p + ".lin.w", m.audio.blocks[k].lin.w);
    add(ParamGroup::kAudio, p + ".lin.b", m.audio.blocks[k].lin.b);
    add(ParamGroup::kAudio, p + ".norm.gain", m.audio.blocks[k].norm.gain);
    add(ParamGroup::kAudio, p + ".norm.bias", m.audio.blocks[k].norm.bias);
  }
  add(ParamGroup::kText, "text.embeddings", m.text.embeddings);
  add(ParamGroup::kText, "text.positions", m.text.positions);
  for (std::size_t k = 0; k < m.text.blocks.size(); ++k) {
    const std::string p = "text.block" + std::to_string(k);
    add(ParamGroup::kText, p + ".out.w", m.text.blocks[k].out.w);
    add(ParamGroup::kText, p + ".out.b", m.text.blocks[k].out.b);
    add(ParamGroup::kText, p + ".norm.gain", m.text.blocks[k].norm.gain);
    add(ParamGroup::kText, p + ".norm.bias", m.text.blocks[k].norm.bias);
  }
  add(ParamGroup::kFusion, "fusion.w", m.fusion.w);
  add(ParamGroup::kFusion, "fusion.u", m.fusion.u);
  add(ParamGroup::kFusion, "fusion.b", m.fusion.b);
  add(ParamGroup::kFusion, "fusion.w2", m.fusion.w2);
  add(ParamGroup::kFusion, "fusion.u2", m.fusion.u2);
  add(ParamGroup::kFusion, "fusion.b2", m.fusion.b2);
  add(ParamGroup::kFusion, "fusion.proj", m.fusion.proj);
  add(ParamGroup::kHead, "head.attn.out.w", m.head.attn.out.w);
  add(ParamGroup::kHead, "head.attn.out.b", m.head.attn.out.b);
  add(ParamGroup::kHead, "head.attn.norm.gain", m.head.attn.norm.gain);
  add(ParamGroup::kHead, "head.attn.norm.bias", m.head.attn.norm.bias);
  add(ParamGroup::kHead, "head.proj.w", m.head.proj.w);
  add(ParamGroup::kHead, "head.proj.b", m.head.proj.b);
  return refs;
}

namespace detail {

template <class S>
LinearParams<S> zero_linear(int fan_in, int fan_out) {
  return LinearParams<S>{Matrix<S>(fan_in, fan_out), Matrix<S>(1, fan_out)};
}

template <class S>
LayerNormParams<S> unit_norm(int d, S gain_value) {
  LayerNormParams<S> n{Matrix<S>(1, d, gain_value), Matrix<S>(1, d)};
  return n;
}

}  // namespace detail

// All-zero parameter container with the given shapes; also the gradient
// accumulator type.
template <class S>
ModelParams<S> make_zero_params(const ModelDims& dims, const GateVariant& variant) {
  dims.validate();
  ModelParams<S> m;
  m.dims = dims;
  m.variant = variant;
  m.audio.input = detail::zero_linear<S>(dims.d_in, dims.d);
  m.audio.blocks.resize(static_cast<std::size_t>(dims.audio_blocks));
  for (auto& block : m.audio.blocks) {
    block.lin = detail::zero_linear<S>(dims.d, dims.d);
    block.norm = detail::unit_norm<S>(dims.d, S(0));
  }
  m.text.embeddings = Matrix<S>(dims.num_phones, dims.d);
  m.text.positions = Matrix<S>(dims.n_max, dims.d);
  m.text.blocks.resize(static_cast<std::size_t>(dims.text_blocks));
  for (auto& block : m.text.blocks) {
    block.out = detail::zero_linear<S>(dims.d, dims.d);
    block.norm = detail::unit_norm<S>(dims.d, S(0));
  }
  m.fusion = GateParams<S>::zeros(dims.d);
  m.head.attn.out = detail::zero_linear<S>(dims.d, dims.d);
  m.head.attn.norm = detail::unit_norm<S>(dims.d, S(0));
  m.head.proj = detail::zero_linear<S>(dims.d, dims.num_phones + 1);
  return m;
}

// Deterministic init: weights and embedding tables are uniform in
// +-1/sqrt(fan_in), drawn row-major from a single seeded stream in the fixed
// order below; biases start at zero (including the gate biases) and layer
// norm gains at one.
template <class S>
ModelParams<S> init_model_params(std::uint64_t seed, const ModelDims& dims,
                                 const GateVariant& variant) {
  ModelParams<S> m = make_zero_params<S>(dims, variant);
  Rng rng(seed);
  auto fill_uniform = [&rng](Matrix<S>& mat, int fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (S& v : mat.data()) v = static_cast<S>(rng.uniform(-scale, scale));
  };
  fill_uniform(m.audio.input.w, dims.d_in);
  for (auto& block : m.audio.blocks) {
    fill_uniform(block.lin.w, dims.d);
    block.norm.gain.fill(S(1));
  }
  fill_uniform(m.text.embeddings, dims.d);
  fill_uniform(m.text.positions, dims.d);
  for (auto& block : m.text.blocks) {
    fill_uniform(block.out.w, dims.d);
    block.norm.gain.fill(S(1));
  }
  fill_uniform(m.fusion.w, dims.d);
  fill_uniform(m.fusion.u, dims.d);
  fill_uniform(m.fusion.w2, dims.d);
  fill_uniform(m.fusion.u2, dims.d);
  fill_uniform(m.fusion.proj, 2 * dims.d);
  fill_uniform(m.head.attn.out.w, dims.d);
  m.head.attn.norm.gain.fill(S(1));
  fill_uniform(m.head.proj.w, dims.d);
  return m;
}

namespace detail {

// ---------- primitive layers with caches ----------

template <class S>
S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x * S(0.7071067811865476)));
}

template <class S>
S gelu_grad(S x) {
  const S cdf = S(0.5) * (S(1) + std::erf(x * S(0.7071067811865476)));
  const S pdf = std::exp(S(-0.5) * x * x) * S(0.3989422804014327);
  return cdf + x * pdf;
}

template <class S>
struct LayerNormTrace {
  Matrix<S> xhat;             // normalized rows
  std::vector<S> inv_std;     // per row
};

template <class S>
Matrix<S> layer_norm_forward(const Matrix<S>& x, const LayerNormParams<S>& p,
                             LayerNormTrace<S>* trace) {
  const int rows = x.rows();
  const int d = x.cols();
  Matrix<S> out(rows, d);
  trace->xhat = Matrix<S>(rows, d);
  trace->inv_std.assign(static_cast<std::size_t>(rows), S(0));
  for (int i = 0; i < rows; ++i) {
    const S* in = x.row(i);
    S mean = S(0);
    for (int j = 0; j < d; ++j) mean += in[j];
    mean /= static_cast<S>(d);
    S var = S(0);
    for (int j = 0; j < d; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<S>(d);
    const S inv = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEpsilon));
    trace->inv_std[static_cast<std::size_t>(i)] = inv;
    for (int j = 0; j < d; ++j) {
      const S xh = (in[j] - mean) * inv;
      trace->xhat(i, j) = xh;
      out(i, j) = p.gain(0, j) * xh + p.bias(0, j);
    }
  }
  return out;
}

template <class S>
Matrix<S> layer_norm_backward(const Matrix<S>& d_out, const LayerNormParams<S>& p,
                              const LayerNormTrace<S>& trace, LayerNormParams<S>& d_p) {
  const int rows = d_out.rows();
  const int d = d_out.cols();
  Matrix<S> d_in(rows, d);
  for (int i = 0; i < rows; ++i) {
    S mean_dxhat = S(0);
    S mean_dxhat_xhat = S(0);
    for (int j = 0; j < d; ++j) {
      const S dxh = d_out(i, j) * p.gain(0, j);
      mean_dxhat += dxh;
      mean_dxhat_xhat += dxh * trace.xhat(i, j);
      d_p.gain(0, j) += d_out(i, j) * trace.xhat(i, j);
      d_p.bias(0, j) += d_out(i, j);
    }
    mean_dxhat /= static_cast<S>(d);
    mean_dxhat_xhat /= static_cast<S>(d);
    const S inv = trace.inv_std[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) {
      const S dxh = d_out(i, j) * p.gain(0, j);
      d_in(i, j) = inv * (dxh - mean_dxhat - trace.xhat(i, j) * mean_dxhat_xhat);
    }
  }
  return d_in;
}

template <class S>
Matrix<S> linear_forward(const Matrix<S>& x, const LinearParams<S>& p) {
  if (x.cols() != p.w.rows()) throw DimensionError("linear: input width mismatch");
  Matrix<S> out(x.rows(), p.w.cols());
  matmul_acc(out, x, p.w);
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) out(i, j) += p.b(0, j);
  }
  return out;
}

// d_x returned; d_p accumulated.
template <class S>
Matrix<S> linear_backward(const Matrix<S>& x, const LinearParams<S>& p,
                          const Matrix<S>& d_out, LinearParams<S>& d_p) {
  matmul_tn_acc(d_p.w, x, d_out);
  col_sums_acc(d_p.b, d_out);
  Matrix<S> d_x(x.rows(), x.cols());
  matmul_nt_acc(d_x, d_out, p.w);
  return d_x;
}

// Single-head self-attention block:
//   scores = X X^T / sqrt(d); A = softmax; C = A X;
//   out = LayerNorm(X + C W_o + b_o)
template <class S>
struct SelfAttnTrace {
  Matrix<S> input;
  Matrix<S> alpha;
  Matrix<S> context;
  LayerNormTrace<S> norm;
};

template <class S>
Matrix<S> self_attn_forward(const Matrix<S>& x, const SelfAttnBlockParams<S>& p,
                            SelfAttnTrace<S>* trace) {
  const int n = x.rows();
  const int d = x.cols();
  trace->input = x;
  Matrix<S> scores(n, n);
  matmul_nt_acc(scores, x, x, S(1) / std::sqrt(static_cast<S>(d)));
  trace->alpha = softmax_rows(scores);
  trace->context = Matrix<S>(n, d);
  matmul_acc(trace->context, trace->alpha, x);
  Matrix<S> pre = linear_forward(trace->context, p.out);
  axpy(pre, S(1), x);  // residual
  return layer_norm_forward(pre, p.norm, &trace->norm);
}

template <class S>
Matrix<S> self_attn_backward(const SelfAttnBlockParams<S>& p, const SelfAttnTrace<S>& trace,
                             const Matrix<S>& d_out, SelfAttnBlockParams<S>& d_p) {
  const Matrix<S>& x = trace.input;
  const int n = x.rows();
  const int d = x.cols();

  Matrix<S> d_pre = layer_norm_backward(d_out, p.norm, trace.norm, d_p.norm);
  Matrix<S> d_x = d_pre;  // residual branch
  Matrix<S> d_context = linear_backward(trace.context, p.out, d_pre, d_p.out);

  // context = alpha * x
  Matrix<S> d_alpha(n, n);
  matmul_nt_acc(d_alpha, d_context, x);
  matmul_tn_acc(d_x, trace.alpha, d_context);

  // softmax rows
  Matrix<S> d_scores(n, n);
  for (int i = 0; i < n; ++i) {
    S dot = S(0);
    for (int j = 0; j < n; ++j) dot += d_alpha(i, j) * trace.alpha(i, j);
    for (int j = 0; j < n; ++j) {
      d_scores(i, j) = trace.alpha(i, j) * (d_alpha(i, j) - dot);
    }
  }

  // scores = x x^T / sqrt(d): d_x += (d_scores + d_scores^T) x / sqrt(d)
  const S scale = S(1) / std::sqrt(static_cast<S>(d));
  matmul_acc(d_x, d_scores, x, scale);
  matmul_tn_acc(d_x, d_scores, x, scale);
  return d_x;
}

template <class S>
struct ResidualBlockTrace {
  Matrix<S> input;
  Matrix<S> pre_act;
  LayerNormTrace<S> norm;
};

template <class S>
Matrix<S> residual_block_forward(const Matrix<S>& x, const ResidualBlockParams<S>& p,
                                 ResidualBlockTrace<S>* trace) {
  trace->input = x;
  trace->pre_act = linear_forward(x, p.lin);
  Matrix<S> pre_norm(x.rows(), x.cols());
  for (std::size_t i = 0; i < pre_norm.size(); ++i) {
    pre_norm.data()[i] = x.data()[i] + gelu(trace->pre_act.data()[i]);
  }
  return layer_norm_forward(pre_norm, p.norm, &trace->norm);
}

template <class S>
Matrix<S> residual_block_backward(const ResidualBlockParams<S>& p,
                                  const ResidualBlockTrace<S>& trace, const Matrix<S>& d_out,
                                  ResidualBlockParams<S>& d_p) {
  Matrix<S> d_pre_norm = layer_norm_backward(d_out, p.norm, trace.norm, d_p.norm);
  Matrix<S> d_act(d_pre_norm.rows(), d_pre_norm.cols());
  for (std::size_t i = 0; i < d_act.size(); ++i) {
    d_act.data()[i] = d_pre_norm.data()[i] * gelu_grad(trace.pre_act.data()[i]);
  }
  Matrix<S> d_x = linear_backward(trace.input, p.lin, d_act, d_p.lin);
  axpy(d_x, S(1), d_pre_norm);  // residual branch
  return d_x;
}

}  // namespace detail

// ---------- encoders ----------

template <class S>
struct AudioTrace {
  Matrix<S> frames;  // raw input, kept for the input projection gradient
  Matrix<S> projected;
  std::vector<detail::ResidualBlockTrace<S>> blocks;
  Matrix<S> output;
};

template <class S>
Matrix<S> encode_audio(const Matrix<S>& frames, const AudioEncoderParams<S>& params,
                       AudioTrace<S>* trace = nullptr) {
  if (frames.rows() < 1) throw InvalidArgument("encode_audio: need at least one frame");
  if (!all_finite(frames)) throw InvalidArgument("encode_audio: non-finite input");
  AudioTrace<S> local;
  AudioTrace<S>& tr = trace != nullptr ? *trace : local;
  tr.frames = frames;
  tr.projected = detail::linear_forward(frames, params.input);
  tr.blocks.resize(params.blocks.size());
  Matrix<S> x = tr.projected;
  for (std::size_t k = 0; k < params.blocks.size(); ++k) {
    x = detail::residual_block_forward(x, params.blocks[k], &tr.blocks[k]);
  }
  tr.output = x;
  return x;
}

template <class S>
struct TextTrace {
  std::vector<int> ids;
  Matrix<S> embedded;
  std::vector<detail::SelfAttnTrace<S>> blocks;
  Matrix<S> output;
};

template <class S>
Matrix<S> encode_text(const PhoneSeq& phones, const TextEncoderParams<S>& params,
                      TextTrace<S>* trace = nullptr) {
  const int n = phones.size();
  if (n < 1) throw InvalidArgument("encode_text: empty phone sequence");
  if (n > params.positions.rows()) {
    throw InvalidArgument("encode_text: sequence length " + std::to_string(n) +
                          " exceeds n_max " + std::to_string(params.positions.rows()));
  }
  check_phone_ids(phones, params.embeddings.rows(), "encode_text");

  TextTrace<S> local;
  TextTrace<S>& tr = trace != nullptr ? *trace : local;
  tr.ids = phones.ids;
  const int d = params.embeddings.cols();
  tr.embedded = Matrix<S>(n, d);
  for (int i = 0; i < n; ++i) {
    const int row = phones.ids[static_cast<std::size_t>(i)] - 1;
    for (int j = 0; j < d; ++j) {
      tr.embedded(i, j) = params.embeddings(row, j) + params.positions(i, j);
    }
  }
  tr.blocks.resize(params.blocks.size());
  Matrix<S> x = tr.embedded;
  for (std::size_t k = 0; k < params.blocks.size(); ++k) {
    x = detail::self_attn_forward(x, params.blocks[k], &tr.blocks[k]);
  }
  tr.output = x;
  return x;
}

// ---------- full model ----------

template <class S>
struct ForwardTrace {
  AudioTrace<S> audio;
  TextTrace<S> text;
  FusionResult<S> fusion;
  detail::SelfAttnTrace<S> head_attn;
  Matrix<S> head_features;  // output of the head attention block
  Matrix<S> lattice;
};

template <class S>
struct ForwardResult {
  Matrix<S> lattice;  // T x (V+1), rows normalized in log space
  ForwardTrace<S> trace;
};

template <class S>
ForwardResult<S> forward(const ModelParams<S>& model, const Matrix<S>& frames,
                         const PhoneSeq& canonical, const GateClamp& clamp = {}) {
  if (frames.cols() != model.dims.d_in) {
    throw DimensionError("forward: frame dim " + std::to_string(frames.cols()) +
                         " does not match model d_in " + std::to_string(model.dims.d_in));
  }
  ForwardResult<S> out;
  ForwardTrace<S>& tr = out.trace;
  const Matrix<S> audio_feat = encode_audio(frames, model.audio, &tr.audio);
  const Matrix<S> text_feat = encode_text(canonical, model.text, &tr.text);
  tr.fusion = fuse(audio_feat, text_feat, model.fusion, model.variant, clamp);
  tr.head_features = detail::self_attn_forward(tr.fusion.fused, model.head.attn, &tr.head_attn);
  const Matrix<S> logits = detail::linear_forward(tr.head_features, model.head.proj);
  tr.lattice = log_softmax_rows(logits);
  out.lattice = tr.lattice;
  return out;
}

// Audio branch alone through the shared head; the reference point for
// gate-ablation checks.
template <class S>
Matrix<S> forward_audio_only(const ModelParams<S>& model, const Matrix<S>& frames) {
  if (frames.cols() != model.dims.d_in) {
    throw DimensionError("forward_audio_only: frame dim mismatch");
  }
  const Matrix<S> audio_feat = encode_audio(frames, model.audio);
  detail::SelfAttnTrace<S> attn_trace;
  const Matrix<S> head_feat = detail::self_attn_forward(audio_feat, model.head.attn, &attn_trace);
  return log_softmax_rows(detail::linear_forward(head_feat, model.head.proj));
}

struct BackwardOptions {
  bool freeze_audio = false;
};

// Gradients for every parameter given d(loss)/d(lattice). The trace must come
// from forward() on the same model and inputs.
template <class S>
ModelParams<S> backward(const ModelParams<S>& model, const ForwardTrace<S>& trace,
                        const Matrix<S>& d_lattice, const BackwardOptions& options = {}) {
  ModelParams<S> grads = make_zero_params<S>(model.dims, model.variant);

  // log-softmax: d_logits = d_lat - softmax * rowsum(d_lat)
  Matrix<S> d_logits(d_lattice.rows(), d_lattice.cols());
  for (int t = 0; t < d_lattice.rows(); ++t) {
    S row_sum = S(0);
    for (int k = 0; k < d_lattice.cols(); ++k) row_sum += d_lattice(t, k);
    for (int k = 0; k < d_lattice.cols(); ++k) {
      d_logits(t, k) = d_lattice(t, k) - std::exp(trace.lattice(t, k)) * row_sum;
    }
  }

  Matrix<S> d_head_feat =
      detail::linear_backward(trace.head_features, model.head.proj, d_logits, grads.head.proj);
  Matrix<S> d_fused =
      detail::self_attn_backward(model.head.attn, trace.head_attn, d_head_feat, grads.head.attn);

  FusionGrads<S> fusion_grads = fuse_grad(trace.audio.output, trace.text.output, model.fusion,
                                          model.variant, trace.fusion, d_fused);
  grads.fusion = std::move(fusion_grads.d_params);

  // text encoder
  Matrix<S> d_text = std::move(fusion_grads.d_text);
  for (std::size_t k = model.text.blocks.size(); k-- > 0;) {
    d_text = detail::self_attn_backward(model.text.blocks[k], trace.text.blocks[k], d_text,
                                        grads.text.blocks[k]);
  }
  for (int i = 0; i < d_text.rows(); ++i) {
    const int row = trace.text.ids[static_cast<std::size_t>(i)] - 1;
    for (int j = 0; j < d_text.cols(); ++j) {
      grads.text.embeddings(row, j) += d_text(i, j);
      grads.text.positions(i, j) += d_text(i, j);
    }
  }

  // audio encoder
  Matrix<S> d_audio = std::move(fusion_grads.d_audio);
  for (std::size_t k = model.audio.blocks.size(); k-- > 0;) {
    d_audio = detail::residual_block_backward(model.audio.blocks[k], trace.audio.blocks[k],
                                              d_audio, grads.audio.blocks[k]);
  }
  detail::linear_backward(trace.audio.frames, model.audio.input, d_audio, grads.audio.input);

  if (options.freeze_audio) {
    for (ParamRef<S>& ref : param_refs(grads)) {
      if (ref.group == ParamGroup::kAudio) ref.matrix->fill(S(0));
    }
  }
  return grads;
}

}  // namespace mdd
