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

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mdd/matrix.hpp"

// Text-audio fusion: dot-product attention from audio frames onto text
// positions followed by one of the gate variants.
//
//   score(t, n) = dot(audio_t, text_n)            (optionally scaled 1/sqrt d)
//   alpha       = activation(score)               (softmax over n, or
//                                                  elementwise sigmoid/tanh)
//   context_t   = sum_n alpha(t, n) * text_n
//   gate_t      = sigmoid(audio_t W + context_t U + b)
//
//   TextGate        fused_t = audio_t + gate_t . context_t
//   AudioGate       fused_t = gate_t . audio_t + context_t
//   DoubleGate      fused_t = gate2_t . audio_t + gate_t . context_t
//   BaselineConcat  fused_t = [audio_t ; context_t] P
//   BaselineAdd     fused_t = audio_t + context_t
//
// where . is the elementwise product and gate2 uses an independent (W,U,b)
// triple.

namespace mdd {

enum class GateKind {
  kBaselineConcat,
  kBaselineAdd,
  kDoubleGate,
  kTextGate,
  kAudioGate,
};

enum class AttnActivation { kSigmoid, kSoftmax, kTanh };

struct GateVariant {
  GateKind kind = GateKind::kTextGate;
  AttnActivation activation = AttnActivation::kSigmoid;
  bool scale_scores = false;  // multiply scores by 1/sqrt(d) when set
};

inline bool gate_on_text_branch(GateKind kind) {
  return kind == GateKind::kTextGate || kind == GateKind::kDoubleGate;
}
inline bool gate_on_audio_branch(GateKind kind) {
  return kind == GateKind::kAudioGate || kind == GateKind::kDoubleGate;
}

// Trainable fusion parameters. All tensors are allocated regardless of the
// active variant so a single seed yields identical shared weights across
// variant sweeps; each variant reads only what it needs.
template <class S>
struct GateParams {
  Matrix<S> w;   // d x d, audio term of the text-branch gate
  Matrix<S> u;   // d x d, context term of the text-branch gate
  Matrix<S> b;   // 1 x d
  Matrix<S> w2;  // second triple, audio-branch gate of DoubleGate
  Matrix<S> u2;
  Matrix<S> b2;
  Matrix<S> proj;  // 2d x d concat projection of BaselineConcat

  static GateParams zeros(int d) {
    GateParams p;
    p.w = Matrix<S>(d, d);
    p.u = Matrix<S>(d, d);
    p.b = Matrix<S>(1, d);
    p.w2 = Matrix<S>(d, d);
    p.u2 = Matrix<S>(d, d);
    p.b2 = Matrix<S>(1, d);
    p.proj = Matrix<S>(2 * d, d);
    return p;
  }
};

// Diagnostic overrides pinning a gate to a constant. Used by tests and
// ablations (gate == 0 reduces TextGate to the audio-only path, gate == 1
// reduces it to BaselineAdd).
struct GateClamp {
  std::optional<double> text_gate;
  std::optional<double> audio_gate;
};

template <class S>
struct AttentionResult {
  Matrix<S> scores;   // T x N
  Matrix<S> alpha;    // T x N
  Matrix<S> context;  // T x d
};

template <class S>
AttentionResult<S> attention_context(const Matrix<S>& audio, const Matrix<S>& text,
                                     AttnActivation activation, bool scale_scores = false) {
  if (text.rows() < 1) throw InvalidArgument("attention_context: need at least one text position");
  if (audio.cols() != text.cols()) {
    throw DimensionError("attention_context: audio and text feature dims differ");
  }
  AttentionResult<S> out;
  out.scores = Matrix<S>(audio.rows(), text.rows());
  const S scale = scale_scores ? S(1) / std::sqrt(static_cast<S>(audio.cols())) : S(1);
  matmul_nt_acc(out.scores, audio, text, scale);

  out.alpha = Matrix<S>(audio.rows(), text.rows());
  switch (activation) {
    case AttnActivation::kSigmoid:
      for (std::size_t i = 0; i < out.scores.size(); ++i) {
        out.alpha.data()[i] = S(1) / (S(1) + std::exp(-out.scores.data()[i]));
      }
      break;
    case AttnActivation::kTanh:
      for (std::size_t i = 0; i < out.scores.size(); ++i) {
        out.alpha.data()[i] = std::tanh(out.scores.data()[i]);
      }
      break;
    case AttnActivation::kSoftmax:
      out.alpha = softmax_rows(out.scores);
      break;
  }

  out.context = Matrix<S>(audio.rows(), audio.cols());
  matmul_acc(out.context, out.alpha, text);
  return out;
}

template <class S>
struct FusionResult {
  Matrix<S> fused;  // T x d
  AttentionResult<S> attn;
  Matrix<S> text_gate;   // T x d when the variant gates the text branch
  Matrix<S> audio_gate;  // T x d when the variant gates the audio branch
  bool text_gate_clamped = false;
  bool audio_gate_clamped = false;
};

namespace detail {

template <class S>
Matrix<S> gate_forward(const Matrix<S>& audio, const Matrix<S>& context,
                       const Matrix<S>& w, const Matrix<S>& u, const Matrix<S>& b,
                       const std::optional<double>& clamp, bool* clamped) {
  Matrix<S> gate(audio.rows(), audio.cols());
  if (clamp.has_value()) {
    gate.fill(static_cast<S>(*clamp));
    *clamped = true;
    return gate;
  }
  *clamped = false;
  matmul_acc(gate, audio, w);
  matmul_acc(gate, context, u);
  for (int t = 0; t < gate.rows(); ++t) {
    S* row = gate.row(t);
    for (int j = 0; j < gate.cols(); ++j) {
      row[j] = S(1) / (S(1) + std::exp(-(row[j] + b(0, j))));
    }
  }
  return gate;
}

}  // namespace detail

template <class S>
FusionResult<S> fuse(const Matrix<S>& audio, const Matrix<S>& text,
                     const GateParams<S>& params, const GateVariant& variant,
                     const GateClamp& clamp = {}) {
  const int frames = audio.rows();
  const int d = audio.cols();
  FusionResult<S> out;
  out.attn = attention_context(audio, text, variant.activation, variant.scale_scores);
  const Matrix<S>& context = out.attn.context;
  out.fused = Matrix<S>(frames, d);

  switch (variant.kind) {
    case GateKind::kTextGate: {
      out.text_gate = detail::gate_forward(audio, context, params.w, params.u, params.b,
                                           clamp.text_gate, &out.text_gate_clamped);
      for (int t = 0; t < frames; ++t) {
        for (int j = 0; j < d; ++j) {
          out.fused(t, j) = audio(t, j) + out.text_gate(t, j) * context(t, j);
        }
      }
      break;
    }
    case GateKind::kAudioGate: {
      out.audio_gate = detail::gate_forward(audio, context, params.w, params.u, params.b,
                                            clamp.audio_gate, &out.audio_gate_clamped);
      for (int t = 0; t < frames; ++t) {
        for (int j = 0; j < d; ++j) {
          out.fused(t, j) = out.audio_gate(t, j) * audio(t, j) + context(t, j);
        }
      }
      break;
    }
    case GateKind::kDoubleGate: {
      out.text_gate = detail::gate_forward(audio, context, params.w, params.u, params.b,
                                           clamp.text_gate, &out.text_gate_clamped);
      out.audio_gate = detail::gate_forward(audio, context, params.w2, params.u2, params.b2,
                                            clamp.audio_gate, &out.audio_gate_clamped);
      for (int t = 0; t < frames; ++t) {
        for (int j = 0; j < d; ++j) {
          out.fused(t, j) = out.audio_gate(t, j) * audio(t, j) +
                            out.text_gate(t, j) * context(t, j);
        }
      }
      break;
    }
    case GateKind::kBaselineConcat: {
      if (params.proj.rows() != 2 * d || params.proj.cols() != d) {
        throw DimensionError("fuse: concat projection must be 2d x d");
      }
      for (int t = 0; t < frames; ++t) {
        S* dst = out.fused.row(t);
        for (int j = 0; j < d; ++j) {
          S acc = S(0);
          for (int k = 0; k < d; ++k) {
            acc += audio(t, k) * params.proj(k, j);
            acc += context(t, k) * params.proj(d + k, j);
          }
          dst[j] = acc;
        }
      }
      break;
    }
    case GateKind::kBaselineAdd: {
      for (int t = 0; t < frames; ++t) {
        for (int j = 0; j < d; ++j) out.fused(t, j) = audio(t, j) + context(t, j);
      }
      break;
    }
  }
  return out;
}

template <class S>
struct FusionGrads {
  Matrix<S> d_audio;
  Matrix<S> d_text;
  GateParams<S> d_params;
};

// Backward pass matching fuse(). `cache` must be the FusionResult produced by
// the forward call on the same inputs.
template <class S>
FusionGrads<S> fuse_grad(const Matrix<S>& audio, const Matrix<S>& text,
                         const GateParams<S>& params, const GateVariant& variant,
                         const FusionResult<S>& cache, const Matrix<S>& upstream) {
  detail::check_same_shape(upstream, cache.fused, "fuse_grad upstream");
  const int frames = audio.rows();
  const int d = audio.cols();
  const Matrix<S>& context = cache.attn.context;

  FusionGrads<S> grads;
  grads.d_audio = Matrix<S>(frames, d);
  grads.d_text = Matrix<S>(text.rows(), d);
  grads.d_params = GateParams<S>::zeros(d);

  Matrix<S> d_context(frames, d);

  auto backprop_gate = [&](const Matrix<S>& gate, bool clamped, const Matrix<S>& d_gate,
                           const Matrix<S>& w, const Matrix<S>& u, Matrix<S>& dw,
                           Matrix<S>& du, Matrix<S>& db) {
    if (clamped) return;  // constant gate: nothing flows through it
    Matrix<S> d_pre(frames, d);
    for (int t = 0; t < frames; ++t) {
      for (int j = 0; j < d; ++j) {
        const S g = gate(t, j);
        d_pre(t, j) = d_gate(t, j) * g * (S(1) - g);
      }
    }
    matmul_tn_acc(dw, audio, d_pre);
    matmul_tn_acc(du, context, d_pre);
    col_sums_acc(db, d_pre);
    matmul_nt_acc(grads.d_audio, d_pre, w);
    matmul_nt_acc(d_context, d_pre, u);
  };

  switch (variant.kind) {
    case GateKind::kTextGate: {
      Matrix<S> d_gate(frames, d);
      for (int t = 0; t < frames; ++t) {
        for (int j = 0; j < d; ++j) {
          grads.d_audio(t, j) += upstream(t, j);
          d_gate(t, j) = upstream(t, j) * context(t, j);
          d_context(t, j) += upstream(t, j) * cache.text_gate(t, j);
        }
      }
      backprop_gate(cache.text_gate, cache.text_gate_clamped, d_gate, params.w, params.u,
                    grads.d_params.w, grads.d_params.u, grads.d_params.b);
      break;
    }
    case GateKind::kAudioGate: {
      Matrix<S> d_gate(frames, d);
      for (int t = 0; t < frames; ++t) {
        for (int j = 0; j < d; ++j) {
          grads.d_audio(t, j) += upstream(t, j) * cache.audio_gate(t, j);
          d_gate(t, j) = upstream(t, j) * audio(t, j);
          d_context(t, j) += upstream(t, j);
        }
      }
      backprop_gate(cache.audio_gate, cache.audio_gate_clamped, d_gate, params.w, params.u,
                    grads.d_params.w, grads.d_params.u, grads.d_params.b);
      break;
    }
    case GateKind::kDoubleGate: {
      Matrix<S> d_text_gate(frames, d);
      Matrix<S> d_audio_gate(frames, d);
      for (int t = 0; t < frames; ++t) {
        for (int j = 0; j < d; ++j) {
          grads.d_audio(t, j) += upstream(t, j) * cache.audio_gate(t, j);
          d_audio_gate(t, j) = upstream(t, j) * audio(t, j);
          d_text_gate(t, j) = upstream(t, j) * context(t, j);
          d_context(t, j) += upstream(t, j) * cache.text_gate(t, j);
        }
      }
      backprop_gate(cache.text_gate, cache.text_gate_clamped, d_text_gate, params.w,
                    params.u, grads.d_params.w, grads.d_params.u, grads.d_params.b);
      backprop_gate(cache.audio_gate, cache.audio_gate_clamped, d_audio_gate, params.w2,
                    params.u2, grads.d_params.w2, grads.d_params.u2, grads.d_params.b2);
      break;
    }
    case GateKind::kBaselineConcat: {
      for (int t = 0; t < frames; ++t) {
        for (int j = 0; j < d; ++j) {
          const S up = upstream(t, j);
          for (int k = 0; k < d; ++k) {
            grads.d_audio(t, k) += up * params.proj(k, j);
            d_context(t, k) += up * params.proj(d + k, j);
            grads.d_params.proj(k, j) += up * audio(t, k);
            grads.d_params.proj(d + k, j) += up * context(t, k);
          }
        }
      }
      break;
    }
    case GateKind::kBaselineAdd: {
      axpy(grads.d_audio, S(1), upstream);
      axpy(d_context, S(1), upstream);
      break;
    }
  }

  // context = alpha * text
  Matrix<S> d_alpha(frames, text.rows());
  matmul_nt_acc(d_alpha, d_context, text);
  matmul_tn_acc(grads.d_text, cache.attn.alpha, d_context);

  // alpha = activation(scores)
  Matrix<S> d_scores(frames, text.rows());
  const Matrix<S>& alpha = cache.attn.alpha;
  switch (variant.activation) {
    case AttnActivation::kSigmoid:
      for (std::size_t i = 0; i < d_scores.size(); ++i) {
        const S a = alpha.data()[i];
        d_scores.data()[i] = d_alpha.data()[i] * a * (S(1) - a);
      }
      break;
    case AttnActivation::kTanh:
      for (std::size_t i = 0; i < d_scores.size(); ++i) {
        const S a = alpha.data()[i];
        d_scores.data()[i] = d_alpha.data()[i] * (S(1) - a * a);
      }
      break;
    case AttnActivation::kSoftmax:
      for (int t = 0; t < frames; ++t) {
        S dot = S(0);
        for (int n = 0; n < text.rows(); ++n) dot += d_alpha(t, n) * alpha(t, n);
        for (int n = 0; n < text.rows(); ++n) {
          d_scores(t, n) = alpha(t, n) * (d_alpha(t, n) - dot);
        }
      }
      break;
  }

  // scores = scale * audio * text^T
  const S scale = variant.scale_scores ? S(1) / std::sqrt(static_cast<S>(d)) : S(1);
  matmul_acc(grads.d_audio, d_scores, text, scale);
  matmul_tn_acc(grads.d_text, d_scores, audio, scale);

  return grads;
}

// Table-style variant names. "Baseline" is the concat fusion; the TextGate
// activation spellings follow the sigma/phi naming of the variant sweep.
inline std::string variant_name(const GateVariant& v) {
  switch (v.kind) {
    case GateKind::kBaselineConcat: return "Baseline";
    case GateKind::kBaselineAdd: return "BaselineAdd";
    case GateKind::kDoubleGate: return "DoubleGate";
    case GateKind::kAudioGate: return "AudioGate";
    case GateKind::kTextGate:
      switch (v.activation) {
        case AttnActivation::kSigmoid: return "TextGate";
        case AttnActivation::kSoftmax: return "TextGateSigma";
        case AttnActivation::kTanh: return "TextGatePhi";
      }
  }
  return "?";
}

// Parses a row label like "TextGateSigma" or "DoubleGateContrast". The
// "Contrast" suffix enables the contrastive term and is reported separately.
inline GateVariant parse_variant(const std::string& label, bool* contrast_enabled) {
  std::string name = label;
  bool contrast = false;
  const std::string suffix = "Contrast";
  if (name.size() > suffix.size() &&
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
    contrast = true;
    name = name.substr(0, name.size() - suffix.size());
  }
  if (contrast_enabled != nullptr) *contrast_enabled = contrast;

  GateVariant v;
  if (name == "Baseline" || name == "BaselineConcat") {
    v.kind = GateKind::kBaselineConcat;
    v.activation = AttnActivation::kSoftmax;
  } else if (name == "BaselineAdd") {
    v.kind = GateKind::kBaselineAdd;
    v.activation = AttnActivation::kSoftmax;
  } else if (name == "DoubleGate") {
    v.kind = GateKind::kDoubleGate;
    v.activation = AttnActivation::kSigmoid;
  } else if (name == "TextGate") {
    v.kind = GateKind::kTextGate;
    v.activation = AttnActivation::kSigmoid;
  } else if (name == "TextGateSigma") {
    v.kind = GateKind::kTextGate;
    v.activation = AttnActivation::kSoftmax;
  } else if (name == "TextGatePhi") {
    v.kind = GateKind::kTextGate;
    v.activation = AttnActivation::kTanh;
  } else if (name == "AudioGate") {
    v.kind = GateKind::kAudioGate;
    v.activation = AttnActivation::kSigmoid;
  } else {
    throw InvalidArgument("unknown fusion variant '" + label + "'");
  }
  return v;
}

}  // namespace mdd
