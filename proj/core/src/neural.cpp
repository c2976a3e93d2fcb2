#include "ecoevo/neural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ecoevo/errors.hpp"

namespace ecoevo {

using namespace arch;

NetworkParams::NetworkParams(std::vector<float> weights)
    : weights_(std::move(weights)) {
  if (weights_.size() != kSize) {
    throw std::invalid_argument("NetworkParams: expected " +
                                std::to_string(kSize) + " weights, got " +
                                std::to_string(weights_.size()));
  }
}

NetworkParams NetworkParams::random(RngStream& rng, double stddev) {
  NetworkParams params;
  for (float& w : params.weights_) {
    w = static_cast<float>(rng.normal() * stddev);
  }
  return params;
}

std::span<const float> NetworkParams::conv1() const noexcept {
  return std::span<const float>(weights_).subspan(kConv1Offset, kConv1Params);
}
std::span<const float> NetworkParams::conv2() const noexcept {
  return std::span<const float>(weights_).subspan(kConv2Offset, kConv2Params);
}
std::span<const float> NetworkParams::recurrent() const noexcept {
  return std::span<const float>(weights_).subspan(kRecurrentOffset,
                                                  kRecurrentParams);
}
std::span<const float> NetworkParams::dense_hidden() const noexcept {
  return std::span<const float>(weights_).subspan(kDenseHiddenOffset,
                                                  kDenseHiddenParams);
}
std::span<const float> NetworkParams::dense_out() const noexcept {
  return std::span<const float>(weights_).subspan(kDenseOutOffset,
                                                  kDenseOutParams);
}

bool NetworkParams::all_finite() const noexcept {
  return std::all_of(weights_.begin(), weights_.end(),
                     [](float w) { return std::isfinite(w); });
}

namespace {

// 3x3 stride-2 convolution with one ring of zero padding (SAME for these
// sizes), HWIO kernel followed by OUT biases. SkipZeros elides all-zero pixels,
// which dominate raw observations.
template <int In, int CIn, int COut, bool SkipZeros = false>
void conv3x3_s2(const float* input, const float* kernel, float* output) {
  constexpr int kPadded = In + 2;
  constexpr int kOut = (In + 1) / 2;
  static_assert((kOut - 1) * 2 + 3 - In == 2, "padding must be 1 on each side");

  std::array<float, kPadded * kPadded * CIn> padded{};
  for (int r = 0; r < In; ++r) {
    std::copy_n(input + r * In * CIn, In * CIn,
                padded.data() + ((r + 1) * kPadded + 1) * CIn);
  }
  const float* bias = kernel + 9 * CIn * COut;
  for (int oy = 0; oy < kOut; ++oy) {
    for (int ox = 0; ox < kOut; ++ox) {
      float acc[COut];
      for (int o = 0; o < COut; ++o) acc[o] = bias[o];
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const float* px =
              padded.data() + ((2 * oy + ky) * kPadded + (2 * ox + kx)) * CIn;
          if constexpr (SkipZeros) {
            bool empty = true;
            for (int ci = 0; ci < CIn; ++ci) empty = empty && px[ci] == 0.0f;
            if (empty) continue;
          }
          const float* w = kernel + (ky * 3 + kx) * CIn * COut;
          for (int ci = 0; ci < CIn; ++ci) {
            const float v = px[ci];
            for (int o = 0; o < COut; ++o) acc[o] += v * w[ci * COut + o];
          }
        }
      }
      std::copy_n(acc, COut, output + (oy * kOut + ox) * COut);
    }
  }
}

// 2x2 average pool, stride 1, VALID.
template <int In, int C>
void avg_pool2x2(const float* input, float* output) {
  constexpr int kOut = In - 1;
  for (int y = 0; y < kOut; ++y) {
    for (int x = 0; x < kOut; ++x) {
      const float* a = input + (y * In + x) * C;
      const float* b = a + C;
      const float* c = a + In * C;
      const float* d = c + C;
      float* out = output + (y * kOut + x) * C;
      for (int ch = 0; ch < C; ++ch) {
        out[ch] = ((a[ch] + b[ch]) + (c[ch] + d[ch])) * 0.25f;
      }
    }
  }
}

// out = bias + x * W for a row-major [in][out] kernel followed by biases.
template <int In, int Out>
void dense(const float* x, const float* kernel, float* out) {
  const float* bias = kernel + In * Out;
  for (int o = 0; o < Out; ++o) out[o] = bias[o];
  for (int i = 0; i < In; ++i) {
    const float v = x[i];
    const float* w = kernel + i * Out;
    for (int o = 0; o < Out; ++o) out[o] += v * w[o];
  }
}

inline float sigmoid(float z) { return 1.0f / (1.0f + std::exp(-z)); }

template <std::size_t N>
bool finite(const std::array<float, N>& v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace

ActionProbs tempered_softmax(const Logits& logits) {
  ActionProbs probs{};
  double max_scaled = -INFINITY;
  for (int a = 0; a < kNumActions; ++a) {
    max_scaled = std::max(max_scaled, static_cast<double>(logits[a]) *
                                          kSoftmaxInverseTemperature);
  }
  double total = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    probs[a] = std::exp(static_cast<double>(logits[a]) *
                            kSoftmaxInverseTemperature -
                        max_scaled);
    total += probs[a];
  }
  for (double& p : probs) p /= total;
  return probs;
}

ForwardResult forward(const NetworkParams& params, const Observation& obs,
                      int prev_action, bool ate, const RecurrentState& state) {
  const float* w = params.weights().data();

  std::array<float, kConv1Size * kConv1Size * kConv1Out> conv1_out;
  conv3x3_s2<kViewSize, kObsChannels, kConv1Out, true>(obs.data(), w + kConv1Offset,
                                                 conv1_out.data());
  std::array<float, kPool1Size * kPool1Size * kConv1Out> pool1_out;
  avg_pool2x2<kConv1Size, kConv1Out>(conv1_out.data(), pool1_out.data());
  std::array<float, kConv2Size * kConv2Size * kConv2Out> conv2_out;
  conv3x3_s2<kPool1Size, kConv1Out, kConv2Out>(
      pool1_out.data(), w + kConv2Offset, conv2_out.data());

  // Embedding: flattened features, one-hot previous action, ate bit; then
  // the recurrent output, so the dense layer sees [embedding, hidden].
  std::array<float, kDenseIn> dense_in{};
  avg_pool2x2<kConv2Size, kConv2Out>(conv2_out.data(), dense_in.data());
  if (prev_action >= 0 && prev_action < kNumActions) {
    dense_in[kFlat + prev_action] = 1.0f;
  }
  dense_in[kFlat + kNumActions] = ate ? 1.0f : 0.0f;

  ForwardResult result;
  std::array<std::array<float, kHiddenSize>, kGates> gates;
  const float* rec = w + kRecurrentOffset;
  for (int g = 0; g < kGates; ++g) {
    const float* block = rec + g * kGateParams;
    const float* w_in = block;
    const float* w_hidden = block + kEmbedding * kHiddenSize;
    const float* bias = w_hidden + kHiddenSize * kHiddenSize;
    std::array<float, kHiddenSize>& z = gates[g];
    for (int j = 0; j < kHiddenSize; ++j) z[j] = bias[j];
    for (int i = 0; i < kEmbedding; ++i) {
      const float v = dense_in[i];
      for (int j = 0; j < kHiddenSize; ++j) z[j] += v * w_in[i * kHiddenSize + j];
    }
    for (int k = 0; k < kHiddenSize; ++k) {
      const float v = state.hidden[k];
      for (int j = 0; j < kHiddenSize; ++j) {
        z[j] += v * w_hidden[k * kHiddenSize + j];
      }
    }
  }
  for (int j = 0; j < kHiddenSize; ++j) {
    const float in_gate = sigmoid(gates[0][j]);
    const float forget_gate = sigmoid(gates[1][j]);
    const float candidate = std::tanh(gates[2][j]);
    const float out_gate = sigmoid(gates[3][j]);
    const float cell = forget_gate * state.cell[j] + in_gate * candidate;
    result.state.cell[j] = cell;
    result.state.hidden[j] = out_gate * std::tanh(cell);
  }
  std::copy(result.state.hidden.begin(), result.state.hidden.end(),
            dense_in.begin() + kEmbedding);

  std::array<float, kDenseHidden> hidden;
  dense<kDenseIn, kDenseHidden>(dense_in.data(), w + kDenseHiddenOffset,
                                hidden.data());
  for (float& h : hidden) h = std::tanh(h);
  dense<kDenseHidden, kNumActions>(hidden.data(), w + kDenseOutOffset,
                                   result.logits.data());

  if (!finite(dense_in) || !finite(result.state.cell) ||
      !finite(result.logits)) {
    throw NumericFault("policy network produced a non-finite value "
                       "(embedding, recurrent state, or logits)");
  }
  result.probs = tempered_softmax(result.logits);
  return result;
}

int sample_action(const ActionProbs& probs, RngStream& rng) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw NumericFault("sample_action: probability is NaN, negative, or "
                         "infinite");
    }
    total += p;
  }
  if (!(total > 0.0)) {
    throw NumericFault("sample_action: probabilities sum to zero");
  }
  const double u = rng.uniform() * total;
  double cumulative = 0.0;
  int last_positive = 0;
  for (int a = 0; a < kNumActions; ++a) {
    if (probs[a] <= 0.0) continue;
    cumulative += probs[a];
    last_positive = a;
    if (u < cumulative) return a;
  }
  return last_positive;
}

NetworkParams mutate(const NetworkParams& parent, double sigma,
                     RngStream& rng) {
  NetworkParams child = parent;
  if (sigma == 0.0) return child;
  for (float& w : child.weights()) {
    w = static_cast<float>(static_cast<double>(w) + rng.normal() * sigma);
  }
  return child;
}

}  // namespace ecoevo
