#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ecoevo/rng.hpp"

namespace ecoevo {

inline constexpr int kViewSize = 15;
inline constexpr int kViewRadius = kViewSize / 2;
inline constexpr int kObsChannels = 3;  // resources, agent count, walls
inline constexpr int kNumActions = 5;
inline constexpr int kHiddenSize = 4;
inline constexpr float kSoftmaxInverseTemperature = 50.0f;

// Row-major [row][col][channel] view centred on the agent.
using Observation = std::array<float, kViewSize * kViewSize * kObsChannels>;
using ActionProbs = std::array<double, kNumActions>;
using Logits = std::array<float, kNumActions>;

// Shapes of every stage of the policy network.
namespace arch {
inline constexpr int kConv1Out = 4;
inline constexpr int kConv2Out = 8;
inline constexpr int kKernel = 3;
inline constexpr int kStride = 2;
inline constexpr int kConv1Size = (kViewSize + kStride - 1) / kStride;  // SAME
inline constexpr int kPool1Size = kConv1Size - 1;  // 2x2, stride 1, VALID
inline constexpr int kConv2Size = (kPool1Size + kStride - 1) / kStride;
inline constexpr int kPool2Size = kConv2Size - 1;
inline constexpr int kFlat = kPool2Size * kPool2Size * kConv2Out;
inline constexpr int kEmbedding = kFlat + kNumActions + 1;
inline constexpr int kDenseIn = kEmbedding + kHiddenSize;
inline constexpr int kDenseHidden = 8;
inline constexpr int kGates = 4;  // input, forget, candidate, output

inline constexpr std::size_t kConv1Params =
    kKernel * kKernel * kObsChannels * kConv1Out + kConv1Out;
inline constexpr std::size_t kConv2Params =
    kKernel * kKernel * kConv1Out * kConv2Out + kConv2Out;
// Per gate: input kernel, recurrent kernel, bias.
inline constexpr std::size_t kGateParams =
    kEmbedding * kHiddenSize + kHiddenSize * kHiddenSize + kHiddenSize;
inline constexpr std::size_t kRecurrentParams = kGates * kGateParams;
inline constexpr std::size_t kDenseHiddenParams =
    kDenseIn * kDenseHidden + kDenseHidden;
inline constexpr std::size_t kDenseOutParams =
    kDenseHidden * kNumActions + kNumActions;

inline constexpr std::size_t kConv1Offset = 0;
inline constexpr std::size_t kConv2Offset = kConv1Offset + kConv1Params;
inline constexpr std::size_t kRecurrentOffset = kConv2Offset + kConv2Params;
inline constexpr std::size_t kDenseHiddenOffset =
    kRecurrentOffset + kRecurrentParams;
inline constexpr std::size_t kDenseOutOffset =
    kDenseHiddenOffset + kDenseHiddenParams;
inline constexpr std::size_t kTotalParams = kDenseOutOffset + kDenseOutParams;

static_assert(kFlat == 72 && kEmbedding == 78 && kDenseIn == 82);
static_assert(kTotalParams == 2445);
}  // namespace arch

// Flat weight vector, segments in order conv1, conv2, recurrent,
// dense_hidden, dense_out. Within a segment kernels come first (HWIO for the
// convolutions, [in][out] for dense layers), then biases. The recurrent
// segment is four gate blocks (input, forget, candidate, output), each
// [input kernel 78x4][recurrent kernel 4x4][bias 4].
class NetworkParams {
 public:
  static constexpr std::size_t kSize = arch::kTotalParams;

  NetworkParams() : weights_(kSize, 0.0f) {}
  // Throws std::invalid_argument unless weights.size() == kSize.
  explicit NetworkParams(std::vector<float> weights);

  // Independent N(0, stddev) weights.
  static NetworkParams random(RngStream& rng, double stddev);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const float> weights() const noexcept { return weights_; }
  std::span<float> weights() noexcept { return weights_; }

  std::span<const float> conv1() const noexcept;
  std::span<const float> conv2() const noexcept;
  std::span<const float> recurrent() const noexcept;
  std::span<const float> dense_hidden() const noexcept;
  std::span<const float> dense_out() const noexcept;

  bool all_finite() const noexcept;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;

 private:
  std::vector<float> weights_;
};

struct RecurrentState {
  std::array<float, kHiddenSize> hidden{};
  std::array<float, kHiddenSize> cell{};
  friend bool operator==(const RecurrentState&, const RecurrentState&) = default;
};

struct ForwardResult {
  ActionProbs probs{};
  Logits logits{};
  RecurrentState state;
};

// One policy step. prev_action is in [0, kNumActions) or -1 for "none"
// (encoded as an all-zero one-hot). Throws NumericFault if any stage
// produces a non-finite value.
ForwardResult forward(const NetworkParams& params, const Observation& obs,
                      int prev_action, bool ate, const RecurrentState& state);

// softmax(logits * 50), evaluated in double precision.
ActionProbs tempered_softmax(const Logits& logits);

// Categorical draw. Throws NumericFault on NaN or non-normalisable input.
int sample_action(const ActionProbs& probs, RngStream& rng);

// parent + N(0, sigma) per weight; sigma is a standard deviation.
NetworkParams mutate(const NetworkParams& parent, double sigma, RngStream& rng);

}  // namespace ecoevo
