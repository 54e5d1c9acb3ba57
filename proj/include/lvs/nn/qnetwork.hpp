#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lvs/correspondence.hpp"
#include "lvs/nn/layers.hpp"

namespace lvs::nn {

inline constexpr int kNumActions = 7;

// Perception module: three conv/BN/ReLU/maxpool stages (5x5x16 stride 2, 3x3x32, 3x3x64)
// and a 1x1 conv to a single channel, then a fully connected head to 7 Q-values.
// For a 64x64 two-channel input the flattened feature is 4x4x1 = 16 values.
template <typename T>
class QNetworkT {
public:
    explicit QNetworkT(int input_size = 64, int in_channels = 2);

    int input_size() const { return input_size_; }
    int in_channels() const { return in_channels_; }
    int feature_length() const { return feature_side_ * feature_side_; }

    void init(std::uint64_t seed);

    /// [B, C, S, S] -> [B, 7]
    Tensor<T> forward(const Tensor<T>& x, Mode mode);

    /// Backpropagates dL/dQ ([B, 7]) through the last Train-mode forward pass.
    void backward(const Tensor<T>& dq);

    /// Mean Huber loss between Q(x)[a_i] and target_i; gradients are added to every parameter.
    double loss_and_backward(const Tensor<T>& x, std::span<const int> actions, std::span<const T> targets);

    void zero_grad();

    /// Trainable parameters followed by normalization buffers, in checkpoint order.
    std::vector<Param<T>*> parameters();
    std::vector<const Param<T>*> parameters() const;

    /// Copies parameter and buffer values from another network of the same architecture.
    void copy_from(const QNetworkT& other);

private:
    int input_size_;
    int in_channels_;
    int feature_side_ = 0;
    Conv2d<T> conv1_, conv2_, conv3_, conv4_;
    BatchNorm2d<T> bn1_, bn2_, bn3_, bn4_;
    ReLU<T> relu1_, relu2_, relu3_, relu4_;
    MaxPool2<T> pool1_, pool2_, pool3_;
    Linear<T> fc_;
    std::array<Tensor<T>, 16> acts_;
};

using QNetwork = QNetworkT<float>;

/// Huber loss with unit threshold.
double huber(double d);
double huber_grad(double d);

/// Packs observations into a [B, 2, H, W] tensor (dx, dy planes; invalid pixels are zero).
template <typename T>
Tensor<T> observations_to_tensor(std::span<const CorrespondenceMap* const> maps);

/// argmax with ties broken by the lowest index.
int argmax_action(std::span<const float> q);
int argmax_action(std::span<const double> q);

/// Greedy action for one observation (evaluation mode).
int act_greedy(QNetwork& net, const CorrespondenceMap& obs);

std::array<float, kNumActions> q_values(QNetwork& net, const CorrespondenceMap& obs);

/// Binary checkpoint: "QNET", u32 version, u32 count, then per tensor
/// u32 name length, name bytes, u32 rank, u32 dims..., f32 values (little-endian).
void save_checkpoint(const QNetwork& net, const std::string& path);
QNetwork load_checkpoint(const std::string& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace lvs::nn
