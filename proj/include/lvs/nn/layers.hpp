#pragma once

// Layers of the Q-network. Activations are NCHW tensors. Each layer caches what
// its backward pass needs during a training-mode forward pass; backward() adds
// parameter gradients into Param::grad and, when `dx` is non-null, writes the
// gradient with respect to the layer input.

#include <random>
#include <vector>

#include "lvs/nn/tensor.hpp"

namespace lvs::nn {

enum class Mode { Train, Eval };

template <typename T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad);

    int out_size(int in) const { return (in + 2 * pad_ - kernel_) / stride_ + 1; }
    void init_he(std::mt19937_64& rng);

    void forward(const Tensor<T>& x, Tensor<T>& y, Mode mode);
    void backward(const Tensor<T>& dy, Tensor<T>* dx);

    Param<T>& weight() { return weight_; }
    const Param<T>& weight() const { return weight_; }

private:
    void im2col(const Tensor<T>& x);

    int in_ch_ = 0, out_ch_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0;
    Param<T> weight_;  // [out_ch, in_ch*k*k]
    // cache
    std::vector<int> in_shape_;
    int oh_ = 0, ow_ = 0;
    std::vector<T> cols_;  // [in_ch*k*k, batch*oh*ow]
    std::vector<T> scratch_;
};

template <typename T>
class BatchNorm2d {
public:
    BatchNorm2d() = default;
    BatchNorm2d(std::string name, int channels);

    void forward(const Tensor<T>& x, Tensor<T>& y, Mode mode);
    void backward(const Tensor<T>& dy, Tensor<T>* dx);

    Param<T>& gamma() { return gamma_; }
    Param<T>& beta() { return beta_; }
    Param<T>& running_mean() { return mean_; }
    Param<T>& running_var() { return var_; }

    static constexpr double kMomentum = 0.1;
    static constexpr double kEps = 1e-5;

private:
    int channels_ = 0;
    Param<T> gamma_, beta_, mean_, var_;
    std::vector<T> xhat_;
    std::vector<T> inv_std_;
    std::vector<int> shape_;
};

template <typename T>
class ReLU {
public:
    void forward(const Tensor<T>& x, Tensor<T>& y, Mode mode);
    void backward(const Tensor<T>& dy, Tensor<T>* dx);

private:
    std::vector<unsigned char> mask_;
};

// 2x2 max pooling, stride 2, odd trailing rows/columns dropped.
template <typename T>
class MaxPool2 {
public:
    void forward(const Tensor<T>& x, Tensor<T>& y, Mode mode);
    void backward(const Tensor<T>& dy, Tensor<T>* dx);

private:
    std::vector<std::size_t> argmax_;
    std::vector<int> in_shape_;
};

template <typename T>
class Linear {
public:
    Linear() = default;
    Linear(std::string name, int in, int out);

    void init_he(std::mt19937_64& rng);
    void forward(const Tensor<T>& x, Tensor<T>& y, Mode mode);
    void backward(const Tensor<T>& dy, Tensor<T>* dx);

    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }

private:
    int in_ = 0, out_ = 0;
    Param<T> weight_;  // [out, in]
    Param<T> bias_;    // [out]
    Tensor<T> x_;
};

}  // namespace lvs::nn
