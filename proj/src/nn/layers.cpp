#include "lvs/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lvs/simd/kernels.hpp"

namespace lvs::nn {

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
    weight_.name = std::move(name) + ".weight";
    weight_.value.resize({out_ch, in_ch * kernel * kernel});
    weight_.grad.resize(weight_.value.shape);
}

template <typename T>
void Conv2d<T>::init_he(std::mt19937_64& rng) {
    const double fan_in = static_cast<double>(in_ch_ * kernel_ * kernel_);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (T& w : weight_.value.data) w = static_cast<T>(dist(rng));
}

namespace {

// Output columns [lo, hi) whose input column ox*stride - pad + kx lies inside [0, W).
inline void valid_span(int ow, int stride, int offset, int W, int& lo, int& hi) {
    lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
    hi = (W - 1 - offset) >= 0 ? std::min(ow, (W - 1 - offset) / stride + 1) : 0;
    if (hi < lo) hi = lo;
}

// Sum with several independent accumulators so the compiler can keep them in vector lanes.
template <typename T>
double row_sum(const T* p, std::size_t n) {
    T acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) acc[l] += p[i + l];
    double s = 0.0;
    for (int l = 0; l < 8; ++l) s += acc[l];
    for (; i < n; ++i) s += p[i];
    return s;
}

template <typename T>
double row_sq_dev(const T* p, std::size_t n, T mean) {
    T acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) acc[l] += (p[i + l] - mean) * (p[i + l] - mean);
    double s = 0.0;
    for (int l = 0; l < 8; ++l) s += acc[l];
    for (; i < n; ++i) s += static_cast<double>(p[i] - mean) * (p[i] - mean);
    return s;
}

template <typename T>
double row_dot(const T* p, const T* q, std::size_t n) {
    T acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) acc[l] += p[i + l] * q[i + l];
    double s = 0.0;
    for (int l = 0; l < 8; ++l) s += acc[l];
    for (; i < n; ++i) s += static_cast<double>(p[i]) * q[i];
    return s;
}

}  // namespace

template <typename T>
void Conv2d<T>::im2col(const Tensor<T>& x) {
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const std::size_t hw = static_cast<std::size_t>(oh_) * ow_;
    const std::size_t ncols = static_cast<std::size_t>(B) * hw;
    cols_.resize(static_cast<std::size_t>(C) * kernel_ * kernel_ * ncols);
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < kernel_; ++ky) {
            for (int kx = 0; kx < kernel_; ++kx) {
                T* dst = cols_.data() + static_cast<std::size_t>((c * kernel_ + ky) * kernel_ + kx) * ncols;
                int lo, hi;
                valid_span(ow_, stride_, kx - pad_, W, lo, hi);
                for (int b = 0; b < B; ++b) {
                    const T* src = x.ptr() + (static_cast<std::size_t>(b) * C + c) * H * W;
                    T* d = dst + b * hw;
                    for (int oy = 0; oy < oh_; ++oy) {
                        T* row = d + oy * ow_;
                        const int iy = oy * stride_ - pad_ + ky;
                        if (iy < 0 || iy >= H) {
                            std::fill(row, row + ow_, T(0));
                            continue;
                        }
                        std::fill(row, row + lo, T(0));
                        std::fill(row + hi, row + ow_, T(0));
                        const T* s = src + iy * W + kx - pad_;
                        if (stride_ == 1) {
                            std::copy(s + lo, s + hi, row + lo);
                        } else {
                            for (int ox = lo; ox < hi; ++ox) row[ox] = s[ox * stride_];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void Conv2d<T>::forward(const Tensor<T>& x, Tensor<T>& y, Mode) {
    if (x.shape.size() != 4 || x.dim(1) != in_ch_) {
        throw Error("Conv2d: input shape mismatch for " + weight_.name);
    }
    in_shape_ = x.shape;
    const int B = x.dim(0);
    oh_ = out_size(x.dim(2));
    ow_ = out_size(x.dim(3));
    im2col(x);
    const int hw = oh_ * ow_;
    const int ncols = B * hw;
    const int K = in_ch_ * kernel_ * kernel_;
    scratch_.resize(static_cast<std::size_t>(out_ch_) * ncols);
    simd::gemm_nn(out_ch_, ncols, K, weight_.value.ptr(), K, cols_.data(), ncols, scratch_.data(), ncols, false);
    y.resize({B, out_ch_, oh_, ow_});
    for (int b = 0; b < B; ++b) {
        for (int co = 0; co < out_ch_; ++co) {
            std::copy_n(scratch_.data() + static_cast<std::size_t>(co) * ncols + static_cast<std::size_t>(b) * hw, hw,
                        y.ptr() + (static_cast<std::size_t>(b) * out_ch_ + co) * hw);
        }
    }
}

template <typename T>
void Conv2d<T>::backward(const Tensor<T>& dy, Tensor<T>* dx) {
    const int B = in_shape_[0], C = in_shape_[1], H = in_shape_[2], W = in_shape_[3];
    const int hw = oh_ * ow_;
    const int ncols = B * hw;
    const int K = in_ch_ * kernel_ * kernel_;
    scratch_.resize(static_cast<std::size_t>(out_ch_) * ncols);
    for (int b = 0; b < B; ++b) {
        for (int co = 0; co < out_ch_; ++co) {
            std::copy_n(dy.ptr() + (static_cast<std::size_t>(b) * out_ch_ + co) * hw, hw,
                        scratch_.data() + static_cast<std::size_t>(co) * ncols + static_cast<std::size_t>(b) * hw);
        }
    }
    simd::gemm_nt(out_ch_, K, ncols, scratch_.data(), ncols, cols_.data(), ncols, weight_.grad.ptr(), K, true);
    if (!dx) {
        return;
    }
    std::vector<T> dcols(static_cast<std::size_t>(K) * ncols);
    simd::gemm_tn(K, ncols, out_ch_, weight_.value.ptr(), K, scratch_.data(), ncols, dcols.data(), ncols, false);
    dx->resize(in_shape_);
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < kernel_; ++ky) {
            for (int kx = 0; kx < kernel_; ++kx) {
                const T* src = dcols.data() + static_cast<std::size_t>((c * kernel_ + ky) * kernel_ + kx) * ncols;
                int lo, hi;
                valid_span(ow_, stride_, kx - pad_, W, lo, hi);
                for (int b = 0; b < B; ++b) {
                    T* d = dx->ptr() + (static_cast<std::size_t>(b) * C + c) * H * W;
                    const T* s = src + static_cast<std::size_t>(b) * hw;
                    for (int oy = 0; oy < oh_; ++oy) {
                        const int iy = oy * stride_ - pad_ + ky;
                        if (iy < 0 || iy >= H) continue;
                        T* drow = d + iy * W + kx - pad_;
                        const T* srow = s + oy * ow_;
                        for (int ox = lo; ox < hi; ++ox) drow[ox * stride_] += srow[ox];
                    }
                }
            }
        }
    }
}

// ----------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::string name, int channels) : channels_(channels) {
    gamma_ = {name + ".gamma", Tensor<T>({channels}, T(1)), Tensor<T>({channels}), true};
    beta_ = {name + ".beta", Tensor<T>({channels}), Tensor<T>({channels}), true};
    mean_ = {name + ".running_mean", Tensor<T>({channels}), {}, false};
    var_ = {name + ".running_var", Tensor<T>({channels}, T(1)), {}, false};
}

template <typename T>
void BatchNorm2d<T>::forward(const Tensor<T>& x, Tensor<T>& y, Mode mode) {
    if (x.shape.size() != 4 || x.dim(1) != channels_) {
        throw Error("BatchNorm2d: input shape mismatch for " + gamma_.name);
    }
    const int B = x.dim(0);
    const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    const double n = static_cast<double>(B) * hw;
    y.resize(x.shape);
    shape_ = x.shape;
    if (mode == Mode::Train) {
        xhat_.resize(x.size());
        inv_std_.resize(channels_);
    }
    for (int c = 0; c < channels_; ++c) {
        double mean, var;
        if (mode == Mode::Train) {
            double s = 0.0;
            for (int b = 0; b < B; ++b) s += row_sum(x.ptr() + (static_cast<std::size_t>(b) * channels_ + c) * hw, hw);
            mean = s / n;
            double ss = 0.0;
            for (int b = 0; b < B; ++b) {
                ss += row_sq_dev(x.ptr() + (static_cast<std::size_t>(b) * channels_ + c) * hw, hw, static_cast<T>(mean));
            }
            var = ss / n;
            const double unbiased = n > 1.0 ? ss / (n - 1.0) : var;
            mean_.value[c] = static_cast<T>((1.0 - kMomentum) * mean_.value[c] + kMomentum * mean);
            var_.value[c] = static_cast<T>((1.0 - kMomentum) * var_.value[c] + kMomentum * unbiased);
        } else {
            mean = mean_.value[c];
            var = var_.value[c];
        }
        const T inv = static_cast<T>(1.0 / std::sqrt(var + kEps));
        const T m = static_cast<T>(mean);
        const T g = gamma_.value[c];
        const T bt = beta_.value[c];
        if (mode == Mode::Train) inv_std_[c] = inv;
        for (int b = 0; b < B; ++b) {
            const std::size_t off = (static_cast<std::size_t>(b) * channels_ + c) * hw;
            const T* xp = x.ptr() + off;
            T* yp = y.ptr() + off;
            if (mode == Mode::Train) {
                T* hp = xhat_.data() + off;
                for (std::size_t i = 0; i < hw; ++i) {
                    hp[i] = (xp[i] - m) * inv;
                    yp[i] = g * hp[i] + bt;
                }
            } else {
                for (std::size_t i = 0; i < hw; ++i) yp[i] = g * ((xp[i] - m) * inv) + bt;
            }
        }
    }
}

template <typename T>
void BatchNorm2d<T>::backward(const Tensor<T>& dy, Tensor<T>* dx) {
    const int B = shape_[0];
    const std::size_t hw = static_cast<std::size_t>(shape_[2]) * shape_[3];
    const double n = static_cast<double>(B) * hw;
    if (dx) dx->resize(shape_);
    for (int c = 0; c < channels_; ++c) {
        double sum_dy = 0.0, sum_dy_xh = 0.0;
        for (int b = 0; b < B; ++b) {
            const std::size_t off = (static_cast<std::size_t>(b) * channels_ + c) * hw;
            sum_dy += row_sum(dy.ptr() + off, hw);
            sum_dy_xh += row_dot(dy.ptr() + off, xhat_.data() + off, hw);
        }
        gamma_.grad[c] += static_cast<T>(sum_dy_xh);
        beta_.grad[c] += static_cast<T>(sum_dy);
        if (!dx) continue;
        const T k = static_cast<T>(gamma_.value[c] * inv_std_[c] / n);
        const T nn = static_cast<T>(n), sd = static_cast<T>(sum_dy), sdx = static_cast<T>(sum_dy_xh);
        for (int b = 0; b < B; ++b) {
            const std::size_t off = (static_cast<std::size_t>(b) * channels_ + c) * hw;
            const T* dyp = dy.ptr() + off;
            const T* hp = xhat_.data() + off;
            T* dxp = dx->ptr() + off;
            for (std::size_t i = 0; i < hw; ++i) dxp[i] = k * (nn * dyp[i] - sd - hp[i] * sdx);
        }
    }
}

// ------------------------------------------------------------------ ReLU

template <typename T>
void ReLU<T>::forward(const Tensor<T>& x, Tensor<T>& y, Mode mode) {
    y.resize(x.shape);
    if (mode == Mode::Train) mask_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool on = x[i] > T(0);
        y[i] = on ? x[i] : T(0);
        if (mode == Mode::Train) mask_[i] = on;
    }
}

template <typename T>
void ReLU<T>::backward(const Tensor<T>& dy, Tensor<T>* dx) {
    dx->resize(dy.shape);
    for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[i] = mask_[i] ? dy[i] : T(0);
}

// --------------------------------------------------------------- MaxPool2

template <typename T>
void MaxPool2<T>::forward(const Tensor<T>& x, Tensor<T>& y, Mode mode) {
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int oh = H / 2, ow = W / 2;
    in_shape_ = x.shape;
    y.resize({B, C, oh, ow});
    if (mode == Mode::Train) argmax_.resize(y.size());
    std::size_t o = 0;
    for (int bc = 0; bc < B * C; ++bc) {
        const std::size_t base = static_cast<std::size_t>(bc) * H * W;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox, ++o) {
                std::size_t best = base + static_cast<std::size_t>(2 * oy) * W + 2 * ox;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dxp = 0; dxp < 2; ++dxp) {
                        const std::size_t i = base + static_cast<std::size_t>(2 * oy + dy) * W + 2 * ox + dxp;
                        if (x[i] > x[best]) best = i;
                    }
                }
                y[o] = x[best];
                if (mode == Mode::Train) argmax_[o] = best;
            }
        }
    }
}

template <typename T>
void MaxPool2<T>::backward(const Tensor<T>& dy, Tensor<T>* dx) {
    dx->resize(in_shape_);
    for (std::size_t o = 0; o < dy.size(); ++o) (*dx)[argmax_[o]] += dy[o];
}

// ----------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(std::string name, int in, int out) : in_(in), out_(out) {
    weight_ = {name + ".weight", Tensor<T>({out, in}), Tensor<T>({out, in}), true};
    bias_ = {name + ".bias", Tensor<T>({out}), Tensor<T>({out}), true};
}

template <typename T>
void Linear<T>::init_he(std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in_));
    for (T& w : weight_.value.data) w = static_cast<T>(dist(rng));
    bias_.value.fill(T(0));
}

template <typename T>
void Linear<T>::forward(const Tensor<T>& x, Tensor<T>& y, Mode mode) {
    const int B = x.dim(0);
    if (static_cast<int>(x.size() / B) != in_) {
        throw Error("Linear: input shape mismatch for " + weight_.name);
    }
    if (mode == Mode::Train) x_ = x;
    y.resize({B, out_});
    // y[B,out] = x[B,in] * W[out,in]^T + b
    simd::gemm_nt(B, out_, in_, x.ptr(), in_, weight_.value.ptr(), in_, y.ptr(), out_, false);
    for (int b = 0; b < B; ++b)
        for (int j = 0; j < out_; ++j) y[static_cast<std::size_t>(b) * out_ + j] += bias_.value[j];
}

template <typename T>
void Linear<T>::backward(const Tensor<T>& dy, Tensor<T>* dx) {
    const int B = dy.dim(0);
    // dW[out,in] += dy[B,out]^T * x[B,in]
    simd::gemm_tn(out_, in_, B, dy.ptr(), out_, x_.ptr(), in_, weight_.grad.ptr(), in_, true);
    for (int b = 0; b < B; ++b)
        for (int j = 0; j < out_; ++j) bias_.grad[j] += dy[static_cast<std::size_t>(b) * out_ + j];
    if (dx) {
        dx->resize(x_.shape);
        simd::gemm_nn(B, in_, out_, dy.ptr(), out_, weight_.value.ptr(), in_, dx->ptr(), in_, false);
    }
}

template class Conv2d<float>;
template class Conv2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class ReLU<float>;
template class ReLU<double>;
template class MaxPool2<float>;
template class MaxPool2<double>;
template class Linear<float>;
template class Linear<double>;

}  // namespace lvs::nn
