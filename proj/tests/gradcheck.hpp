#pragma once

// Central finite-difference checks for every layer type and the full network, in double.
// Loss is L = sum(w * f(x)) with fixed random weights w, so dL/dy = w.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "lvs/nn/layers.hpp"
#include "lvs/nn/qnetwork.hpp"

namespace lvs::oracle {

using nn::Mode;
using nn::Tensor;

// Gradients smaller than this are compared in absolute terms; below it the central
// difference is dominated by rounding in the loss.
inline constexpr double kGradFloor = 1e-5;

struct GradStats {
    int checked = 0;
    double max_rel_error = 0.0;

    void add(double analytic, double numeric) {
        const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
        max_rel_error = std::max(max_rel_error, std::abs(analytic - numeric) / denom);
        ++checked;
    }
};

inline Tensor<double> random_tensor(std::vector<int> shape, std::mt19937_64& rng, double scale = 1.0) {
    Tensor<double> t(std::move(shape));
    std::normal_distribution<double> n(0.0, scale);
    for (auto& v : t.data) v = n(rng);
    return t;
}

inline double weighted_sum(const Tensor<double>& y, const Tensor<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
    return s;
}

// Checks dL/dx and dL/dparams at `samples` random coordinates of each (3 subsets per call site).
template <typename Layer>
GradStats check_layer(Layer& layer, Tensor<double> x, std::vector<nn::Param<double>*> params, std::mt19937_64& rng,
                      int samples = 20, double h = 1e-5) {
    Tensor<double> y;
    layer.forward(x, y, Mode::Train);
    const Tensor<double> w = random_tensor(y.shape, rng);
    for (auto* p : params) p->grad.fill(0.0);
    Tensor<double> dx;
    layer.backward(w, &dx);

    auto loss = [&] {
        Tensor<double> out;
        layer.forward(x, out, Mode::Train);
        return weighted_sum(out, w);
    };
    GradStats st;
    auto probe = [&](std::vector<double>& data, const std::vector<double>& grad) {
        std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
        for (int s = 0; s < samples; ++s) {
            const std::size_t i = pick(rng);
            const double keep = data[i];
            data[i] = keep + h;
            const double lp = loss();
            data[i] = keep - h;
            const double lm = loss();
            data[i] = keep;
            st.add(grad[i], (lp - lm) / (2 * h));
        }
    };
    probe(x.data, dx.data);
    for (auto* p : params) probe(p->value.data, p->grad.data);
    return st;
}

// Max pooling and ReLU are piecewise linear; inputs are spread so no probe crosses a kink.
inline Tensor<double> separated_tensor(std::vector<int> shape, std::mt19937_64& rng) {
    Tensor<double> t(std::move(shape));
    std::vector<double> vals(t.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = -1.0 + 2.0 * (static_cast<double>(i) + 0.5) / vals.size();
    std::shuffle(vals.begin(), vals.end(), rng);
    for (std::size_t i = 0; i < vals.size(); ++i) t[i] = vals[i] + (vals[i] >= 0 ? 0.01 : -0.01);
    return t;
}

inline std::map<std::string, GradStats> gradient_check_all(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::map<std::string, GradStats> out;
    auto merge = [&](const std::string& k, const GradStats& s) {
        auto& m = out[k];
        m.checked += s.checked;
        m.max_rel_error = std::max(m.max_rel_error, s.max_rel_error);
    };
    for (int trial = 0; trial < 3; ++trial) {
        {
            nn::Conv2d<double> conv("c", 2, 3, 5, 2, 2);
            conv.init_he(rng);
            merge("Conv2d(5x5,s2)", check_layer(conv, random_tensor({2, 2, 9, 9}, rng), {&conv.weight()}, rng));
            nn::Conv2d<double> c3("c", 3, 4, 3, 1, 1);
            c3.init_he(rng);
            merge("Conv2d(3x3,s1)", check_layer(c3, random_tensor({2, 3, 6, 6}, rng), {&c3.weight()}, rng));
            nn::Conv2d<double> c1("c", 4, 1, 1, 1, 0);
            c1.init_he(rng);
            merge("Conv2d(1x1)", check_layer(c1, random_tensor({2, 4, 3, 3}, rng), {&c1.weight()}, rng));
        }
        {
            nn::BatchNorm2d<double> bn("bn", 3);
            auto g = random_tensor({3}, rng, 0.5);
            for (std::size_t i = 0; i < 3; ++i) bn.gamma().value[i] = 1.0 + g[i];
            bn.beta().value = random_tensor({3}, rng, 0.5);
            merge("BatchNorm2d", check_layer(bn, random_tensor({4, 3, 3, 3}, rng), {&bn.gamma(), &bn.beta()}, rng));
        }
        {
            nn::ReLU<double> relu;
            merge("ReLU", check_layer(relu, separated_tensor({2, 2, 4, 4}, rng), {}, rng));
            nn::MaxPool2<double> pool;
            merge("MaxPool2", check_layer(pool, separated_tensor({2, 2, 5, 5}, rng), {}, rng));
        }
        {
            nn::Linear<double> fc("fc", 6, 7);
            fc.init_he(rng);
            fc.bias().value = random_tensor({7}, rng, 0.1);
            merge("Linear", check_layer(fc, random_tensor({3, 6}, rng), {&fc.weight(), &fc.bias()}, rng));
        }
    }

    // Whole network through the Huber loss, including every BN and pooling stage.
    for (int trial = 0; trial < 3; ++trial) {
        nn::QNetworkT<double> net(16, 2);
        net.init(seed + 100 + trial);
        const int B = 4;
        const Tensor<double> x = random_tensor({B, 2, 16, 16}, rng);
        std::vector<int> actions(B);
        std::vector<double> targets(B);
        std::uniform_int_distribution<int> act(0, nn::kNumActions - 1);
        for (int b = 0; b < B; ++b) {
            actions[b] = act(rng);
            targets[b] = std::normal_distribution<double>(0.0, 0.5)(rng);
        }
        net.zero_grad();
        net.loss_and_backward(x, actions, targets);
        auto loss = [&] {
            const Tensor<double> q = net.forward(x, Mode::Train);
            double l = 0.0;
            for (int b = 0; b < B; ++b) l += nn::huber(q[static_cast<std::size_t>(b) * nn::kNumActions + actions[b]] - targets[b]);
            return l / B;
        };
        GradStats st;
        const double h = 1e-5;
        for (nn::Param<double>* p : net.parameters()) {
            if (!p->trainable) continue;
            std::uniform_int_distribution<std::size_t> pick(0, p->value.size() - 1);
            for (int s = 0; s < 5; ++s) {
                const std::size_t i = pick(rng);
                const double keep = p->value[i];
                p->value[i] = keep + h;
                const double lp = loss();
                p->value[i] = keep - h;
                const double lm = loss();
                p->value[i] = keep;
                st.add(p->grad[i], (lp - lm) / (2 * h));
            }
        }
        merge("QNetwork", st);
    }
    return out;
}

}  // namespace lvs::oracle
