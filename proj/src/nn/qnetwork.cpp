#include "lvs/nn/qnetwork.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lvs/binio.hpp"

namespace lvs::nn {

template <typename T>
QNetworkT<T>::QNetworkT(int input_size, int in_channels)
    : input_size_(input_size),
      in_channels_(in_channels),
      conv1_("conv1", in_channels, 16, 5, 2, 2),
      conv2_("conv2", 16, 32, 3, 1, 1),
      conv3_("conv3", 32, 64, 3, 1, 1),
      conv4_("conv4", 64, 1, 1, 1, 0),
      bn1_("bn1", 16),
      bn2_("bn2", 32),
      bn3_("bn3", 64),
      bn4_("bn4", 1) {
    int s = conv1_.out_size(input_size) / 2;
    s = conv2_.out_size(s) / 2;
    s = conv3_.out_size(s) / 2;
    feature_side_ = conv4_.out_size(s);
    if (in_channels < 1 || feature_side_ < 1) {
        throw Error("QNetwork: input too small for the architecture");
    }
    fc_ = Linear<T>("fc", feature_length(), kNumActions);
}

template <typename T>
void QNetworkT<T>::init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    conv1_.init_he(rng);
    conv2_.init_he(rng);
    conv3_.init_he(rng);
    conv4_.init_he(rng);
    fc_.init_he(rng);
    for (BatchNorm2d<T>* bn : {&bn1_, &bn2_, &bn3_, &bn4_}) {
        bn->gamma().value.fill(T(1));
        bn->beta().value.fill(T(0));
        bn->running_mean().value.fill(T(0));
        bn->running_var().value.fill(T(1));
    }
    zero_grad();
}

template <typename T>
Tensor<T> QNetworkT<T>::forward(const Tensor<T>& x, Mode mode) {
    if (x.shape.size() != 4 || x.dim(1) != in_channels_ || x.dim(2) != input_size_ || x.dim(3) != input_size_) {
        throw Error("QNetwork::forward: input shape mismatch");
    }
    auto& a = acts_;
    conv1_.forward(x, a[0], mode);
    bn1_.forward(a[0], a[1], mode);
    relu1_.forward(a[1], a[2], mode);
    pool1_.forward(a[2], a[3], mode);
    conv2_.forward(a[3], a[4], mode);
    bn2_.forward(a[4], a[5], mode);
    relu2_.forward(a[5], a[6], mode);
    pool2_.forward(a[6], a[7], mode);
    conv3_.forward(a[7], a[8], mode);
    bn3_.forward(a[8], a[9], mode);
    relu3_.forward(a[9], a[10], mode);
    pool3_.forward(a[10], a[11], mode);
    conv4_.forward(a[11], a[12], mode);
    bn4_.forward(a[12], a[13], mode);
    relu4_.forward(a[13], a[14], mode);
    Tensor<T> q;
    fc_.forward(a[14], q, mode);  // [B,1,s,s] is already the flattened row-major feature
    return q;
}

template <typename T>
void QNetworkT<T>::backward(const Tensor<T>& dq) {
    Tensor<T> g, h;
    fc_.backward(dq, &g);
    g.shape = acts_[14].shape;
    relu4_.backward(g, &h);
    bn4_.backward(h, &g);
    conv4_.backward(g, &h);
    pool3_.backward(h, &g);
    relu3_.backward(g, &h);
    bn3_.backward(h, &g);
    conv3_.backward(g, &h);
    pool2_.backward(h, &g);
    relu2_.backward(g, &h);
    bn2_.backward(h, &g);
    conv2_.backward(g, &h);
    pool1_.backward(h, &g);
    relu1_.backward(g, &h);
    bn1_.backward(h, &g);
    conv1_.backward(g, nullptr);
}

double huber(double d) {
    const double a = std::abs(d);
    return a <= 1.0 ? 0.5 * d * d : a - 0.5;
}

double huber_grad(double d) { return std::clamp(d, -1.0, 1.0); }

template <typename T>
double QNetworkT<T>::loss_and_backward(const Tensor<T>& x, std::span<const int> actions, std::span<const T> targets) {
    const Tensor<T> q = forward(x, Mode::Train);
    const int B = q.dim(0);
    if (static_cast<int>(actions.size()) != B || static_cast<int>(targets.size()) != B) {
        throw Error("loss_and_backward: batch size mismatch");
    }
    Tensor<T> dq({B, kNumActions});
    double loss = 0.0;
    for (int b = 0; b < B; ++b) {
        const int a = actions[b];
        if (a < 0 || a >= kNumActions) {
            throw Error("loss_and_backward: action out of range");
        }
        const double d = static_cast<double>(q[static_cast<std::size_t>(b) * kNumActions + a]) - targets[b];
        loss += huber(d);
        dq[static_cast<std::size_t>(b) * kNumActions + a] = static_cast<T>(huber_grad(d) / B);
    }
    backward(dq);
    return loss / B;
}

template <typename T>
void QNetworkT<T>::zero_grad() {
    for (Param<T>* p : parameters()) {
        if (p->trainable) p->grad.fill(T(0));
    }
}

template <typename T>
std::vector<Param<T>*> QNetworkT<T>::parameters() {
    return {&conv1_.weight(), &bn1_.gamma(), &bn1_.beta(),  &conv2_.weight(), &bn2_.gamma(),
            &bn2_.beta(),     &conv3_.weight(), &bn3_.gamma(), &bn3_.beta(),  &conv4_.weight(),
            &bn4_.gamma(),    &bn4_.beta(),  &fc_.weight(),  &fc_.bias(),
            &bn1_.running_mean(), &bn1_.running_var(), &bn2_.running_mean(), &bn2_.running_var(),
            &bn3_.running_mean(), &bn3_.running_var(), &bn4_.running_mean(), &bn4_.running_var()};
}

template <typename T>
std::vector<const Param<T>*> QNetworkT<T>::parameters() const {
    auto ps = const_cast<QNetworkT*>(this)->parameters();
    return {ps.begin(), ps.end()};
}

template <typename T>
void QNetworkT<T>::copy_from(const QNetworkT& other) {
    if (other.input_size_ != input_size_ || other.in_channels_ != in_channels_) {
        throw Error("QNetwork::copy_from: architecture mismatch");
    }
    auto dst = parameters();
    auto src = other.parameters();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->value.data = src[i]->value.data;
}

template <typename T>
Tensor<T> observations_to_tensor(std::span<const CorrespondenceMap* const> maps) {
    if (maps.empty()) {
        throw Error("observations_to_tensor: empty batch");
    }
    const int W = maps.front()->width;
    const int H = maps.front()->height;
    Tensor<T> x({static_cast<int>(maps.size()), 2, H, W});
    const std::size_t plane = static_cast<std::size_t>(W) * H;
    const double scale = 1.0 / W;
    for (std::size_t b = 0; b < maps.size(); ++b) {
        const CorrespondenceMap& m = *maps[b];
        if (m.width != W || m.height != H) {
            throw Error("observations_to_tensor: inconsistent map sizes");
        }
        T* dx = x.ptr() + b * 2 * plane;
        T* dy = dx + plane;
        for (std::size_t i = 0; i < plane; ++i) {
            dx[i] = m.valid[i] ? static_cast<T>(m.dx[i] * scale) : T(0);
            dy[i] = m.valid[i] ? static_cast<T>(m.dy[i] * scale) : T(0);
        }
    }
    return x;
}

template <typename R>
static int argmax_impl(std::span<const R> q) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(q.size()); ++i) {
        if (q[i] > q[best]) best = i;
    }
    return best;
}

int argmax_action(std::span<const float> q) { return argmax_impl(q); }
int argmax_action(std::span<const double> q) { return argmax_impl(q); }

std::array<float, kNumActions> q_values(QNetwork& net, const CorrespondenceMap& obs) {
    const CorrespondenceMap* one[] = {&obs};
    const Tensor<float> q = net.forward(observations_to_tensor<float>(one), Mode::Eval);
    std::array<float, kNumActions> out{};
    std::copy_n(q.ptr(), kNumActions, out.begin());
    return out;
}

int act_greedy(QNetwork& net, const CorrespondenceMap& obs) {
    const auto q = q_values(net, obs);
    return argmax_action(std::span<const float>(q));
}

void save_checkpoint(const QNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write checkpoint: " + path);
    }
    const auto params = net.parameters();
    out.write("QNET", 4);
    binio::put_u32(out, kCheckpointVersion);
    binio::put_u32(out, static_cast<std::uint32_t>(params.size() + 1));
    auto put_tensor = [&](const std::string& name, const std::vector<int>& shape, auto&& values) {
        binio::put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        binio::put_u32(out, static_cast<std::uint32_t>(shape.size()));
        for (int d : shape) binio::put_u32(out, static_cast<std::uint32_t>(d));
        for (float v : values) binio::put_f32(out, v);
    };
    put_tensor("meta.input_shape", {2},
               std::vector<float>{static_cast<float>(net.in_channels()), static_cast<float>(net.input_size())});
    for (const Param<float>* p : params) {
        put_tensor(p->name, p->value.shape, p->value.data);
    }
    if (!out) {
        throw Error("checkpoint write failed: " + path);
    }
}

QNetwork load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open checkpoint: " + path);
    }
    binio::expect_magic(in, "QNET");
    if (binio::get_u32(in) != kCheckpointVersion) {
        throw Error("checkpoint: unsupported version");
    }
    const std::uint32_t count = binio::get_u32(in);
    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::vector<float> values;
    };
    auto read_entry = [&] {
        Entry e;
        const std::uint32_t len = binio::get_u32(in);
        if (len > 256) throw Error("checkpoint: corrupt tensor name");
        e.name.resize(len);
        in.read(e.name.data(), len);
        const std::uint32_t rank = binio::get_u32(in);
        if (rank > 8) throw Error("checkpoint: corrupt tensor rank");
        std::size_t n = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            e.shape.push_back(static_cast<int>(binio::get_u32(in)));
            n *= static_cast<std::size_t>(e.shape.back());
        }
        if (n > (1u << 26)) throw Error("checkpoint: tensor too large");
        e.values.resize(n);
        for (float& v : e.values) v = binio::get_f32(in);
        return e;
    };
    const Entry meta = read_entry();
    if (meta.name != "meta.input_shape" || meta.values.size() != 2) {
        throw Error("checkpoint: missing input shape");
    }
    QNetwork net(static_cast<int>(meta.values[1]), static_cast<int>(meta.values[0]));
    auto params = net.parameters();
    if (count != params.size() + 1) {
        throw Error("checkpoint: tensor count mismatch");
    }
    for (Param<float>* p : params) {
        Entry e = read_entry();
        if (e.name != p->name || e.shape != p->value.shape) {
            throw Error("checkpoint: unexpected tensor " + e.name);
        }
        p->value.data = std::move(e.values);
    }
    net.zero_grad();
    return net;
}

template class QNetworkT<float>;
template class QNetworkT<double>;
template Tensor<float> observations_to_tensor<float>(std::span<const CorrespondenceMap* const>);
template Tensor<double> observations_to_tensor<double>(std::span<const CorrespondenceMap* const>);

}  // namespace lvs::nn
