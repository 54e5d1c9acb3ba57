#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "gradcheck.hpp"
#include "lvs/bench/parallel.hpp"
#include "lvs/nn/qnetwork.hpp"
#include "lvs/nn/replay.hpp"
#include "lvs/nn/trainer.hpp"
#include "lvs/simd/kernels.hpp"

using namespace lvs;
using namespace lvs::nn;

namespace {

struct IsaGuard {
    simd::Isa prev;
    explicit IsaGuard(simd::Isa isa) : prev(simd::set_active_isa(isa)) {}
    ~IsaGuard() { simd::set_active_isa(prev); }
};

std::vector<float> rand_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

CorrespondenceMap random_map(int size, std::mt19937_64& rng) {
    CorrespondenceMap m(size, size);
    std::normal_distribution<double> n(0.0, 4.0);
    std::bernoulli_distribution keep(0.8);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!keep(rng)) continue;
        m.valid[i] = 1;
        m.dx[i] = n(rng);
        m.dy[i] = n(rng);
    }
    return m;
}

World small_world() { return World::rooms(2, 100, 2, CameraIntrinsics::square(32, 16.0)); }

}  // namespace

TEST_CASE("gradient check, every layer type") {
    const auto stats = oracle::gradient_check_all(2024);
    for (const char* name : {"Conv2d(5x5,s2)", "Conv2d(3x3,s1)", "Conv2d(1x1)", "BatchNorm2d", "ReLU", "MaxPool2",
                             "Linear", "QNetwork"}) {
        CAPTURE(name);
        REQUIRE(stats.count(name) == 1);
        CHECK(stats.at(name).checked > 0);
        CHECK(stats.at(name).max_rel_error < 1e-4);
    }
}

TEST_CASE("AVX2 kernels match the scalar reference") {
    if (simd::detected_isa() != simd::Isa::Avx2) {
        MESSAGE("AVX2 not available; skipping equivalence test");
        return;
    }
    std::mt19937_64 rng(8);
    const int shapes[][3] = {{1, 1, 1}, {7, 13, 5}, {16, 300, 50}, {6, 257, 33}, {33, 17, 600}, {128, 7, 16}};
    for (auto& s : shapes) {
        const int M = s[0], N = s[1], K = s[2];
        CAPTURE(M);
        CAPTURE(N);
        CAPTURE(K);
        for (bool acc : {false, true}) {
            const auto A = rand_vec(static_cast<std::size_t>(M) * K, rng);
            const auto At = rand_vec(static_cast<std::size_t>(K) * M, rng);
            const auto B = rand_vec(static_cast<std::size_t>(K) * N, rng);
            const auto Bt = rand_vec(static_cast<std::size_t>(N) * K, rng);
            const auto C0 = rand_vec(static_cast<std::size_t>(M) * N, rng);
            auto run = [&](simd::Isa isa, int which) {
                IsaGuard g(isa);
                std::vector<float> C = C0;
                if (which == 0) simd::gemm_nn(M, N, K, A.data(), K, B.data(), N, C.data(), N, acc);
                if (which == 1) simd::gemm_tn(M, N, K, At.data(), M, B.data(), N, C.data(), N, acc);
                if (which == 2) simd::gemm_nt(M, N, K, A.data(), K, Bt.data(), K, C.data(), N, acc);
                return C;
            };
            for (int which = 0; which < 3; ++which) {
                const auto ref = run(simd::Isa::Scalar, which);
                const auto vec = run(simd::Isa::Avx2, which);
                double worst = 0.0;
                for (std::size_t i = 0; i < ref.size(); ++i) {
                    worst = std::max(worst, std::abs(double(ref[i]) - vec[i]) / (1.0 + std::abs(double(ref[i]))));
                }
                CHECK(worst < 1e-5 * std::sqrt(double(K)));
            }
        }
    }
    // RMSprop update.
    for (std::size_t n : {1u, 8u, 37u, 1000u}) {
        auto w1 = rand_vec(n, rng), g = rand_vec(n, rng), v1 = rand_vec(n, rng);
        for (auto& x : v1) x = std::abs(x);
        auto w2 = w1, v2 = v1;
        {
            IsaGuard s(simd::Isa::Scalar);
            simd::rmsprop_update(w1.data(), g.data(), v1.data(), n, 1e-3f, 0.99f, 1e-8f);
        }
        {
            IsaGuard s(simd::Isa::Avx2);
            simd::rmsprop_update(w2.data(), g.data(), v2.data(), n, 1e-3f, 0.99f, 1e-8f);
        }
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(w1[i] == doctest::Approx(w2[i]).epsilon(1e-6));
            CHECK(v1[i] == doctest::Approx(v2[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("network forward: shape, zero head, determinism") {
    QNetwork net(64);
    net.init(5);
    CHECK(net.feature_length() == 16);
    std::mt19937_64 rng(1);
    const CorrespondenceMap m = random_map(64, rng);
    const CorrespondenceMap* maps[] = {&m};
    const Tensor<float> x = observations_to_tensor<float>(maps);
    const Tensor<float> q1 = net.forward(x, Mode::Eval);
    CHECK(q1.shape == std::vector<int>{1, kNumActions});
    const Tensor<float> q2 = net.forward(x, Mode::Eval);
    CHECK(q1.data == q2.data);

    for (Param<float>* p : net.parameters()) {
        if (p->name.rfind("fc.", 0) == 0) p->value.fill(0.0f);
    }
    const CorrespondenceMap zero(64, 64);
    const CorrespondenceMap* zm[] = {&zero};
    for (float v : net.forward(observations_to_tensor<float>(zm), Mode::Eval).data) CHECK(v == 0.0f);

    QNetwork other(64);
    CHECK_THROWS_AS(other.forward(Tensor<float>({1, 2, 32, 32}), Mode::Eval), Error);
}

TEST_CASE("loss gradient: zero loss and single-action head") {
    QNetworkT<double> net(16);
    net.init(3);
    std::mt19937_64 rng(4);
    const auto x = oracle::random_tensor({2, 2, 16, 16}, rng);
    const Tensor<double> q = net.forward(x, Mode::Train);
    const int actions[] = {2, 5};
    const double targets[] = {q[2], q[kNumActions + 5]};
    net.zero_grad();
    CHECK(net.loss_and_backward(x, actions, targets) == 0.0);
    for (Param<double>* p : net.parameters()) {
        if (!p->trainable) continue;
        for (double g : p->grad.data) CHECK(g == 0.0);
    }
    // Only the selected action rows of the head receive gradient.
    const double off[] = {targets[0] + 0.5, targets[1] - 0.5};
    net.zero_grad();
    net.loss_and_backward(x, actions, off);
    for (Param<double>* p : net.parameters()) {
        if (p->name == "fc.bias") {
            for (int a = 0; a < kNumActions; ++a) {
                if (a == 2 || a == 5) CHECK(p->grad[a] != 0.0);
                else CHECK(p->grad[a] == 0.0);
            }
        }
    }
}

TEST_CASE("argmax_action") {
    const float a[] = {0, 0, 0, 1, 0, 0, 0};
    CHECK(argmax_action(std::span<const float>(a)) == 3);
    const float b[] = {2, 2, 2, 2, 2, 2, 2};
    CHECK(argmax_action(std::span<const float>(b)) == 0);
    const double c[] = {0, 1, 2, 3, 4, 5, 6};
    CHECK(argmax_action(std::span<const double>(c)) == 6);
    // Invariance under a constant shift.
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (int t = 0; t < 1000; ++t) {
        double q[7], s[7];
        const double shift = 10 * n(rng);
        for (int i = 0; i < 7; ++i) {
            q[i] = n(rng);
            s[i] = q[i] + shift;
        }
        CHECK(argmax_action(std::span<const double>(q)) == argmax_action(std::span<const double>(s)));
    }
}

TEST_CASE("td_target") {
    QNetwork net(32);
    net.init(9);
    std::mt19937_64 rng(3);
    auto obs = std::make_shared<const CorrespondenceMap>(random_map(32, rng));
    Transition t{obs, 1, 0.25, obs, true};
    CHECK(td_target(t, net, 0.99) == 0.25);
    t.terminal = false;
    CHECK(td_target(t, net, 0.0) == 0.25);

    for (Param<float>* p : net.parameters()) {
        if (p->name == "fc.weight") p->value.fill(0.0f);
        if (p->name == "fc.bias") {
            p->value.fill(0.0f);
            p->value[4] = 1.0f;
        }
    }
    t.reward = 0.0;
    CHECK(td_target(t, net, 0.99) == doctest::Approx(0.99).epsilon(1e-7));
    const auto batch = td_targets({&t, &t}, net, 0.99);
    CHECK(batch[0] == doctest::Approx(0.99f));
}

TEST_CASE("checkpoint round trip") {
    QNetwork net(32);
    net.init(11);
    const auto path = std::filesystem::temp_directory_path() / "lvs_ckpt_rt.bin";
    save_checkpoint(net, path.string());
    {
        std::ifstream in(path, std::ios::binary);
        char magic[4];
        in.read(magic, 4);
        CHECK(std::string(magic, 4) == "QNET");
    }
    QNetwork back = load_checkpoint(path.string());
    CHECK(back.input_size() == 32);
    const auto a = net.parameters();
    const auto b = back.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i]->name == b[i]->name);
        CHECK(a[i]->value.data == b[i]->value.data);
    }
    {
        std::ofstream bad(path, std::ios::binary);
        bad << "NOPE";
    }
    CHECK_THROWS_AS(load_checkpoint(path.string()), Error);
    std::filesystem::remove(path);
}

TEST_CASE("replay memory FIFO and uniform sampling") {
    ReplayMemory r(5);
    for (int i = 0; i < 7; ++i) r.push({nullptr, i, 0.0, nullptr, false});
    CHECK(r.size() == 5);
    std::vector<int> held;
    for (std::size_t i = 0; i < r.size(); ++i) held.push_back(r[i].action);
    std::sort(held.begin(), held.end());
    CHECK(held == std::vector<int>{2, 3, 4, 5, 6});

    const std::size_t n = 50;
    ReplayMemory full(n);
    for (std::size_t i = 0; i < n; ++i) full.push({nullptr, static_cast<int>(i), 0.0, nullptr, false});
    std::mt19937_64 rng(17);
    std::vector<int> counts(n, 0);
    const int draws = 100000;
    for (int d = 0; d < draws / 100; ++d)
        for (std::size_t i : full.sample_indices(100, rng)) ++counts[i];
    const double p = 1.0 / n, mean = draws * p, sd = std::sqrt(draws * p * (1 - p));
    for (int c : counts) CHECK(std::abs(c - mean) <= 3.0 * sd + 1e-9);
}

TEST_CASE("train: zero iterations returns the initialized net") {
    const World w = small_world();
    TrainConfig cfg;
    cfg.iterations = 0;
    const TrainResult r = train(w, cfg, 42);
    QNetwork fresh(32);
    fresh.init(mix_seed(42, 1));
    const auto a = r.net.parameters();
    const auto b = fresh.parameters();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value.data == b[i]->value.data);
    CHECK(r.curve.empty());

    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train(w, cfg, 1), Error);
}

TEST_CASE("train is bit-for-bit deterministic") {
    const World w = small_world();
    TrainConfig cfg;
    cfg.iterations = 12;
    cfg.batch = 8;
    cfg.learn_start = 16;
    cfg.target_sync = 5;
    cfg.eval_every = 6;
    cfg.eval_episodes = 2;
    cfg.max_steps = 10;
    cfg.learning_rate = 1e-3;
    const TrainResult a = train(w, cfg, 7);
    const TrainResult b = train(w, cfg, 7);
    CHECK_FALSE(a.diverged);
    CHECK(a.iterations_run == 12);
    REQUIRE(a.curve.size() == 2);
    CHECK(learning_curve_csv(a.curve) == learning_curve_csv(b.curve));
    const auto pa = a.net.parameters();
    const auto pb = b.net.parameters();
    bool changed = false;
    QNetwork init(32);
    init.init(mix_seed(7, 1));
    const auto pi = init.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->value.data == pb[i]->value.data);
        changed = changed || pa[i]->value.data != pi[i]->value.data;
    }
    CHECK(changed);
    CHECK(learning_curve_csv(a.curve).rfind("iteration,loss,eval_success_rate\n", 0) == 0);
}

TEST_CASE("suites and evaluation are paired and deterministic") {
    const World w = small_world();
    const auto s1 = make_suite(w, 6, 99, 8);
    const auto s2 = make_suite(w, 6, 99, 8);
    REQUIRE(s1.size() == 6);
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].scene_index == i % 2);
        CHECK(s1[i].spec.start == s2[i].spec.start);
        CHECK(s1[i].spec.goal == s2[i].spec.goal);
    }
    const EvalResult r1 = evaluate(w, s1, random_policy(), {}, {}, 5, 1);
    const EvalResult r2 = evaluate(w, s1, random_policy(), {}, {}, 5, 3);
    CHECK(r1.episodes == 6);
    CHECK(r1.successes == r2.successes);
    for (std::size_t i = 0; i < r1.outcomes.size(); ++i) {
        CHECK(r1.outcomes[i].steps == r2.outcomes[i].steps);
        CHECK(r1.outcomes[i].final_d_polar == r2.outcomes[i].final_d_polar);
    }
}
