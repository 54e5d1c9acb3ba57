#include "lvs/nn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>

#include "lvs/bench/parallel.hpp"
#include "lvs/simd/kernels.hpp"

namespace lvs::nn {

World World::rooms(int count, std::uint64_t base_seed, int clutter, CameraIntrinsics cam, double width,
                   double depth) {
    if (count < 1) {
        throw Error("World::rooms: need at least one scene");
    }
    World w;
    w.cam = cam;
    for (int i = 0; i < count; ++i) {
        RoomSpec spec;
        spec.width = width;
        spec.depth = depth;
        spec.clutter = clutter;
        spec.seed = base_seed + static_cast<std::uint64_t>(i);
        w.scenes.push_back(std::make_shared<const Scene>(generate_scene(spec)));
    }
    return w;
}

std::vector<EpisodeCase> make_suite(const World& world, int count, std::uint64_t seed, int max_steps) {
    if (world.scenes.empty()) {
        throw Error("make_suite: world has no scenes");
    }
    std::mt19937_64 rng(seed);
    std::vector<EpisodeCase> suite;
    suite.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) {
        EpisodeCase c;
        c.scene_index = static_cast<std::size_t>(i) % world.scenes.size();
        c.spec = sample_episode(*world.scenes[c.scene_index], rng, world.cam, world.sampling);
        c.spec.max_steps = max_steps;
        c.spec.noise.rng_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
        suite.push_back(c);
    }
    return suite;
}

Policy greedy_policy(QNetwork& net) {
    auto mutex = std::make_shared<std::mutex>();
    return [&net, mutex](const CorrespondenceMap& obs, std::mt19937_64&) {
        std::lock_guard lock(*mutex);
        return act_greedy(net, obs);
    };
}

Policy random_policy() {
    return [](const CorrespondenceMap&, std::mt19937_64& rng) {
        std::uniform_int_distribution<int> pick(0, kNumActions - 1);
        return pick(rng);
    };
}

EvalResult evaluate(const World& world, const std::vector<EpisodeCase>& suite, const Policy& policy,
                    const EnvConfig& env_cfg, const ObservationOverride& obs, std::uint64_t seed, int jobs) {
    EvalResult res;
    res.episodes = static_cast<int>(suite.size());
    res.outcomes.resize(suite.size());
    parallel_for(suite.size(), jobs, [&](std::size_t i) {
        EpisodeSpec spec = suite[i].spec;
        if (obs.noise) {
            spec.noise = *obs.noise;
            spec.noise.rng_seed = mix_seed(obs.noise->rng_seed, i);
        }
        if (obs.smoothing_kernel) {
            spec.smoothing_kernel = *obs.smoothing_kernel;
        }
        Env env(world.scenes.at(suite[i].scene_index), world.cam, spec, env_cfg);
        std::mt19937_64 rng(mix_seed(seed, i));
        EpisodeOutcome out;
        out.min_d_polar = env.last_info().d_polar;
        while (!env.terminal()) {
            env.step(policy(*env.observation(), rng));
            out.min_d_polar = std::min(out.min_d_polar, env.last_info().d_polar);
        }
        out.success = env.success();
        out.steps = env.steps();
        out.final_d_polar = env.last_info().d_polar;
        res.outcomes[i] = out;
    });
    double steps = 0.0, dp = 0.0;
    for (const EpisodeOutcome& o : res.outcomes) {
        res.successes += o.success ? 1 : 0;
        steps += o.steps;
        dp += o.final_d_polar;
    }
    if (res.episodes > 0) {
        res.mean_steps = steps / res.episodes;
        res.mean_final_d_polar = dp / res.episodes;
    }
    return res;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw Error("train: learning rate must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw Error("train: gamma must be in [0, 1)");
    if (batch < 1 || iterations < 0 || target_sync < 1 || replay_capacity == 0 || learn_start < 1 || max_steps < 1) {
        throw Error("train: invalid sizes");
    }
    if (!(train_noise_sigma_max >= 0.0) || !(train_coverage_min >= 0.0 && train_coverage_min <= 1.0)) {
        throw Error("train: invalid noise randomization");
    }
}

double td_target(const Transition& t, QNetwork& target_net, double gamma) {
    if (t.terminal || gamma == 0.0) {
        return t.reward;
    }
    const auto q = q_values(target_net, *t.next_observation);
    return t.reward + gamma * static_cast<double>(*std::max_element(q.begin(), q.end()));
}

std::vector<float> td_targets(const std::vector<const Transition*>& batch, QNetwork& target_net, double gamma) {
    std::vector<const CorrespondenceMap*> next;
    next.reserve(batch.size());
    for (const Transition* t : batch) next.push_back(t->next_observation.get());
    const Tensor<float> q = target_net.forward(observations_to_tensor<float>(next), Mode::Eval);
    std::vector<float> y(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const float* row = q.ptr() + b * kNumActions;
        const double best = *std::max_element(row, row + kNumActions);
        y[b] = static_cast<float>(batch[b]->terminal ? batch[b]->reward : batch[b]->reward + gamma * best);
    }
    return y;
}

namespace {

constexpr int kStatWarmupPasses = 30;

class EpisodeStream {
public:
    EpisodeStream(const World& world, const TrainConfig& cfg, std::uint64_t seed) : world_(world), cfg_(cfg), rng_(seed) {}

    Env next() {
        std::uniform_int_distribution<std::size_t> pick(0, world_.scenes.size() - 1);
        const std::size_t si = pick(rng_);
        EpisodeSpec spec = sample_episode(*world_.scenes[si], rng_, world_.cam, world_.sampling);
        spec.max_steps = cfg_.max_steps;
        spec.smoothing_kernel = cfg_.smoothing_kernel;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        spec.noise.sigma = cfg_.train_noise_sigma_max * unit(rng_);
        spec.noise.coverage = cfg_.train_coverage_min + (1.0 - cfg_.train_coverage_min) * unit(rng_);
        spec.noise.rng_seed = rng_();
        EnvConfig ec;
        ec.reward = cfg_.reward;
        return Env(world_.scenes[si], world_.cam, spec, ec);
    }

private:
    const World& world_;
    const TrainConfig& cfg_;
    std::mt19937_64 rng_;
};

}  // namespace

TrainResult train(const World& world, const TrainConfig& cfg, std::uint64_t seed, const ProgressFn& progress) {
    cfg.validate();
    if (world.scenes.empty()) {
        throw Error("train: no scenes");
    }
    TrainResult res{QNetwork(world.cam.width), {}, false, 0};
    if (world.cam.width != world.cam.height) {
        throw Error("train: square images required");
    }
    QNetwork& online = res.net;
    online.init(mix_seed(seed, 1));
    if (cfg.iterations == 0) {
        return res;
    }
    QNetwork target(world.cam.width);
    target.copy_from(online);

    std::mt19937_64 rng(mix_seed(seed, 2));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> random_action(0, kNumActions - 1);
    EpisodeStream episodes(world, cfg, mix_seed(seed, 3));
    ReplayMemory replay(cfg.replay_capacity);
    const auto suite = make_suite(world, cfg.eval_episodes, cfg.eval_seed, cfg.max_steps);

    std::vector<std::vector<float>> rms(online.parameters().size());
    for (std::size_t i = 0; i < rms.size(); ++i) {
        rms[i].assign(online.parameters()[i]->value.size(), 0.0f);
    }

    Env env = episodes.next();
    auto env_step = [&](double epsilon) {
        const int a = unit(rng) < epsilon ? random_action(rng) : act_greedy(online, *env.observation());
        replay.push(env.step(a));
        if (env.terminal()) env = episodes.next();
    };
    for (int i = 0; i < cfg.learn_start; ++i) env_step(1.0);

    // Settle the normalization running statistics before the first target copy.
    std::vector<const CorrespondenceMap*> warm(static_cast<std::size_t>(cfg.batch));
    for (int pass = 0; pass < kStatWarmupPasses; ++pass) {
        const auto idx = replay.sample_indices(warm.size(), rng);
        for (std::size_t b = 0; b < warm.size(); ++b) warm[b] = replay[idx[b]].observation.get();
        online.forward(observations_to_tensor<float>(warm), Mode::Train);
    }
    target.copy_from(online);

    const double decay_iters = std::max(1.0, cfg.epsilon_decay_fraction * cfg.iterations);
    double loss_sum = 0.0;
    int loss_count = 0;
    std::vector<const Transition*> batch(static_cast<std::size_t>(cfg.batch));
    std::vector<const CorrespondenceMap*> obs(batch.size());
    std::vector<int> actions(batch.size());

    for (int it = 0; it < cfg.iterations; ++it) {
        const double frac = std::min(1.0, it / decay_iters);
        env_step(cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac);

        const auto idx = replay.sample_indices(batch.size(), rng);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            batch[b] = &replay[idx[b]];
            obs[b] = batch[b]->observation.get();
            actions[b] = batch[b]->action;
        }
        const std::vector<float> y = td_targets(batch, target, cfg.gamma);
        online.zero_grad();
        const double loss = online.loss_and_backward(observations_to_tensor<float>(obs), actions, y);
        if (!std::isfinite(loss)) {
            res.diverged = true;
            res.iterations_run = it + 1;
            return res;
        }
        auto params = online.parameters();
        for (std::size_t p = 0; p < params.size(); ++p) {
            if (!params[p]->trainable) continue;
            simd::rmsprop_update(params[p]->value.ptr(), params[p]->grad.ptr(), rms[p].data(), rms[p].size(),
                                 static_cast<float>(cfg.learning_rate), static_cast<float>(cfg.rms_decay),
                                 static_cast<float>(cfg.rms_eps));
        }
        loss_sum += loss;
        ++loss_count;
        res.iterations_run = it + 1;

        if ((it + 1) % cfg.target_sync == 0) {
            target.copy_from(online);
        }
        if (cfg.eval_every > 0 && ((it + 1) % cfg.eval_every == 0 || it + 1 == cfg.iterations)) {
            const EvalResult ev = evaluate(world, suite, greedy_policy(online));
            CurvePoint pt{it + 1, loss_count ? loss_sum / loss_count : 0.0, ev.success_rate()};
            res.curve.push_back(pt);
            if (progress) progress(pt);
            loss_sum = 0.0;
            loss_count = 0;
        }
    }
    return res;
}

std::string learning_curve_csv(const std::vector<CurvePoint>& curve) {
    std::string out = "iteration,loss,eval_success_rate\n";
    char buf[128];
    for (const CurvePoint& p : curve) {
        std::snprintf(buf, sizeof buf, "%d,%.8f,%.6f\n", p.iteration, p.loss, p.eval_success_rate);
        out += buf;
    }
    return out;
}

}  // namespace lvs::nn
