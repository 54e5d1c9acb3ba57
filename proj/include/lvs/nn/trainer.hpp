#pragma once

// Q-learning with replay memory and a target network, plus the episode suites
// used to evaluate policies.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lvs/env.hpp"
#include "lvs/nn/qnetwork.hpp"
#include "lvs/nn/replay.hpp"

namespace lvs::nn {

// Scenes plus the camera and sampling protocol episodes are drawn from.
struct World {
    std::vector<std::shared_ptr<const Scene>> scenes;
    CameraIntrinsics cam;
    SamplingOptions sampling;

    /// `count` rooms of the given size with `clutter` interior walls, seeds base_seed, base_seed+1, ...
    static World rooms(int count, std::uint64_t base_seed, int clutter, CameraIntrinsics cam = {},
                       double width = 8.0, double depth = 8.0);
};

struct EpisodeCase {
    std::size_t scene_index = 0;
    EpisodeSpec spec;
};

/// Deterministic list of episodes; scene i % scenes.size() hosts episode i.
std::vector<EpisodeCase> make_suite(const World& world, int count, std::uint64_t seed, int max_steps = 50);

struct EpisodeOutcome {
    bool success = false;
    int steps = 0;
    double final_d_polar = 0.0;
    double min_d_polar = 0.0;
};

struct EvalResult {
    int episodes = 0;
    int successes = 0;
    double mean_steps = 0.0;
    double mean_final_d_polar = 0.0;
    std::vector<EpisodeOutcome> outcomes;

    double success_rate() const { return episodes ? static_cast<double>(successes) / episodes : 0.0; }
};

// Chooses an action from an observation; the generator is per-episode and seeded from the suite.
using Policy = std::function<int(const CorrespondenceMap&, std::mt19937_64&)>;

Policy greedy_policy(QNetwork& net);
Policy random_policy();

struct ObservationOverride {
    std::optional<NoiseSpec> noise;       // replaces EpisodeSpec::noise (seed is mixed per episode)
    std::optional<int> smoothing_kernel;  // replaces EpisodeSpec::smoothing_kernel
};

/// Runs every episode of the suite in order. `jobs` > 1 runs episodes on worker threads;
/// the policy must then be safe to call concurrently.
EvalResult evaluate(const World& world, const std::vector<EpisodeCase>& suite, const Policy& policy,
                    const EnvConfig& env_cfg = {}, const ObservationOverride& obs = {}, std::uint64_t seed = 0,
                    int jobs = 1);

struct TrainConfig {
    int batch = 32;
    double learning_rate = 3e-4;
    double rms_decay = 0.99;
    double rms_eps = 1e-8;
    int iterations = 20000;
    double gamma = 0.5;
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    double epsilon_decay_fraction = 0.5;  // of `iterations`
    int target_sync = 1000;
    std::size_t replay_capacity = 10000;
    int learn_start = 1000;  // random transitions collected before the first update
    int max_steps = 50;
    int smoothing_kernel = 5;
    RewardSpec reward;
    // Per-episode observation corruption during training: sigma ~ U[0, max], coverage ~ U[min, 1].
    double train_noise_sigma_max = 32.0;
    double train_coverage_min = 0.5;
    int eval_every = 1000;
    int eval_episodes = 50;
    std::uint64_t eval_seed = 0xE7A1;

    void validate() const;
};

struct CurvePoint {
    int iteration = 0;
    double loss = 0.0;
    double eval_success_rate = 0.0;
};

struct TrainResult {
    QNetwork net;
    std::vector<CurvePoint> curve;
    bool diverged = false;
    int iterations_run = 0;
};

/// r if terminal, else r + gamma * max_a target(next)[a].
double td_target(const Transition& t, QNetwork& target_net, double gamma);

/// Batched targets for a replay minibatch.
std::vector<float> td_targets(const std::vector<const Transition*>& batch, QNetwork& target_net, double gamma);

using ProgressFn = std::function<void(const CurvePoint&)>;

/// Deterministic in `seed` for a fixed kernel ISA. Stops early (diverged = true) on a non-finite loss.
TrainResult train(const World& world, const TrainConfig& cfg, std::uint64_t seed, const ProgressFn& progress = {});

/// CSV with header: iteration,loss,eval_success_rate
std::string learning_curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace lvs::nn
