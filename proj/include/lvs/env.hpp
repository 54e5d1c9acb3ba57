#pragma once

// Discrete-action episode MDP for the learned controller.

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "lvs/correspondence.hpp"
#include "lvs/geom.hpp"
#include "lvs/metrics.hpp"
#include "lvs/scene.hpp"

namespace lvs {

class SamplingExhausted : public Error {
public:
    using Error::Error;
};

struct ActionSpace {
    static constexpr int kCount = 7;
    static constexpr int kStraight = 3;
    static constexpr double kStepLength = 0.1;  // meters
    static constexpr std::array<double, kCount> kDeltas = {-kPi / 4, -kPi / 6, -kPi / 15, 0.0,
                                                           kPi / 15, kPi / 6,  kPi / 4};
};

/// Rotate by the action's heading offset, then move kStepLength forward.
Pose2D apply_action(const Pose2D& pose, int action);

struct EpisodeSpec {
    std::uint64_t scene_seed = 0;
    Pose2D start;
    Pose2D goal;
    int max_steps = 50;
    NoiseSpec noise;
    int smoothing_kernel = 5;
    double success_threshold = kSuccessRadius;
};

struct SamplingOptions {
    double min_distance = 0.5;
    double max_distance = 4.0;
    double max_bearing = kPi / 4;   // goal direction relative to start heading
    double max_heading = kPi / 4;   // goal heading relative to start heading
    double robot_radius = 0.15;
    double clearance = 0.2;         // beyond robot_radius
    std::size_t min_overlap = 256;
    bool require_clear_path = true;
    int max_attempts = 10000;
};

/// Rejection-samples a start/goal pair satisfying every SamplingOptions constraint.
/// Throws SamplingExhausted after max_attempts rejections.
EpisodeSpec sample_episode(const Scene& scene, std::mt19937_64& rng, const CameraIntrinsics& cam,
                           const SamplingOptions& opt = {});

struct EnvConfig {
    RewardSpec reward;
    double robot_radius = 0.15;
    bool terminate_on_overlap_loss = false;
    std::size_t min_overlap = 256;
    CorrespondenceOptions correspondence;
};

struct Transition {
    std::shared_ptr<const CorrespondenceMap> observation;
    int action = 0;
    double reward = 0.0;
    std::shared_ptr<const CorrespondenceMap> next_observation;
    bool terminal = false;
};

struct StepInfo {
    Pose2D pose;
    bool blocked = false;
    bool success = false;
    double distance = 0.0;  // under the configured metric
    double d_polar = 0.0;
    std::size_t valid_count = 0;  // overlap of the raw (pre-noise) map
};

class Env {
public:
    Env(std::shared_ptr<const Scene> scene, CameraIntrinsics cam, EpisodeSpec spec, EnvConfig cfg = {});

    const std::shared_ptr<const CorrespondenceMap>& observation() const { return obs_; }
    const Pose2D& pose() const { return pose_; }
    const EpisodeSpec& spec() const { return spec_; }
    int steps() const { return steps_; }
    bool terminal() const { return terminal_; }
    bool success() const { return success_; }
    const StepInfo& last_info() const { return info_; }
    double d_init() const { return d_init_; }

    /// Throws lvs::Error when called on a terminal episode or with an invalid action.
    Transition step(int action);

private:
    std::shared_ptr<const CorrespondenceMap> observe(std::size_t& raw_valid) const;

    std::shared_ptr<const Scene> scene_;
    CameraIntrinsics cam_;
    EpisodeSpec spec_;
    EnvConfig cfg_;
    Pose2D pose_;
    int steps_ = 0;
    double d_init_ = 0.0;
    double d_prev_ = 0.0;
    bool terminal_ = false;
    bool success_ = false;
    StepInfo info_;
    std::shared_ptr<const CorrespondenceMap> obs_;
};

/// One JSON object per line: step, x, y, theta, action, reward, d_polar, valid_count.
std::string episode_log_line(int step, const StepInfo& info, int action, double reward);

}  // namespace lvs
