#include "lvs/env.hpp"

#include <cstdio>

namespace lvs {

Pose2D apply_action(const Pose2D& pose, int action) {
    if (action < 0 || action >= ActionSpace::kCount) {
        throw Error("apply_action: action index out of range");
    }
    const double theta = normalize_angle(pose.theta + ActionSpace::kDeltas[static_cast<std::size_t>(action)]);
    return {pose.x + ActionSpace::kStepLength * std::cos(theta), pose.y + ActionSpace::kStepLength * std::sin(theta),
            theta};
}

EpisodeSpec sample_episode(const Scene& scene, std::mt19937_64& rng, const CameraIntrinsics& cam,
                           const SamplingOptions& opt) {
    const auto [lo, hi] = scene.bounds();
    std::uniform_real_distribution<double> ux(lo.x, hi.x);
    std::uniform_real_distribution<double> uy(lo.y, hi.y);
    std::uniform_real_distribution<double> uth(-kPi, kPi);
    std::uniform_real_distribution<double> udist(opt.min_distance, opt.max_distance);
    std::uniform_real_distribution<double> ubear(-opt.max_bearing, opt.max_bearing);
    std::uniform_real_distribution<double> uhead(-opt.max_heading, opt.max_heading);
    const double keep_out = opt.robot_radius + opt.clearance;

    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        const Pose2D start{ux(rng), uy(rng), uth(rng)};
        const double dist = udist(rng);
        const double bearing = start.theta + ubear(rng);
        const Pose2D goal{start.x + dist * std::cos(bearing), start.y + dist * std::sin(bearing),
                          start.theta + uhead(rng)};
        if (!scene.is_free(start.x, start.y, keep_out) || !scene.is_free(goal.x, goal.y, keep_out)) {
            continue;
        }
        if (opt.require_clear_path && !scene.segment_clear({start.x, start.y}, {goal.x, goal.y}, opt.robot_radius)) {
            continue;
        }
        if (overlap_count(correspondence_map(scene, start, goal, cam)) < opt.min_overlap) {
            continue;
        }
        EpisodeSpec spec;
        spec.scene_seed = scene.rng_seed;
        spec.start = start;
        spec.goal = goal;
        return spec;
    }
    throw SamplingExhausted("sample_episode: no valid start/goal pair after " + std::to_string(opt.max_attempts) +
                            " attempts");
}

Env::Env(std::shared_ptr<const Scene> scene, CameraIntrinsics cam, EpisodeSpec spec, EnvConfig cfg)
    : scene_(std::move(scene)), cam_(cam), spec_(spec), cfg_(cfg), pose_(spec.start) {
    if (!scene_) {
        throw Error("Env: null scene");
    }
    d_init_ = distance(pose_, spec_.goal, cfg_.reward);
    d_prev_ = d_init_;
    obs_ = observe(info_.valid_count);
    info_.pose = pose_;
    info_.distance = d_init_;
    info_.d_polar = d_polar(pose_, spec_.goal);
    success_ = position_distance(pose_, spec_.goal) <= spec_.success_threshold;
    info_.success = success_;
    terminal_ = success_ || d_init_ <= 0.0;
}

std::shared_ptr<const CorrespondenceMap> Env::observe(std::size_t& raw_valid) const {
    CorrespondenceMap m = correspondence_map(*scene_, pose_, spec_.goal, cam_, cfg_.correspondence);
    raw_valid = overlap_count(m);
    NoiseSpec n = spec_.noise;
    if (n.sigma > 0.0 || n.coverage < 1.0) {
        n.rng_seed += static_cast<std::uint64_t>(steps_) * 0x9E3779B97F4A7C15ull;
        m = inject_noise(m, n);
    }
    return std::make_shared<const CorrespondenceMap>(smooth_map(m, spec_.smoothing_kernel));
}

Transition Env::step(int action) {
    if (terminal_) {
        throw Error("Env::step: episode already terminal");
    }
    Transition tr;
    tr.observation = obs_;
    tr.action = action;

    const Pose2D next = apply_action(pose_, action);
    info_.blocked = !scene_->segment_clear({pose_.x, pose_.y}, {next.x, next.y}, cfg_.robot_radius);
    if (!info_.blocked) {
        pose_ = next;
    }
    ++steps_;

    const double d = distance(pose_, spec_.goal, cfg_.reward);
    tr.reward = reward(d_prev_, d, d_init_, cfg_.reward.kind);
    d_prev_ = d;

    obs_ = observe(info_.valid_count);
    tr.next_observation = obs_;

    info_.pose = pose_;
    info_.distance = d;
    info_.d_polar = d_polar(pose_, spec_.goal);
    success_ = position_distance(pose_, spec_.goal) <= spec_.success_threshold;
    info_.success = success_;
    const bool lost = cfg_.terminate_on_overlap_loss && info_.valid_count < cfg_.min_overlap;
    terminal_ = success_ || steps_ >= spec_.max_steps || lost;
    tr.terminal = terminal_;
    return tr;
}

std::string episode_log_line(int step, const StepInfo& info, int action, double reward) {
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "{\"step\":%d,\"x\":%.6f,\"y\":%.6f,\"theta\":%.6f,\"action\":%d,\"reward\":%.6f,"
                  "\"d_polar\":%.6f,\"valid_count\":%zu}",
                  step, info.pose.x, info.pose.y, info.pose.theta, action, reward, info.d_polar, info.valid_count);
    return buf;
}

}  // namespace lvs
