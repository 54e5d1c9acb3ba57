#include "lvs/metrics.hpp"

#include <algorithm>
#include <string>

namespace lvs {

PolarError polar_error(const Pose2D& current, const Pose2D& goal) {
    const double ex = goal.x - current.x;
    const double ey = goal.y - current.y;
    PolarError e;
    e.rho = std::hypot(ex, ey);
    if (e.rho < kDegenerateRange) {
        e.alpha = 0.0;
        e.beta = normalize_angle(goal.theta - current.theta);
        return e;
    }
    const double bearing = std::atan2(ey, ex);
    e.alpha = normalize_angle(bearing - current.theta);
    e.beta = normalize_angle(goal.theta - bearing);
    return e;
}

double d_polar(const Pose2D& current, const Pose2D& goal, double lambda_alpha, double lambda_beta) {
    const PolarError e = polar_error(current, goal);
    return e.rho + lambda_alpha * std::abs(e.alpha) + lambda_beta * std::abs(e.beta);
}

double d_pose(const Pose2D& current, const Pose2D& goal, double lambda_theta) {
    return position_distance(current, goal) + lambda_theta * angular_distance(goal.theta, current.theta);
}

double distance(const Pose2D& current, const Pose2D& goal, const RewardSpec& spec) {
    switch (spec.metric) {
        case DistanceMetric::Polar:
            return d_polar(current, goal, spec.lambda_alpha, spec.lambda_beta);
        case DistanceMetric::Pose:
            return d_pose(current, goal, spec.lambda_theta);
    }
    throw Error("distance: unknown metric");
}

double reward(double d_prev, double d_t, double d_init, RewardKind kind) {
    if (!(d_init > 0.0)) {
        throw Error("reward: d_init must be positive");
    }
    switch (kind) {
        case RewardKind::DistMinimize:
            return std::max(0.0, std::min(d_prev / d_init, 1.0) - std::min(d_t / d_init, 1.0));
        case RewardKind::Progress:
            return std::max(0.0, (d_init - d_t) / d_init);
    }
    throw Error("reward: unknown kind");
}

bool is_success(const Pose2D& current, const Pose2D& goal, double heading_tolerance) {
    if (position_distance(current, goal) > kSuccessRadius) {
        return false;
    }
    return heading_tolerance <= 0.0 || angular_distance(current.theta, goal.theta) <= heading_tolerance;
}

std::string_view to_string(RewardKind k) { return k == RewardKind::DistMinimize ? "DistMinimize" : "Progress"; }

std::string_view to_string(DistanceMetric m) { return m == DistanceMetric::Polar ? "d_polar" : "d_pose"; }

RewardKind parse_reward_kind(std::string_view s) {
    if (s == "DistMinimize") return RewardKind::DistMinimize;
    if (s == "Progress") return RewardKind::Progress;
    throw Error("unknown reward kind: " + std::string(s));
}

DistanceMetric parse_distance_metric(std::string_view s) {
    if (s == "d_polar" || s == "polar") return DistanceMetric::Polar;
    if (s == "d_pose" || s == "pose") return DistanceMetric::Pose;
    throw Error("unknown distance metric: " + std::string(s));
}

}  // namespace lvs
