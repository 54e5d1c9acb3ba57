#pragma once

#include <string_view>

#include "lvs/geom.hpp"

namespace lvs {

// Goal-frame pose error: range, bearing error and heading error.
struct PolarError {
    double rho = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

enum class RewardKind { DistMinimize, Progress };
enum class DistanceMetric { Polar, Pose };

struct RewardSpec {
    RewardKind kind = RewardKind::DistMinimize;
    DistanceMetric metric = DistanceMetric::Polar;
    double lambda_alpha = 0.2;
    double lambda_beta = 0.2;
    double lambda_theta = 0.2;  // heading weight of d_pose
};

inline constexpr double kSuccessRadius = 0.2;  // meters

/// Below this range the bearing is undefined: alpha is 0 and beta carries the whole heading error.
inline constexpr double kDegenerateRange = 1e-6;

PolarError polar_error(const Pose2D& current, const Pose2D& goal);

double d_polar(const Pose2D& current, const Pose2D& goal, double lambda_alpha = 0.2, double lambda_beta = 0.2);

double d_pose(const Pose2D& current, const Pose2D& goal, double lambda_theta = 0.2);

/// Distance under the metric selected by `spec`.
double distance(const Pose2D& current, const Pose2D& goal, const RewardSpec& spec);

/// Per-step reward. DistMinimize: clamped decrease of normalized distance.
/// Progress: net normalized progress from the start, floored at 0.
double reward(double d_prev, double d_t, double d_init, RewardKind kind);

/// Position within kSuccessRadius of the goal (inclusive); heading unconstrained unless
/// `heading_tolerance` is positive.
bool is_success(const Pose2D& current, const Pose2D& goal, double heading_tolerance = 0.0);

std::string_view to_string(RewardKind k);
std::string_view to_string(DistanceMetric m);
RewardKind parse_reward_kind(std::string_view s);
DistanceMetric parse_distance_metric(std::string_view s);

}  // namespace lvs
