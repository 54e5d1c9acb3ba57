#pragma once

// Classical image-based visual servoing for a planar robot.
//
// Velocities are expressed in the camera frame (X right, Y down, Z forward):
// vx is lateral, vz forward and wy the rotation about the downward Y axis, so a
// positive wy turns the robot clockwise seen from above (world yaw rate = -wy).

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lvs/correspondence.hpp"
#include "lvs/geom.hpp"
#include "lvs/scene.hpp"

namespace lvs {

class FeatureStarvation : public Error {
public:
    using Error::Error;
};

class DegenerateJacobian : public Error {
public:
    using Error::Error;
};

struct PixelFeature {
    double u = 0.0;
    double v = 0.0;
    double u_star = 0.0;
    double v_star = 0.0;
    double Z = 0.0;  // 0 until resolved
};

// Stacked 2N x 3 feature Jacobian, columns ordered (vx, vz, wy).
using InteractionMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using InteractionBlock = Eigen::Matrix<double, 2, 3>;

struct RobotTwist {
    double vx = 0.0;
    double vz = 0.0;
    double wy = 0.0;
};

struct VelocityLimits {
    double linear = 0.5;        // m/s, applied to |vx| and |vz|
    double angular = kPi / 2;   // rad/s
};

enum class DepthVariant { GroundTruth, Constant, Noisy, None };

struct DepthPolicy {
    DepthVariant variant = DepthVariant::GroundTruth;
    double value = 4.0;   // Constant depth, meters
    double sigma = 0.5;   // Noisy std-dev, meters
    std::uint64_t seed = 0;

    static DepthPolicy ground_truth() { return {}; }
    static DepthPolicy constant(double z) { return {DepthVariant::Constant, z, 0.0, 0}; }
    static DepthPolicy noisy(double sigma, std::uint64_t seed) { return {DepthVariant::Noisy, 4.0, sigma, seed}; }
    static DepthPolicy none() { return {DepthVariant::None, 4.0, 0.0, 0}; }

    void validate() const;
};

inline constexpr double kNoisyDepthFloor = 0.05;  // meters

/// Up to k valid pixels with the largest offset magnitude, greedily keeping a minimum
/// pairwise separation. Ties are broken by raster order. Throws FeatureStarvation when
/// fewer than two pixels survive.
std::vector<PixelFeature> select_features(const CorrespondenceMap& m, int k, double min_separation);

/// The two interaction rows of one point feature.
InteractionBlock interaction_row(const PixelFeature& f, const CameraIntrinsics& cam);

InteractionMatrix stack_interaction(const std::vector<PixelFeature>& features, const CameraIntrinsics& cam);

struct IbvsSolverOptions {
    double damping = 1e-6;
    double singular_threshold = 1e-8;
    VelocityLimits limits;
};

struct IbvsCommand {
    RobotTwist twist;
    double min_singular = 0.0;
    bool degenerate = false;  // smallest singular value below threshold
};

/// gain * pinv(J) * (f* - f) via damped least squares, scaled into the velocity limits.
/// With holonomic = false the vx column is dropped and vx is returned as 0.
/// Throws DegenerateJacobian only when J is entirely rank-deficient.
IbvsCommand ibvs_twist(const std::vector<PixelFeature>& features, const CameraIntrinsics& cam, double gain,
                       bool holonomic, const IbvsSolverOptions& opt = {});

/// Fills in f.Z at the feature's current pixel according to the depth policy.
PixelFeature resolve_depth(PixelFeature f, const DepthPolicy& policy, const DepthImage& gt, std::mt19937_64& rng);

inline constexpr double kNoDepthForwardSpeed = 0.1;  // m/s

/// Depth-free controller: constant forward speed, yaw from a 1-D least-squares fit of the
/// horizontal errors against the rotation column of the interaction matrix.
RobotTwist nodepth_control(const std::vector<PixelFeature>& features, const CameraIntrinsics& cam, double gain,
                           const VelocityLimits& limits = {});

RobotTwist clamp_twist(const RobotTwist& t, const VelocityLimits& limits);

/// Rigid planar motion under a constant camera twist for dt seconds.
Pose2D integrate_twist(const Pose2D& pose, const RobotTwist& t, double dt);

enum class ServoOutcome { Running, Success, CorrespondenceLost, DegenerateJacobian, MaxSteps };

std::string_view to_string(ServoOutcome o);

struct IbvsConfig {
    double gain = 0.5;
    double dt = 0.2;
    int max_steps = 200;
    int num_features = 4;
    double min_separation = 8.0;  // pixels; width / 8 at 64 px
    std::size_t min_overlap = 256;
    bool holonomic = true;
    double robot_radius = 0.15;
    DepthPolicy depth;
    NoiseSpec feature_noise;  // identity by default; non-identity emulates detected features
    IbvsSolverOptions solver;
    CorrespondenceOptions correspondence;
};

struct TrajectoryRow {
    int step = 0;
    Pose2D pose;
    RobotTwist twist;
    double d_polar = 0.0;
    std::size_t overlap = 0;
    ServoOutcome outcome = ServoOutcome::Running;
};

struct IbvsResult {
    std::vector<TrajectoryRow> rows;
    ServoOutcome outcome = ServoOutcome::Running;
    int steps = 0;
    Pose2D final_pose;
};

IbvsResult ibvs_episode(const Scene& scene, const Pose2D& start, const Pose2D& goal, const CameraIntrinsics& cam,
                        const IbvsConfig& cfg);

/// CSV with header: step,x,y,theta,vx,vz,wy,d_polar,overlap_count,outcome
std::string trajectory_csv(const std::vector<TrajectoryRow>& rows);

}  // namespace lvs
