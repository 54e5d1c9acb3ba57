#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace lvs {

inline constexpr double kPi = std::numbers::pi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wraps an angle into (-pi, pi]. Throws on non-finite input.
double normalize_angle(double a);

/// Absolute angular distance on the circle, in [0, pi].
inline double angular_distance(double a, double b) { return std::abs(normalize_angle(a - b)); }

// Robot pose on the ground plane. theta is the heading from world +x, CCW positive.
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose2D() = default;
    Pose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

    bool operator==(const Pose2D&) const = default;
};

inline double position_distance(const Pose2D& a, const Pose2D& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct CameraIntrinsics {
    double focal = 32.0;  // pixels
    double u0 = 32.0;
    double v0 = 32.0;
    int width = 64;
    int height = 64;
    double cam_height = 0.5;  // meters above the ground

    /// Throws lvs::Error if the intrinsics are inconsistent.
    void validate() const;

    static CameraIntrinsics square(int size, double focal);
};

// Camera frame: X right, Y down, Z forward along the optical axis.
struct CamPoint {
    double X = 0.0;
    double Y = 0.0;
    double Z = 0.0;
};

struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

/// Camera origin in world coordinates for a robot pose.
inline Vec3 camera_origin(const Pose2D& robot, const CameraIntrinsics& cam) { return {robot.x, robot.y, cam.cam_height}; }

CamPoint world_to_camera(const Vec3& p_world, const Pose2D& robot, const CameraIntrinsics& cam);
Vec3 camera_to_world(const CamPoint& p, const Pose2D& robot, const CameraIntrinsics& cam);

/// Pinhole projection. std::nullopt means the point is behind the camera or outside the image.
std::optional<Pixel> project(const CamPoint& p, const CameraIntrinsics& cam);

/// Inverse of project for a known camera-frame depth Z.
CamPoint back_project(const Pixel& px, double Z, const CameraIntrinsics& cam);

/// Center of integer pixel (col, row). Pixel (i, j) spans [i, i+1) x [j, j+1).
inline Pixel pixel_center(int col, int row) { return {col + 0.5, row + 0.5}; }

/// Direction (not normalized) of the ray through an image point, in world coordinates.
Vec3 ray_direction(const Pixel& px, const Pose2D& robot, const CameraIntrinsics& cam);

}  // namespace lvs
