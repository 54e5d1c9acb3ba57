#include "lvs/geom.hpp"

#include <string>

namespace lvs {

double normalize_angle(double a) {
    if (!std::isfinite(a)) {
        throw Error("normalize_angle: non-finite input");
    }
    double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
    if (r <= -kPi) {
        r += 2.0 * kPi;
    }
    return r;
}

void CameraIntrinsics::validate() const {
    if (!(focal > 0.0)) {
        throw Error("camera: focal must be positive");
    }
    if (width <= 0 || height <= 0) {
        throw Error("camera: image size must be positive");
    }
    if (!(u0 >= 0.0 && u0 < width && v0 >= 0.0 && v0 < height)) {
        throw Error("camera: principal point outside image");
    }
    if (!std::isfinite(cam_height)) {
        throw Error("camera: cam_height must be finite");
    }
}

CameraIntrinsics CameraIntrinsics::square(int size, double focal) {
    CameraIntrinsics cam;
    cam.width = size;
    cam.height = size;
    cam.u0 = size / 2.0;
    cam.v0 = size / 2.0;
    cam.focal = focal;
    return cam;
}

CamPoint world_to_camera(const Vec3& p_world, const Pose2D& robot, const CameraIntrinsics& cam) {
    const double c = std::cos(robot.theta);
    const double s = std::sin(robot.theta);
    const double dx = p_world.x - robot.x;
    const double dy = p_world.y - robot.y;
    const double dz = p_world.z - cam.cam_height;
    // forward = (c, s, 0), right = (s, -c, 0), down = (0, 0, -1)
    return {dx * s - dy * c, -dz, dx * c + dy * s};
}

Vec3 camera_to_world(const CamPoint& p, const Pose2D& robot, const CameraIntrinsics& cam) {
    const double c = std::cos(robot.theta);
    const double s = std::sin(robot.theta);
    return {robot.x + p.X * s + p.Z * c, robot.y - p.X * c + p.Z * s, cam.cam_height - p.Y};
}

std::optional<Pixel> project(const CamPoint& p, const CameraIntrinsics& cam) {
    if (!(p.Z > 0.0)) {
        return std::nullopt;
    }
    const Pixel px{cam.u0 + cam.focal * p.X / p.Z, cam.v0 + cam.focal * p.Y / p.Z};
    if (px.u >= 0.0 && px.u < cam.width && px.v >= 0.0 && px.v < cam.height) {
        return px;
    }
    return std::nullopt;
}

CamPoint back_project(const Pixel& px, double Z, const CameraIntrinsics& cam) {
    return {(px.u - cam.u0) * Z / cam.focal, (px.v - cam.v0) * Z / cam.focal, Z};
}

Vec3 ray_direction(const Pixel& px, const Pose2D& robot, const CameraIntrinsics& cam) {
    const CamPoint d = back_project(px, 1.0, cam);
    const Vec3 o = camera_origin(robot, cam);
    const Vec3 w = camera_to_world(d, robot, cam);
    return {w.x - o.x, w.y - o.y, w.z - o.z};
}

}  // namespace lvs
