#include "lvs/correspondence.hpp"

#include <fstream>
#include <random>

#include "lvs/binio.hpp"

namespace lvs {

DepthImage render_depth(const Scene& scene, const Pose2D& pose, const CameraIntrinsics& cam) {
    if (!scene.is_free(pose.x, pose.y)) {
        throw Error("render_depth: pose outside free space");
    }
    DepthImage img;
    img.width = cam.width;
    img.height = cam.height;
    img.max_range = scene.max_range;
    img.values.resize(static_cast<std::size_t>(cam.width) * cam.height);
    const Vec3 origin = camera_origin(pose, cam);
    for (int row = 0; row < cam.height; ++row) {
        for (int col = 0; col < cam.width; ++col) {
            // Ray through the pixel with unit camera-frame Z, so the hit parameter is the depth.
            const Vec3 dir = ray_direction(pixel_center(col, row), pose, cam);
            const auto t = scene.raycast(origin, dir, scene.max_range);
            img.values[static_cast<std::size_t>(row) * cam.width + col] = t ? *t : scene.max_range;
        }
    }
    return img;
}

CorrespondenceMap correspondence_map(const Scene& scene, const Pose2D& current, const Pose2D& goal,
                                     const CameraIntrinsics& cam, const CorrespondenceOptions& opt) {
    return correspondence_map(scene, render_depth(scene, current, cam), current, goal, cam, opt);
}

CorrespondenceMap correspondence_map(const Scene& scene, const DepthImage& depth, const Pose2D& current,
                                     const Pose2D& goal, const CameraIntrinsics& cam,
                                     const CorrespondenceOptions& opt) {
    if (!scene.is_free(goal.x, goal.y)) {
        throw Error("correspondence_map: goal outside free space");
    }
    CorrespondenceMap m(cam.width, cam.height);

    // Relative planar transform from the current camera frame into the goal camera frame.
    const double dth = current.theta - goal.theta;
    const double c = std::cos(dth);
    const double s = std::sin(dth);
    const double tx = current.x - goal.x;
    const double ty = current.y - goal.y;
    const double gc = std::cos(goal.theta);
    const double gs = std::sin(goal.theta);
    const double t_right = tx * gs - ty * gc;
    const double t_fwd = tx * gc + ty * gs;
    const Vec3 goal_origin = camera_origin(goal, cam);

    for (int row = 0; row < cam.height; ++row) {
        for (int col = 0; col < cam.width; ++col) {
            if (!depth.hit(col, row)) {
                continue;
            }
            const Pixel p = pixel_center(col, row);
            const CamPoint pc = back_project(p, depth.at(col, row), cam);
            const CamPoint pg{pc.X * c - pc.Z * s + t_right, pc.Y, pc.X * s + pc.Z * c + t_fwd};
            const auto q = project(pg, cam);
            if (!q) {
                continue;
            }
            // Occlusion test: the goal camera's first hit along the same ray must be this point.
            const CamPoint unit{pg.X / pg.Z, pg.Y / pg.Z, 1.0};
            const Vec3 w = camera_to_world(unit, goal, cam);
            const Vec3 dir{w.x - goal_origin.x, w.y - goal_origin.y, w.z - goal_origin.z};
            const auto t = scene.raycast(goal_origin, dir, scene.max_range);
            if (!t || std::abs(*t - pg.Z) > opt.occlusion_eps) {
                continue;
            }
            const std::size_t i = m.index(col, row);
            m.dx[i] = q->u - p.u;
            m.dy[i] = q->v - p.v;
            m.valid[i] = 1;
        }
    }
    return m;
}

CorrespondenceMap smooth_map(const CorrespondenceMap& m, int kernel) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw Error("smooth_map: kernel must be odd and >= 1");
    }
    if (kernel == 1) {
        return m;
    }
    const int W = m.width;
    const int H = m.height;
    const int r = kernel / 2;
    // Summed-area tables of dx*valid, dy*valid and valid, with a zero border row/column.
    const std::size_t stride = static_cast<std::size_t>(W) + 1;
    std::vector<double> sx(stride * (H + 1), 0.0), sy(sx.size(), 0.0), sn(sx.size(), 0.0);
    for (int row = 0; row < H; ++row) {
        double ax = 0.0, ay = 0.0, an = 0.0;
        for (int col = 0; col < W; ++col) {
            const std::size_t i = m.index(col, row);
            if (m.valid[i]) {
                ax += m.dx[i];
                ay += m.dy[i];
                an += 1.0;
            }
            const std::size_t o = (row + 1) * stride + col + 1;
            sx[o] = sx[o - stride] + ax;
            sy[o] = sy[o - stride] + ay;
            sn[o] = sn[o - stride] + an;
        }
    }
    auto box = [&](const std::vector<double>& t, int c0, int r0, int c1, int r1) {
        return t[r1 * stride + c1] - t[r0 * stride + c1] - t[r1 * stride + c0] + t[r0 * stride + c0];
    };
    CorrespondenceMap out(W, H);
    for (int row = 0; row < H; ++row) {
        const int r0 = std::max(0, row - r);
        const int r1 = std::min(H, row + r + 1);
        for (int col = 0; col < W; ++col) {
            const int c0 = std::max(0, col - r);
            const int c1 = std::min(W, col + r + 1);
            const double n = box(sn, c0, r0, c1, r1);
            if (n < 0.5) {
                continue;
            }
            const std::size_t i = out.index(col, row);
            out.dx[i] = box(sx, c0, r0, c1, r1) / n;
            out.dy[i] = box(sy, c0, r0, c1, r1) / n;
            out.valid[i] = 1;
        }
    }
    return out;
}

void NoiseSpec::validate() const {
    if (!(sigma >= 0.0) || !(coverage >= 0.0 && coverage <= 1.0)) {
        throw Error("noise: need sigma >= 0 and coverage in [0, 1]");
    }
}

CorrespondenceMap inject_noise(const CorrespondenceMap& m, const NoiseSpec& n) {
    n.validate();
    CorrespondenceMap out = m;
    std::mt19937_64 rng(n.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!out.valid[i]) {
            continue;
        }
        out.dx[i] += n.sigma * gauss(rng);
        out.dy[i] += n.sigma * gauss(rng);
        if (!(unit(rng) < n.coverage)) {
            out.dx[i] = 0.0;
            out.dy[i] = 0.0;
            out.valid[i] = 0;
        }
    }
    return out;
}

std::size_t overlap_count(const CorrespondenceMap& m) {
    std::size_t n = 0;
    for (auto v : m.valid) {
        n += v ? 1 : 0;
    }
    return n;
}

void write_correspondence(const CorrespondenceMap& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write correspondence file: " + path);
    }
    out.write("CORR", 4);
    binio::put_u32(out, static_cast<std::uint32_t>(m.width));
    binio::put_u32(out, static_cast<std::uint32_t>(m.height));
    for (double v : m.dx) {
        binio::put_f32(out, static_cast<float>(v));
    }
    for (double v : m.dy) {
        binio::put_f32(out, static_cast<float>(v));
    }
    out.write(reinterpret_cast<const char*>(m.valid.data()), static_cast<std::streamsize>(m.valid.size()));
    if (!out) {
        throw Error("write failed: " + path);
    }
}

CorrespondenceMap read_correspondence(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open correspondence file: " + path);
    }
    binio::expect_magic(in, "CORR");
    const auto w = binio::get_u32(in);
    const auto h = binio::get_u32(in);
    if (w == 0 || h == 0 || w > 1u << 14 || h > 1u << 14) {
        throw Error("correspondence file: bad dimensions");
    }
    CorrespondenceMap m(static_cast<int>(w), static_cast<int>(h));
    for (auto& v : m.dx) {
        v = binio::get_f32(in);
    }
    for (auto& v : m.dy) {
        v = binio::get_f32(in);
    }
    if (!in.read(reinterpret_cast<char*>(m.valid.data()), static_cast<std::streamsize>(m.valid.size()))) {
        throw Error("correspondence file: truncated");
    }
    return m;
}

}  // namespace lvs
