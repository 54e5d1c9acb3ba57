#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvs/geom.hpp"
#include "lvs/scene.hpp"

namespace lvs {

// Camera-frame Z of the first surface hit per pixel; max_range where nothing was hit.
struct DepthImage {
    int width = 0;
    int height = 0;
    double max_range = 20.0;
    std::vector<double> values;

    double at(int col, int row) const { return values[static_cast<std::size_t>(row) * width + col]; }
    bool hit(int col, int row) const { return at(col, row) < max_range; }
};

/// Per-pixel first-hit ray casting. Throws lvs::Error if the pose is outside free space.
DepthImage render_depth(const Scene& scene, const Pose2D& pose, const CameraIntrinsics& cam);

// Per-pixel offset from the current view to the matching pixel of the goal view.
// Invalid entries hold dx = dy = 0.
struct CorrespondenceMap {
    int width = 0;
    int height = 0;
    std::vector<double> dx;
    std::vector<double> dy;
    std::vector<std::uint8_t> valid;

    CorrespondenceMap() = default;
    CorrespondenceMap(int w, int h)
        : width(w), height(h), dx(static_cast<std::size_t>(w) * h, 0.0), dy(dx.size(), 0.0), valid(dx.size(), 0) {}

    std::size_t size() const { return dx.size(); }
    std::size_t index(int col, int row) const { return static_cast<std::size_t>(row) * width + col; }

    bool operator==(const CorrespondenceMap&) const = default;
};

struct CorrespondenceOptions {
    double occlusion_eps = 0.01;  // meters
};

/// Dense ground-truth correspondences from `current` to `goal` using rendered depth.
CorrespondenceMap correspondence_map(const Scene& scene, const Pose2D& current, const Pose2D& goal,
                                     const CameraIntrinsics& cam, const CorrespondenceOptions& opt = {});

/// Same as above with a precomputed depth render of the current view.
CorrespondenceMap correspondence_map(const Scene& scene, const DepthImage& current_depth, const Pose2D& current,
                                     const Pose2D& goal, const CameraIntrinsics& cam,
                                     const CorrespondenceOptions& opt = {});

/// Box average over valid neighbours only. A pixel becomes valid if its window holds any valid pixel.
CorrespondenceMap smooth_map(const CorrespondenceMap& m, int kernel);

struct NoiseSpec {
    double sigma = 0.0;     // pixels
    double coverage = 1.0;  // keep probability
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// Gaussian offset noise on every valid pixel, then Bernoulli(coverage) dropout.
CorrespondenceMap inject_noise(const CorrespondenceMap& m, const NoiseSpec& n);

std::size_t overlap_count(const CorrespondenceMap& m);

/// Binary dump: "CORR", u32 width, u32 height, f32 dx plane, f32 dy plane, u8 valid plane (little-endian).
void write_correspondence(const CorrespondenceMap& m, const std::string& path);
CorrespondenceMap read_correspondence(const std::string& path);

}  // namespace lvs
