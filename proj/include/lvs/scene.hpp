#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lvs/geom.hpp"

namespace lvs {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

// Vertical rectangular patch standing on the segment a-b, spanning [z_min, z_max].
struct Wall {
    Vec2 a;
    Vec2 b;
    double z_min = 0.0;
    double z_max = 2.5;
    int texture_id = 0;

    double length() const { return std::hypot(b.x - a.x, b.y - a.y); }
    bool operator==(const Wall&) const = default;
};

struct RoomSpec {
    double width = 8.0;  // along world x
    double depth = 8.0;  // along world y
    int clutter = 0;
    std::uint64_t seed = 1;
    double wall_height = 2.5;
};

class Scene {
public:
    std::vector<Wall> walls;
    bool floor = true;
    bool ceiling = true;
    double ceiling_height = 2.5;
    double max_range = 20.0;
    std::uint64_t rng_seed = 0;

    /// Throws lvs::Error if a wall is degenerate or no walls exist.
    void validate() const;

    /// Axis-aligned bounds of all wall endpoints: {min, max}.
    std::pair<Vec2, Vec2> bounds() const;

    /// First intersection of origin + t*dir for t in (0, t_max]; returns t.
    std::optional<double> raycast(const Vec3& origin, const Vec3& dir, double t_max) const;

    /// Point inside the bounds and at least `clearance` from every wall.
    bool is_free(double x, double y, double clearance = 0.0) const;

    /// Segment p-q keeps more than `radius` from every wall.
    bool segment_clear(Vec2 p, Vec2 q, double radius) const;

    bool operator==(const Scene&) const = default;
};

/// Rectangular room [0,width]x[0,depth] with `clutter` interior wall segments; deterministic in seed.
Scene generate_scene(const RoomSpec& spec);

void to_json(nlohmann::json& j, const Scene& s);
void from_json(const nlohmann::json& j, Scene& s);

Scene load_scene(const std::string& path);
void save_scene(const Scene& s, const std::string& path);

/// Shortest distance between segments p0-p1 and q0-q1.
double segment_distance(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1);

}  // namespace lvs
