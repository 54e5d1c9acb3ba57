#pragma once

// Self-contained SVG output: top-down trajectories and sweep line charts.

#include <optional>
#include <string>
#include <vector>

#include "lvs/geom.hpp"
#include "lvs/scene.hpp"

namespace lvs::bench {

struct TrajectorySeries {
    std::string label;
    std::vector<Pose2D> poses;
};

struct TrajectoryPlot {
    std::string title;
    std::vector<TrajectorySeries> series;
    std::optional<Pose2D> start;
    std::optional<Pose2D> goal;
    std::vector<Wall> walls;  // drawn as segments when present
};

struct SweepSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct SweepPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<SweepSeries> series;
};

/// Throws lvs::Error when there is nothing to draw.
std::string render_svg(const TrajectoryPlot& plot);
std::string render_svg(const SweepPlot& plot);

/// Renders and writes; throws lvs::Error on empty input or an unwritable path.
void emit_plot(const TrajectoryPlot& plot, const std::string& path);
void emit_plot(const SweepPlot& plot, const std::string& path);

/// Writes `text` to `path`, throwing lvs::Error on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lvs::bench
