#pragma once

#include <string>

#include "geoforge/constructor.hpp"

namespace geoforge {

struct DiagramStyle {
    double canvas = 480.0;  // px, longer side
    double stroke = 1.6;
    double mark_stroke = 1.2;
    double font_size = 15.0;
    double label_offset = 13.0;  // px from the point
    double mark_size = 9.0;      // right-angle square side, tick length
    double dot_radius = 2.4;
    bool show_right_angle_marks = true;
    bool show_equal_tick_marks = true;
    bool show_point_dots = true;

    // Throws std::invalid_argument on non-positive dimensions.
    void validate() const;
};

std::string render_svg(const Scene& scene, const DiagramStyle& style = {});

}  // namespace geoforge
