#pragma once

#include <string>
#include <vector>

#include "instboot/replicator.hpp"

namespace instboot {

// Ternary-plot SVG of a drift field with fixed-point markers: one arrow per
// field point (scaled by drift magnitude, capped at one cell spacing),
// filled dots for stable rest points and hollow ones for the rest.
std::string render_simplex_svg(const GradientField& field,
                               const std::vector<FixedPoint>& fixed_points);

}  // namespace instboot
