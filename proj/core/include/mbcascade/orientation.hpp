#pragma once

#include "mbcascade/morse_bott_data.hpp"

#include <vector>

namespace mbcascade {

// Oriented unstable direction of a total-index-1 generator (orientation tag applied).
// Circle points use the circle tangent (normally stable circles) or the in-surface
// normal (normally unstable circles); isolated saddles use the Hessian eigenvector.
Vec3 unstable_direction(const MorseBottScenario& sc, int q);

// Sign of an isolated flow line from q to p (total index drop one), given as a
// polyline from q to p. The oriented frame of W^u(q) is carried along the polyline by
// projection onto successive tangent planes and compared at p with
// (incoming direction, oriented unstable direction of p).
int flow_line_sign(const MorseBottScenario& sc, int q, int p, const std::vector<Vec3>& polyline);

}  // namespace mbcascade
