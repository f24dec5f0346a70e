#pragma once

#include <cstdint>

#include "pseudolab/errors.hpp"
#include "pseudolab/rng.hpp"

namespace pseudolab {

/// Axis-aligned box in continuous image coordinates, corners (x1,y1)-(x2,y2).
/// Valid boxes satisfy x1 <= x2, y1 <= y2 with all coordinates finite;
/// zero-area boxes are allowed, inverted ones are not.
struct BBox {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
};

bool bbox_is_valid(const BBox& b);

/// Throws DomainError when the box breaks the type invariant.
void validate_bbox(const BBox& b);

double area(const BBox& b);

/// Intersection over union in [0, 1]. Zero-area union (both boxes degenerate)
/// is defined as overlap 0 so downstream assigners treat such boxes as unmatched.
double iou(const BBox& a, const BBox& b);

/// Generalized IoU in (-1, 1]: IoU minus the normalized empty area of the
/// smallest enclosing box. Throws DomainError when both boxes are degenerate.
double giou(const BBox& a, const BBox& b);

/// Euclidean distance between box centers.
double center_distance(const BBox& a, const BBox& b);

/// Coordinate-noise model: each corner coordinate is shifted by an independent
/// N(0, rho^2) draw scaled by the box extent on that axis. Owns its stream;
/// clone per thread rather than sharing.
struct NoiseModel {
  double rho;
  Rng rng;

  NoiseModel(double rho_, std::uint64_t seed) : rho(rho_), rng(seed) {
    if (!(rho_ >= 0.0) || !std::isfinite(rho_)) throw DomainError("NoiseModel: rho must be finite and >= 0");
  }
};

/// Draws noise for (x1, y1, x2, y2) in that fixed order and repairs an inverted
/// axis by swapping the coordinate pair, preserving the drawn noise magnitude.
BBox perturb(const BBox& b, NoiseModel& noise);

/// Same draw sequence as perturb() but on a caller-provided stream; lets a
/// simulation interleave box noise with other draws on one per-image stream.
BBox perturb_with(const BBox& b, double rho, Rng& rng);

}  // namespace pseudolab
