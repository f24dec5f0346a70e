#include "pseudolab/geom.hpp"

#include <algorithm>
#include <cmath>

namespace pseudolab {

bool bbox_is_valid(const BBox& b) {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) && std::isfinite(b.y2) &&
         b.x1 <= b.x2 && b.y1 <= b.y2;
}

void validate_bbox(const BBox& b) {
  if (!bbox_is_valid(b)) throw DomainError("invalid bbox: requires finite coordinates with x1<=x2, y1<=y2");
}

double area(const BBox& b) { return (b.x2 - b.x1) * (b.y2 - b.y1); }

static double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double giou(const BBox& a, const BBox& b) {
  if (area(a) == 0.0 && area(b) == 0.0) throw DomainError("giou: both boxes degenerate");
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  const double hull = (std::max(a.x2, b.x2) - std::min(a.x1, b.x1)) *
                      (std::max(a.y2, b.y2) - std::min(a.y1, b.y1));
  const double overlap = uni > 0.0 ? inter / uni : 0.0;
  return overlap - (hull - uni) / hull;
}

double center_distance(const BBox& a, const BBox& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

BBox perturb_with(const BBox& b, double rho, Rng& rng) {
  const double w = b.width();
  const double h = b.height();
  BBox out;
  out.x1 = b.x1 + rng.normal(0.0, rho) * w;
  out.y1 = b.y1 + rng.normal(0.0, rho) * h;
  out.x2 = b.x2 + rng.normal(0.0, rho) * w;
  out.y2 = b.y2 + rng.normal(0.0, rho) * h;
  if (out.x1 > out.x2) std::swap(out.x1, out.x2);
  if (out.y1 > out.y2) std::swap(out.y1, out.y2);
  return out;
}

BBox perturb(const BBox& b, NoiseModel& noise) { return perturb_with(b, noise.rho, noise.rng); }

}  // namespace pseudolab
