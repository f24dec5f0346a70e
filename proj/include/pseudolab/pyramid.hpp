#pragma once

#include <vector>

#include "pseudolab/geom.hpp"

namespace pseudolab {

struct PyramidLevelSpec {
  int stride = 8;
  int height = 1;
  int width = 1;
};

/// Dyadically scaled pyramid layout: each level doubles the stride and
/// ceil-halves the grid, RetinaNet-style.
struct PyramidSpec {
  std::vector<PyramidLevelSpec> levels;
  std::vector<double> anchor_scales{4.0};
  std::vector<double> anchor_ratios{1.0};

  void validate() const;
  int num_levels() const { return static_cast<int>(levels.size()); }
};

/// Dense per-level feature grids, channels x height x width, channel count
/// shared across levels. Values stored row-major per channel.
class FeaturePyramid {
 public:
  FeaturePyramid(PyramidSpec spec, int channels);

  const PyramidSpec& spec() const { return spec_; }
  int channels() const { return channels_; }

  double at(int level, int channel, int row, int col) const {
    return data_[level][index(level, channel, row, col)];
  }
  double& at(int level, int channel, int row, int col) {
    return data_[level][index(level, channel, row, col)];
  }

  const std::vector<double>& level_data(int level) const { return data_[level]; }
  std::vector<double>& level_data(int level) { return data_[level]; }

  /// Throws DomainError unless shapes match the spec and all values are finite.
  void validate() const;

 private:
  std::size_t index(int level, int channel, int row, int col) const {
    const PyramidLevelSpec& l = spec_.levels[level];
    return (static_cast<std::size_t>(channel) * l.height + row) * l.width + col;
  }

  PyramidSpec spec_;
  int channels_;
  std::vector<std::vector<double>> data_;
};

/// Per-cell resampling offsets, one (d0=row, d1=col, d2=level) triple per
/// spatial cell, shared by every channel.
class OffsetField {
 public:
  explicit OffsetField(const PyramidSpec& spec);

  double d0(int level, int row, int col) const { return plane(level, 0, row, col); }
  double d1(int level, int row, int col) const { return plane(level, 1, row, col); }
  double d2(int level, int row, int col) const { return plane(level, 2, row, col); }
  double& d0(int level, int row, int col) { return plane(level, 0, row, col); }
  double& d1(int level, int row, int col) { return plane(level, 1, row, col); }
  double& d2(int level, int row, int col) { return plane(level, 2, row, col); }

  int num_levels() const { return static_cast<int>(shape_.size()); }
  std::pair<int, int> level_shape(int level) const { return shape_[level]; }

  void validate() const;

 private:
  double plane(int level, int comp, int row, int col) const {
    return data_[level][(static_cast<std::size_t>(comp) * shape_[level].first + row) * shape_[level].second + col];
  }
  double& plane(int level, int comp, int row, int col) {
    return data_[level][(static_cast<std::size_t>(comp) * shape_[level].first + row) * shape_[level].second + col];
  }

  std::vector<std::pair<int, int>> shape_;  // (height, width) per level
  std::vector<std::vector<double>> data_;
};

struct Anchor {
  BBox bbox;
  int level = 0;
  int row = 0;
  int col = 0;
};

/// One anchor per (level, cell, scale, ratio), level-major then row-major then
/// scale then ratio. Anchor size is stride*scale/sqrt(ratio) x stride*scale*sqrt(ratio),
/// centered on the cell.
std::vector<Anchor> generate_anchors(const PyramidSpec& spec);

/// In-plane resample: out(c,i,j,l) = bilinear(P[l][c], i+d0, j+d1), sampling
/// coordinates clamped to the level border.
FeaturePyramid resample_inplane(const FeaturePyramid& p, const OffsetField& d);

/// Cross-scale resample: target level t = clamp(l+d2, 0, L-1); fractional t
/// blends the two adjacent levels, each sampled bilinearly at coordinates
/// rescaled by the exact grid-size ratio.
FeaturePyramid resample_scale(const FeaturePyramid& p, const OffsetField& d);

/// Full alignment: in-plane offset first, then the scale offset on its result.
FeaturePyramid fam3d(const FeaturePyramid& p, const OffsetField& d);

}  // namespace pseudolab
