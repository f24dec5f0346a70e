#include "pseudolab/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "pseudolab/parallel.hpp"

namespace pseudolab {

void PyramidSpec::validate() const {
  if (levels.empty()) throw DomainError("PyramidSpec: at least one level required");
  if (anchor_scales.empty() || anchor_ratios.empty())
    throw DomainError("PyramidSpec: at least one anchor scale and ratio required");
  for (double s : anchor_scales)
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("PyramidSpec: anchor scales must be positive");
  for (double r : anchor_ratios)
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("PyramidSpec: anchor ratios must be positive");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const PyramidLevelSpec& lv = levels[l];
    if (lv.stride <= 0 || lv.height <= 0 || lv.width <= 0)
      throw DomainError("PyramidSpec: stride and grid sizes must be positive");
    if (l > 0) {
      const PyramidLevelSpec& prev = levels[l - 1];
      if (lv.stride != 2 * prev.stride) throw DomainError("PyramidSpec: strides must double per level");
      if (lv.height != (prev.height + 1) / 2 || lv.width != (prev.width + 1) / 2)
        throw DomainError("PyramidSpec: grid sizes must ceil-halve per level");
    }
  }
}

FeaturePyramid::FeaturePyramid(PyramidSpec spec, int channels)
    : spec_(std::move(spec)), channels_(channels) {
  spec_.validate();
  if (channels_ <= 0) throw DomainError("FeaturePyramid: channels must be positive");
  data_.reserve(spec_.levels.size());
  for (const PyramidLevelSpec& l : spec_.levels)
    data_.emplace_back(static_cast<std::size_t>(channels_) * l.height * l.width, 0.0);
}

void FeaturePyramid::validate() const {
  for (std::size_t l = 0; l < data_.size(); ++l) {
    const PyramidLevelSpec& lv = spec_.levels[l];
    if (data_[l].size() != static_cast<std::size_t>(channels_) * lv.height * lv.width)
      throw DomainError("FeaturePyramid: level data size does not match spec");
    for (double v : data_[l])
      if (!std::isfinite(v)) throw DomainError("FeaturePyramid: non-finite value");
  }
}

OffsetField::OffsetField(const PyramidSpec& spec) {
  spec.validate();
  shape_.reserve(spec.levels.size());
  data_.reserve(spec.levels.size());
  for (const PyramidLevelSpec& l : spec.levels) {
    shape_.emplace_back(l.height, l.width);
    data_.emplace_back(static_cast<std::size_t>(3) * l.height * l.width, 0.0);
  }
}

void OffsetField::validate() const {
  for (const auto& level : data_)
    for (double v : level)
      if (!std::isfinite(v)) throw DomainError("OffsetField: non-finite value");
}

std::vector<Anchor> generate_anchors(const PyramidSpec& spec) {
  spec.validate();
  std::vector<Anchor> anchors;
  for (int l = 0; l < spec.num_levels(); ++l) {
    const PyramidLevelSpec& lv = spec.levels[l];
    for (int row = 0; row < lv.height; ++row) {
      for (int col = 0; col < lv.width; ++col) {
        const double cx = (col + 0.5) * lv.stride;
        const double cy = (row + 0.5) * lv.stride;
        for (double scale : spec.anchor_scales) {
          for (double ratio : spec.anchor_ratios) {
            const double w = lv.stride * scale / std::sqrt(ratio);
            const double h = lv.stride * scale * std::sqrt(ratio);
            anchors.push_back({BBox{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h}, l, row, col});
          }
        }
      }
    }
  }
  return anchors;
}

namespace {

void check_structure(const FeaturePyramid& p, const OffsetField& d) {
  if (d.num_levels() != p.spec().num_levels())
    throw DomainError("offset field level count does not match pyramid");
  for (int l = 0; l < d.num_levels(); ++l) {
    const auto [h, w] = d.level_shape(l);
    if (h != p.spec().levels[l].height || w != p.spec().levels[l].width)
      throw DomainError("offset field shape does not match pyramid level");
  }
}

/// Bilinear sample of one channel plane with border clamping.
double sample_bilinear(const FeaturePyramid& p, int level, int channel, double row, double col) {
  const PyramidLevelSpec& lv = p.spec().levels[level];
  const double r = std::clamp(row, 0.0, static_cast<double>(lv.height - 1));
  const double c = std::clamp(col, 0.0, static_cast<double>(lv.width - 1));
  const int r0 = static_cast<int>(std::floor(r));
  const int c0 = static_cast<int>(std::floor(c));
  const int r1 = std::min(r0 + 1, lv.height - 1);
  const int c1 = std::min(c0 + 1, lv.width - 1);
  const double fr = r - r0;
  const double fc = c - c0;
  return (1.0 - fr) * ((1.0 - fc) * p.at(level, channel, r0, c0) + fc * p.at(level, channel, r0, c1)) +
         fr * ((1.0 - fc) * p.at(level, channel, r1, c0) + fc * p.at(level, channel, r1, c1));
}

}  // namespace

FeaturePyramid resample_inplane(const FeaturePyramid& p, const OffsetField& d) {
  check_structure(p, d);
  FeaturePyramid out(p.spec(), p.channels());
  parallel_for(p.spec().levels.size(), [&](std::size_t l) {
    const int level = static_cast<int>(l);
    const PyramidLevelSpec& lv = p.spec().levels[level];
    for (int i = 0; i < lv.height; ++i) {
      for (int j = 0; j < lv.width; ++j) {
        const double row = i + d.d0(level, i, j);
        const double col = j + d.d1(level, i, j);
        for (int c = 0; c < p.channels(); ++c)
          out.at(level, c, i, j) = sample_bilinear(p, level, c, row, col);
      }
    }
  });
  return out;
}

FeaturePyramid resample_scale(const FeaturePyramid& p, const OffsetField& d) {
  check_structure(p, d);
  const int num_levels = p.spec().num_levels();
  FeaturePyramid out(p.spec(), p.channels());
  parallel_for(p.spec().levels.size(), [&](std::size_t l) {
    const int level = static_cast<int>(l);
    const PyramidLevelSpec& lv = p.spec().levels[level];
    for (int i = 0; i < lv.height; ++i) {
      for (int j = 0; j < lv.width; ++j) {
        const double t = std::clamp(level + d.d2(level, i, j), 0.0, static_cast<double>(num_levels - 1));
        const int t0 = static_cast<int>(std::floor(t));
        const int t1 = std::min(t0 + 1, num_levels - 1);
        const double ft = t - t0;
        for (int c = 0; c < p.channels(); ++c) {
          // rescaled coordinates use the exact grid-size ratio so odd sizes
          // from ceil-halving stay aligned
          auto sample_at = [&](int target) {
            const PyramidLevelSpec& tv = p.spec().levels[target];
            const double row = i * static_cast<double>(tv.height) / lv.height;
            const double col = j * static_cast<double>(tv.width) / lv.width;
            return sample_bilinear(p, target, c, row, col);
          };
          const double v0 = sample_at(t0);
          const double v = (t1 == t0 || ft == 0.0) ? v0 : (1.0 - ft) * v0 + ft * sample_at(t1);
          out.at(level, c, i, j) = v;
        }
      }
    }
  });
  return out;
}

FeaturePyramid fam3d(const FeaturePyramid& p, const OffsetField& d) {
  return resample_scale(resample_inplane(p, d), d);
}

}  // namespace pseudolab
