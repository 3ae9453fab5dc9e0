#pragma once

#include <optional>
#include <span>
#include <string>

#include "ndmls/raster.hpp"
#include "ndmls/warp.hpp"

namespace ndmls {

/// Axis-aligned box: (x, y) is the minimum corner, w and h the horizontal and vertical
/// extents (max - min).
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Annotation {
    std::string class_label;
    BBox bbox;
    std::string source_variant;
};

BBox bbox_from_points(std::span<const Point2> points);

/// Tight box over nonzero pixels. Throws EmptyObject for an all-background mask.
BBox bbox_from_mask(const Raster& mask);

BBox clamp_to_image(const BBox& box, ImageDims dims);

struct LabeledSample {
    std::string image_path;
    Raster image;
    std::optional<std::string> class_label;
    std::optional<Raster> mask;
};

struct Propagated {
    Raster image;
    Raster mask;
    Annotation annotation;
};

/// Warps image (bilinear, edge replicate) and mask (nearest, 0 fill) with the same field and
/// derives the box from the warped mask. Throws EmptyObject when the object leaves the frame.
Propagated propagate(const LabeledSample& sample, const WarpField& field,
                     const std::string& variant_id = {});

}  // namespace ndmls
