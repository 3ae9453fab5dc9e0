#include "ndmls/labels.hpp"

#include <algorithm>
#include <limits>

namespace ndmls {

BBox bbox_from_points(std::span<const Point2> points) {
    if (points.empty()) throw Error(ErrorKind::InvalidInput, "bbox_from_points: no points");
    double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
    double max_x = -min_x, max_y = -min_x;
    for (const auto& p : points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    return {min_x, min_y, max_x - min_x, max_y - min_y};
}

BBox bbox_from_mask(const Raster& mask) {
    if (mask.channels() != 1) throw Error(ErrorKind::InvalidInput, "bbox_from_mask expects a 1-channel mask");
    int min_x = mask.width(), min_y = mask.height(), max_x = -1, max_y = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y) == 0) continue;
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
    }
    if (max_x < 0) throw Error(ErrorKind::EmptyObject, "mask has no foreground pixels");
    return {static_cast<double>(min_x), static_cast<double>(min_y),
            static_cast<double>(max_x - min_x), static_cast<double>(max_y - min_y)};
}

BBox clamp_to_image(const BBox& box, ImageDims dims) {
    const double x0 = std::clamp(box.x, 0.0, dims.w - 1.0);
    const double y0 = std::clamp(box.y, 0.0, dims.h - 1.0);
    const double x1 = std::clamp(box.x + box.w, 0.0, dims.w - 1.0);
    const double y1 = std::clamp(box.y + box.h, 0.0, dims.h - 1.0);
    return {x0, y0, x1 - x0, y1 - y0};
}

Propagated propagate(const LabeledSample& sample, const WarpField& field,
                     const std::string& variant_id) {
    if (!sample.mask) throw Error(ErrorKind::InvalidInput, "propagate: sample has no mask");
    Propagated out;
    out.mask = warp_mask(*sample.mask, field);
    out.image = warp_image(sample.image, field, Sampling::Bilinear, Fill::replicate());
    const BBox box = bbox_from_mask(out.mask);
    out.annotation.class_label = sample.class_label.value_or("object");
    out.annotation.bbox = clamp_to_image(box, out.mask.dims());
    out.annotation.source_variant = variant_id;
    return out;
}

}  // namespace ndmls
