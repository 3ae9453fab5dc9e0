#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ndmls/mls.hpp"
#include "ndmls/raster.hpp"

namespace ndmls {

/// Backward map from output pixel coordinates to source sample coordinates, stored on a
/// lattice and bilinearly interpolated between vertices.
class WarpField {
public:
    WarpField(const Lattice& lattice, std::vector<Point2> samples);

    static WarpField identity(int width, int height, int spacing = 1);

    int width() const { return lattice_.width; }
    int height() const { return lattice_.height; }
    const Lattice& lattice() const { return lattice_; }
    const std::vector<Point2>& samples() const { return samples_; }
    Point2 sample(int col, int row) const { return samples_[lattice_.index(col, row)]; }

    /// Source coordinate for output pixel (x, y).
    Point2 source_coordinate(int x, int y) const;

    friend bool operator==(const WarpField&, const WarpField&) = default;

private:
    Lattice lattice_;
    std::vector<Point2> samples_;
};

/// Inverts a forward vertex map (lattice vertex -> deformed position) into a backward field.
/// Newton iteration on the bilinear interpolant of the forward displacement; outside the
/// lattice the displacement is held at its boundary value.
WarpField invert_forward_map(const Lattice& lattice, std::span<const Point2> forward);

/// Deformation carrying basis.sources()[i] to targets[i], expressed as a backward field.
WarpField build_warp_field(const PrecomputedBasis& basis, std::span<const Point2> targets);
WarpField build_warp_field(const PrecomputedBasis& basis, const HandleSet& handles);

enum class Sampling { Bilinear, Nearest };

struct Fill {
    enum class Mode { ReplicateEdge, Constant };
    Mode mode = Mode::ReplicateEdge;
    std::uint8_t value = 0;

    static Fill replicate() { return {}; }
    static Fill constant(std::uint8_t v) { return {Mode::Constant, v}; }
};

Raster warp_image(const Raster& src, const WarpField& field, Sampling sampling = Sampling::Bilinear,
                  Fill fill = Fill::replicate());

/// Nearest sampling with background (0) fill; the output value set stays within the input's.
Raster warp_mask(const Raster& mask, const WarpField& field);

/// Round-half-up to 8 bits with saturation.
inline std::uint8_t quantize(double v) {
    const double r = std::floor(v + 0.5);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

}  // namespace ndmls
