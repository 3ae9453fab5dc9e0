#pragma once

#include <vector>

#include "ndmls/raster.hpp"
#include "ndmls/types.hpp"

namespace ndmls {

struct PixelBox {
    int x = 0;
    int y = 0;
    int width = 0;   ///< pixel extent, max_x - min_x + 1
    int height = 0;
    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// One 8-connected foreground component of a mask.
struct RegionModel {
    std::vector<Pixel> omega;       // raster order
    PixelBox bbox;
    Point2 barycenter;              // filled by barycenter()
    std::vector<Point2> contour;    // filled by trace_contour()

    bool contains(int x, int y) const;
};

struct ContourHandleConfig {
    std::vector<double> ray_angles = {0, 45, 90, 135, 180, 225, 270, 315};
    double xi = 6.0;           ///< angular tolerance, degrees
    double k_l = 0.14;
    double phi0 = 45.0;
    double phi_step = 90.0;
    double dedupe_dist = 1.5;  ///< px

    void validate() const;
    int direction_count() const;
};

/// 8-connected components of nonzero pixels, largest first (ties: first raster pixel).
std::vector<RegionModel> connected_components(const Raster& mask);

/// Gray-value weighted centroid over the region's pixels.
Point2 barycenter(const RegionModel& region, const Raster& mask);

/// Closed outer boundary by Moore-neighbor tracing, clockwise on screen, starting from the
/// first pixel in raster order.
std::vector<Point2> trace_contour(const RegionModel& region);

/// Outermost contour point whose bearing from the barycenter lies within xi of beta.
/// Requires barycenter and contour to be filled. Throws NoIntersection.
Point2 ray_intersection(const RegionModel& region, double beta, double xi);

/// One source per ray angle; near-duplicates merged, missing rays dropped. Needs >= 3.
std::vector<Point2> contour_handles(const RegionModel& region, const ContourHandleConfig& cfg);

/// L = k_l * min(bbox width, bbox height)
double contour_displacement_length(const RegionModel& region, const ContourHandleConfig& cfg);

/// p + L (cos phi_i, sin phi_i), phi_i = phi0 + i * phi_step.
Point2 contour_target(Point2 p, const RegionModel& region, const ContourHandleConfig& cfg, int i);

/// Largest component with barycenter and contour filled. Throws EmptyObject.
RegionModel analyze_largest_region(const Raster& mask);

}  // namespace ndmls
