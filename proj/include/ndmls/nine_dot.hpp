#pragma once

#include <cstdint>
#include <vector>

#include "ndmls/types.hpp"

namespace ndmls {

struct NineDotConfig {
    double k_p = 0.23;  ///< placement of the outer rows/columns, fraction of w and h
    double k_l = 0.14;  ///< displacement magnitude relative to the placement margin
    double k_s = 0.25;  ///< angular step as a fraction of a full turn
    double phi0 = 45.0; ///< first displacement direction, degrees

    void validate() const;
};

/// Row-major 3x3 grid: x in {k_p w, w/2, (1-k_p) w}, y likewise with h.
std::vector<Point2> nine_dot_points(ImageDims dims, double k_p);

/// floor(1 / k_s): number of distinct displacement directions.
int direction_count(double k_s);

/// k_l * min(k_p (w - 0.5), k_p (h - 0.5))
double displacement_length(ImageDims dims, double k_p, double k_l);

/// p + L (cos phi_j, sin phi_j), phi_j = phi0 + 360 j k_s degrees (y axis pointing down).
Point2 displaced_target(Point2 p, double length, double phi0, double k_s, int j);

/// Same displacement with an explicit angle, shared by both handle schemes.
Point2 displace(Point2 p, double length, double angle_deg);

struct HandleMove {
    int handle = 0;
    int direction = 0;
    friend bool operator==(const HandleMove&, const HandleMove&) = default;
};

/// Which handles move and in which direction; unlisted handles stay put.
struct MovePattern {
    std::vector<HandleMove> moves;  // ascending handle index
    friend bool operator==(const MovePattern&, const MovePattern&) = default;
};

/// Ordered enumeration of move patterns over `handles` handles and `directions` directions.
///
/// Patterns are grouped by how many handles move (1, 2, ...). Within a level the moved set
/// runs through combinations in lexicographic order, and for each set the direction tuple
/// runs lexicographically. Level m holds C(handles, m) * directions^m patterns.
class PatternSpace {
public:
    PatternSpace(int handles, int directions);

    int handles() const { return handles_; }
    int directions() const { return directions_; }

    std::uint64_t level_size(int level) const;
    /// Sum of all level sizes, (directions + 1)^handles - 1; saturates at UINT64_MAX.
    std::uint64_t total() const;

    /// Pattern at `index` in the enumeration; throws Exhausted past the end.
    MovePattern at(std::uint64_t index) const;

private:
    int handles_;
    int directions_;
};

/// First `count` patterns for the nine-dot scheme under `cfg`.
std::vector<MovePattern> enumerate_variants(const NineDotConfig& cfg, ImageDims dims,
                                            std::uint64_t count);

/// Targets for the nine-dot scheme: sources moved per `pattern`.
std::vector<Point2> nine_dot_targets(const NineDotConfig& cfg, ImageDims dims,
                                     const std::vector<Point2>& sources,
                                     const MovePattern& pattern);

std::uint64_t binomial(int n, int k);

}  // namespace ndmls
