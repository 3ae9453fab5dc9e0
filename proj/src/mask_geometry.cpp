#include "ndmls/mask_geometry.hpp"

#include "ndmls/nine_dot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace ndmls {

namespace {

// Clockwise 8-neighborhood (y down), starting west.
constexpr std::array<Pixel, 8> kMoore = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

int direction_of(int dx, int dy) {
    for (int i = 0; i < 8; ++i) {
        if (kMoore[static_cast<std::size_t>(i)].x == dx && kMoore[static_cast<std::size_t>(i)].y == dy) return i;
    }
    return -1;
}

double angle_diff_deg(double a, double b) {
    double d = std::fmod(a - b, 360.0);
    if (d < -180.0) d += 360.0;
    if (d > 180.0) d -= 360.0;
    return std::abs(d);
}

// Local occupancy bitmap of one region, with a one-pixel background border.
struct RegionBitmap {
    int x0, y0, w, h;
    std::vector<std::uint8_t> bits;

    explicit RegionBitmap(const RegionModel& r)
        : x0(r.bbox.x - 1), y0(r.bbox.y - 1), w(r.bbox.width + 2), h(r.bbox.height + 2),
          bits(static_cast<std::size_t>(w) * h, 0) {
        for (const auto& p : r.omega) bits[idx(p.x, p.y)] = 1;
    }
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y - y0) * w + (x - x0);
    }
    bool at(int x, int y) const {
        if (x < x0 || y < y0 || x >= x0 + w || y >= y0 + h) return false;
        return bits[idx(x, y)] != 0;
    }
};

}  // namespace

bool RegionModel::contains(int x, int y) const {
    return std::binary_search(omega.begin(), omega.end(), Pixel{x, y},
                              [](const Pixel& a, const Pixel& b) {
                                  return a.y != b.y ? a.y < b.y : a.x < b.x;
                              });
}

void ContourHandleConfig::validate() const {
    if (!(xi > 0.0)) throw Error(ErrorKind::InvalidInput, "xi must be > 0");
    if (!(k_l > 0.0 && k_l < 1.0)) throw Error(ErrorKind::InvalidInput, "contour k_l must lie in (0,1)");
    if (!(phi_step > 0.0 && phi_step <= 360.0)) {
        throw Error(ErrorKind::InvalidInput, "phi_step must lie in (0,360]");
    }
    if (!(dedupe_dist >= 0.0)) throw Error(ErrorKind::InvalidInput, "dedupe_dist must be >= 0");
    if (ray_angles.empty()) throw Error(ErrorKind::InvalidInput, "at least one ray angle is required");
}

int ContourHandleConfig::direction_count() const {
    return static_cast<int>(std::floor(360.0 / phi_step + 1e-9));
}

std::vector<RegionModel> connected_components(const Raster& mask) {
    if (mask.channels() != 1) {
        throw Error(ErrorKind::InvalidInput, "connected_components expects a 1-channel mask");
    }
    const int w = mask.width(), h = mask.height();
    std::vector<std::int32_t> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<RegionModel> regions;
    std::vector<Pixel> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto start = static_cast<std::size_t>(y) * w + x;
            if (mask.at(x, y) == 0 || label[start] >= 0) continue;
            const auto id = static_cast<std::int32_t>(regions.size());
            RegionModel region;
            label[start] = id;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                region.omega.push_back(p);
                for (const auto& d : kMoore) {
                    const int nx = p.x + d.x, ny = p.y + d.y;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const auto ni = static_cast<std::size_t>(ny) * w + nx;
                    if (mask.at(nx, ny) == 0 || label[ni] >= 0) continue;
                    label[ni] = id;
                    stack.push_back({nx, ny});
                }
            }
            std::sort(region.omega.begin(), region.omega.end(), [](const Pixel& a, const Pixel& b) {
                return a.y != b.y ? a.y < b.y : a.x < b.x;
            });
            int min_x = w, min_y = h, max_x = -1, max_y = -1;
            for (const auto& p : region.omega) {
                min_x = std::min(min_x, p.x);
                max_x = std::max(max_x, p.x);
                min_y = std::min(min_y, p.y);
                max_y = std::max(max_y, p.y);
            }
            region.bbox = {min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
            regions.push_back(std::move(region));
        }
    }
    std::stable_sort(regions.begin(), regions.end(), [](const RegionModel& a, const RegionModel& b) {
        return a.omega.size() > b.omega.size();
    });
    return regions;
}

Point2 barycenter(const RegionModel& region, const Raster& mask) {
    if (region.omega.empty()) throw Error(ErrorKind::InvalidInput, "barycenter of an empty region");
    double sum = 0.0, su = 0.0, sv = 0.0;
    for (const auto& p : region.omega) {
        const double f = mask.at(p.x, p.y);
        sum += f;
        su += p.x * f;
        sv += p.y * f;
    }
    if (sum <= 0.0) throw Error(ErrorKind::InvalidInput, "region has zero total gray weight");
    return {su / sum, sv / sum};
}

std::vector<Point2> trace_contour(const RegionModel& region) {
    if (region.omega.empty()) throw Error(ErrorKind::InvalidInput, "contour of an empty region");
    const RegionBitmap bm(region);
    const Pixel start = region.omega.front();
    std::vector<Point2> contour{{static_cast<double>(start.x), static_cast<double>(start.y)}};

    // The start pixel is the topmost-leftmost one, so its west neighbor is background and
    // we arrive "from the west" (backtrack direction 0).
    Pixel cur = start;
    int backtrack = 0;
    int start_backtrack = -1;
    const std::size_t limit = 4 * region.omega.size() + 8;

    for (std::size_t steps = 0; steps < limit; ++steps) {
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (backtrack + k) % 8;
            const auto& n = kMoore[static_cast<std::size_t>(d)];
            if (bm.at(cur.x + n.x, cur.y + n.y)) {
                found = d;
                break;
            }
        }
        if (found < 0) break;  // isolated pixel

        // Backtrack: the background neighbor examined just before `found`, seen from next.
        const auto& prev_dir = kMoore[static_cast<std::size_t>((found + 7) % 8)];
        const Pixel bg{cur.x + prev_dir.x, cur.y + prev_dir.y};
        const Pixel next{cur.x + kMoore[static_cast<std::size_t>(found)].x,
                         cur.y + kMoore[static_cast<std::size_t>(found)].y};
        const int next_backtrack = direction_of(bg.x - next.x, bg.y - next.y);

        if (cur == start) {
            if (start_backtrack < 0) {
                start_backtrack = found;
            } else if (found == start_backtrack) {
                break;  // Jacob's criterion: same exit from the start pixel
            } else {
                contour.push_back({static_cast<double>(cur.x), static_cast<double>(cur.y)});
            }
        }
        cur = next;
        backtrack = next_backtrack;
        if (!(cur == start)) {
            contour.push_back({static_cast<double>(cur.x), static_cast<double>(cur.y)});
        }
    }
    return contour;
}

Point2 ray_intersection(const RegionModel& region, double beta, double xi) {
    if (!(xi > 0.0)) throw Error(ErrorKind::InvalidInput, "xi must be > 0");
    if (region.contour.empty()) throw Error(ErrorKind::InvalidInput, "region contour not traced");

    const Point2 c = region.barycenter;
    double max_dist = -1.0;
    for (const auto& p : region.contour) {
        const Point2 d = p - c;
        if (d.x == 0.0 && d.y == 0.0) continue;
        const double a = std::atan2(d.y, d.x) * 180.0 / kPi;
        if (angle_diff_deg(a, beta) <= xi) max_dist = std::max(max_dist, norm(d));
    }
    if (max_dist < 0.0) {
        throw Error(ErrorKind::NoIntersection, "no contour point near ray " + std::to_string(beta));
    }
    // Outermost crossing: points within 1 px of the farthest match, best aligned wins.
    const Point2* best = nullptr;
    double best_diff = std::numeric_limits<double>::infinity();
    double best_dist = 0.0;
    for (const auto& p : region.contour) {
        const Point2 d = p - c;
        if (d.x == 0.0 && d.y == 0.0) continue;
        const double diff = angle_diff_deg(std::atan2(d.y, d.x) * 180.0 / kPi, beta);
        const double dist = norm(d);
        if (diff > xi || dist < max_dist - 1.0) continue;
        if (diff < best_diff || (diff == best_diff && dist > best_dist)) {
            best = &p;
            best_diff = diff;
            best_dist = dist;
        }
    }
    return *best;
}

std::vector<Point2> contour_handles(const RegionModel& region, const ContourHandleConfig& cfg) {
    cfg.validate();
    std::vector<Point2> handles;
    for (double beta : cfg.ray_angles) {
        Point2 p;
        try {
            p = ray_intersection(region, beta, cfg.xi);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NoIntersection) continue;
            throw;
        }
        const bool duplicate = std::any_of(handles.begin(), handles.end(), [&](const Point2& h) {
            return distance(h, p) < std::max(cfg.dedupe_dist, 1e-6);
        });
        if (!duplicate) handles.push_back(p);
    }
    if (handles.size() < 3) {
        throw Error(ErrorKind::DegenerateRegion,
                    "only " + std::to_string(handles.size()) + " contour handles found (need 3)");
    }
    return handles;
}

double contour_displacement_length(const RegionModel& region, const ContourHandleConfig& cfg) {
    return cfg.k_l * std::min(region.bbox.width, region.bbox.height);
}

Point2 contour_target(Point2 p, const RegionModel& region, const ContourHandleConfig& cfg, int i) {
    return displace(p, contour_displacement_length(region, cfg), cfg.phi0 + i * cfg.phi_step);
}

RegionModel analyze_largest_region(const Raster& mask) {
    auto regions = connected_components(mask);
    if (regions.empty()) throw Error(ErrorKind::EmptyObject, "mask has no foreground pixels");
    RegionModel region = std::move(regions.front());
    region.barycenter = barycenter(region, mask);
    region.contour = trace_contour(region);
    return region;
}

}  // namespace ndmls
