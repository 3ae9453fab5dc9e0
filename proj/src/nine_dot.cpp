#include "ndmls/nine_dot.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ndmls {

namespace {

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

void check_dims(ImageDims dims) {
    if (dims.w <= 0 || dims.h <= 0) {
        throw Error(ErrorKind::InvalidInput, "image dims must be positive");
    }
}

std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return a * b;
}

std::uint64_t add_sat(std::uint64_t a, std::uint64_t b) {
    const auto s = a + b;
    return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

}  // namespace

void NineDotConfig::validate() const {
    if (!in_open_unit(k_p)) throw Error(ErrorKind::InvalidInput, "k_p must lie in (0,1)");
    if (k_p == 0.5) throw Error(ErrorKind::DegenerateGrid, "k_p = 0.5 collapses the nine-dot grid");
    if (!in_open_unit(k_l)) throw Error(ErrorKind::InvalidInput, "k_l must lie in (0,1)");
    if (!in_open_unit(k_s)) throw Error(ErrorKind::InvalidInput, "k_s must lie in (0,1)");
    if (!std::isfinite(phi0)) throw Error(ErrorKind::InvalidInput, "phi0 must be finite");
}

std::vector<Point2> nine_dot_points(ImageDims dims, double k_p) {
    check_dims(dims);
    if (!in_open_unit(k_p)) throw Error(ErrorKind::InvalidInput, "k_p must lie in (0,1)");
    if (k_p == 0.5) throw Error(ErrorKind::DegenerateGrid, "k_p = 0.5 collapses the nine-dot grid");

    const double w = dims.w, h = dims.h;
    const double xs[3] = {k_p * w, w / 2.0, w * (1.0 - k_p)};
    const double ys[3] = {k_p * h, h / 2.0, h * (1.0 - k_p)};
    std::vector<Point2> pts;
    pts.reserve(9);
    for (double y : ys) {
        for (double x : xs) pts.push_back({x, y});
    }
    return pts;
}

int direction_count(double k_s) {
    if (!in_open_unit(k_s)) throw Error(ErrorKind::InvalidInput, "k_s must lie in (0,1)");
    // 1/k_s is computed in floating point; a nudge keeps exact reciprocals (1/0.2) from
    // flooring to one less.
    return static_cast<int>(std::floor(1.0 / k_s + 1e-9));
}

double displacement_length(ImageDims dims, double k_p, double k_l) {
    check_dims(dims);
    return k_l * std::min(k_p * (dims.w - 0.5), k_p * (dims.h - 0.5));
}

Point2 displace(Point2 p, double length, double angle_deg) {
    const double a = deg_to_rad(angle_deg);
    return {p.x + length * std::cos(a), p.y + length * std::sin(a)};
}

Point2 displaced_target(Point2 p, double length, double phi0, double k_s, int j) {
    if (j < 0 || j >= direction_count(k_s)) {
        throw Error(ErrorKind::InvalidInput, "direction index out of range");
    }
    return displace(p, length, phi0 + 360.0 * j * k_s);
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}

PatternSpace::PatternSpace(int handles, int directions) : handles_(handles), directions_(directions) {
    if (handles < 1) throw Error(ErrorKind::InvalidInput, "pattern space needs at least one handle");
    if (directions < 1) throw Error(ErrorKind::InvalidInput, "pattern space needs at least one direction");
}

std::uint64_t PatternSpace::level_size(int level) const {
    if (level < 1 || level > handles_) return 0;
    std::uint64_t size = binomial(handles_, level);
    for (int i = 0; i < level; ++i) size = mul_sat(size, static_cast<std::uint64_t>(directions_));
    return size;
}

std::uint64_t PatternSpace::total() const {
    std::uint64_t t = 0;
    for (int m = 1; m <= handles_; ++m) t = add_sat(t, level_size(m));
    return t;
}

MovePattern PatternSpace::at(std::uint64_t index) const {
    int level = 1;
    for (; level <= handles_; ++level) {
        const auto size = level_size(level);
        if (index < size) break;
        index -= size;
    }
    if (level > handles_) {
        throw Error(ErrorKind::Exhausted, "pattern index beyond the pattern space");
    }

    std::uint64_t dir_tuples = 1;
    for (int i = 0; i < level; ++i) dir_tuples *= static_cast<std::uint64_t>(directions_);
    std::uint64_t combo_rank = index / dir_tuples;
    std::uint64_t dir_rank = index % dir_tuples;

    // Unrank the combination in lexicographic order.
    MovePattern pattern;
    pattern.moves.reserve(static_cast<std::size_t>(level));
    int next = 0;
    for (int slot = 0; slot < level; ++slot) {
        const int remaining = level - slot - 1;
        for (int c = next; c < handles_; ++c) {
            const auto with_c = binomial(handles_ - c - 1, remaining);
            if (combo_rank < with_c) {
                pattern.moves.push_back({c, 0});
                next = c + 1;
                break;
            }
            combo_rank -= with_c;
        }
    }
    // Direction tuple: first moved handle is the most significant digit.
    for (int slot = level - 1; slot >= 0; --slot) {
        pattern.moves[static_cast<std::size_t>(slot)].direction =
            static_cast<int>(dir_rank % static_cast<std::uint64_t>(directions_));
        dir_rank /= static_cast<std::uint64_t>(directions_);
    }
    return pattern;
}

std::vector<MovePattern> enumerate_variants(const NineDotConfig& cfg, ImageDims dims,
                                            std::uint64_t count) {
    cfg.validate();
    check_dims(dims);
    const PatternSpace space(9, direction_count(cfg.k_s));
    if (count > space.total()) {
        throw Error(ErrorKind::Exhausted, "requested " + std::to_string(count) +
                                              " variants but the pattern space holds " +
                                              std::to_string(space.total()));
    }
    std::vector<MovePattern> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(space.at(i));
    return out;
}

std::vector<Point2> nine_dot_targets(const NineDotConfig& cfg, ImageDims dims,
                                     const std::vector<Point2>& sources,
                                     const MovePattern& pattern) {
    const double length = displacement_length(dims, cfg.k_p, cfg.k_l);
    auto targets = sources;
    for (const auto& m : pattern.moves) {
        if (m.handle < 0 || static_cast<std::size_t>(m.handle) >= sources.size()) {
            throw Error(ErrorKind::InvalidInput, "move pattern references a missing handle");
        }
        targets[static_cast<std::size_t>(m.handle)] =
            displaced_target(sources[static_cast<std::size_t>(m.handle)], length, cfg.phi0, cfg.k_s,
                             m.direction);
    }
    return targets;
}

}  // namespace ndmls
