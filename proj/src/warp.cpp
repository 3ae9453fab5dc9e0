#include "ndmls/warp.hpp"

#include <algorithm>
#include <cmath>

namespace ndmls {

WarpField::WarpField(const Lattice& lattice, std::vector<Point2> samples)
    : lattice_(lattice), samples_(std::move(samples)) {
    if (samples_.size() != lattice_.vertex_count()) {
        throw Error(ErrorKind::InvalidInput, "warp field sample count does not match lattice");
    }
    for (const auto& s : samples_) {
        if (!s.finite()) throw Error(ErrorKind::InvalidInput, "warp field sample is not finite");
    }
}

WarpField WarpField::identity(int width, int height, int spacing) {
    const auto lattice = Lattice::covering(width, height, spacing);
    std::vector<Point2> samples(lattice.vertex_count());
    for (int row = 0; row < lattice.rows; ++row) {
        for (int col = 0; col < lattice.cols; ++col) {
            samples[lattice.index(col, row)] = lattice.vertex(col, row);
        }
    }
    return WarpField(lattice, std::move(samples));
}

Point2 WarpField::source_coordinate(int x, int y) const {
    const int g = lattice_.spacing;
    const int col = x / g;
    const int row = y / g;
    const int rx = x - col * g;
    const int ry = y - row * g;
    if (rx == 0 && ry == 0) return samples_[lattice_.index(col, row)];

    const double fx = static_cast<double>(rx) / g;
    const double fy = static_cast<double>(ry) / g;
    const Point2 s00 = samples_[lattice_.index(col, row)];
    const Point2 s10 = samples_[lattice_.index(col + 1, row)];
    const Point2 s01 = samples_[lattice_.index(col, row + 1)];
    const Point2 s11 = samples_[lattice_.index(col + 1, row + 1)];
    const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy);
    const double w01 = (1 - fx) * fy, w11 = fx * fy;
    return {w00 * s00.x + w10 * s10.x + w01 * s01.x + w11 * s11.x,
            w00 * s00.y + w10 * s10.y + w01 * s01.y + w11 * s11.y};
}

namespace {

// Bilinear displacement lookup with its spatial derivative.
struct DisplacementGrid {
    const Lattice& lattice;
    std::vector<Point2> disp;

    struct Sample {
        Point2 d;
        double dxx, dxy, dyx, dyy;  // d(d.x)/dx, d(d.x)/dy, d(d.y)/dx, d(d.y)/dy
    };

    Sample eval(Point2 p) const {
        const double inv_g = 1.0 / lattice.spacing;
        double u = p.x * inv_g;
        double v = p.y * inv_g;
        double su = inv_g, sv = inv_g;
        if (u < 0.0) { u = 0.0; su = 0.0; }
        if (u > lattice.cols - 1) { u = lattice.cols - 1; su = 0.0; }
        if (v < 0.0) { v = 0.0; sv = 0.0; }
        if (v > lattice.rows - 1) { v = lattice.rows - 1; sv = 0.0; }
        const int i0 = std::min(static_cast<int>(u), lattice.cols - 2);
        const int j0 = std::min(static_cast<int>(v), lattice.rows - 2);
        const double fx = u - i0;
        const double fy = v - j0;
        const Point2* row0 = disp.data() + lattice.index(i0, j0);
        const Point2* row1 = row0 + lattice.cols;
        const Point2 d00 = row0[0], d10 = row0[1], d01 = row1[0], d11 = row1[1];

        const double ax = d10.x - d00.x, ay = d10.y - d00.y;
        const double bx = d11.x - d01.x, by = d11.y - d01.y;
        const double lx = d00.x + fx * ax, ly = d00.y + fx * ay;
        const double hx = d01.x + fx * bx, hy = d01.y + fx * by;
        Sample s;
        s.d = {lx + fy * (hx - lx), ly + fy * (hy - ly)};
        s.dxx = (ax + fy * (bx - ax)) * su;
        s.dyx = (ay + fy * (by - ay)) * su;
        s.dxy = (hx - lx) * sv;
        s.dyy = (hy - ly) * sv;
        return s;
    }
};

constexpr int kNewtonIterations = 24;
constexpr double kNewtonTolerance = 1e-11;  // residual
constexpr double kNewtonStep = 1e-5;        // converged once a step is this small
constexpr double kMinJacobian = 1e-3;

}  // namespace

WarpField invert_forward_map(const Lattice& lattice, std::span<const Point2> forward) {
    if (forward.size() != lattice.vertex_count()) {
        throw Error(ErrorKind::InvalidInput, "forward map size does not match lattice");
    }
    DisplacementGrid grid{lattice, std::vector<Point2>(forward.size())};
    for (int row = 0; row < lattice.rows; ++row) {
        for (int col = 0; col < lattice.cols; ++col) {
            const auto i = lattice.index(col, row);
            grid.disp[i] = forward[i] - lattice.vertex(col, row);
        }
    }

    std::vector<Point2> samples(lattice.vertex_count());
    for (int row = 0; row < lattice.rows; ++row) {
        for (int col = 0; col < lattice.cols; ++col) {
            const auto i = lattice.index(col, row);
            const Point2 target = lattice.vertex(col, row);
            Point2 x = target - grid.disp[i];
            for (int it = 0; it < kNewtonIterations; ++it) {
                const auto s = grid.eval(x);
                const Point2 r = x + s.d - target;
                if (std::abs(r.x) + std::abs(r.y) < kNewtonTolerance) break;
                const double j00 = 1.0 + s.dxx, j01 = s.dxy;
                const double j10 = s.dyx, j11 = 1.0 + s.dyy;
                const double det = j00 * j11 - j01 * j10;
                if (det < kMinJacobian) {
                    x = x - r;  // folded cell: damped fixed-point step
                    continue;
                }
                const Point2 step{(j11 * r.x - j01 * r.y) / det, (-j10 * r.x + j00 * r.y) / det};
                x = x - step;
                if (std::abs(step.x) + std::abs(step.y) < kNewtonStep) break;
            }
            samples[i] = x;
        }
    }
    return WarpField(lattice, std::move(samples));
}

WarpField build_warp_field(const PrecomputedBasis& basis, std::span<const Point2> targets) {
    const auto forward = basis.transform_all(targets);
    return invert_forward_map(basis.lattice(), forward);
}

WarpField build_warp_field(const PrecomputedBasis& basis, const HandleSet& handles) {
    if (handles.sources() != basis.sources()) {
        throw Error(ErrorKind::InvalidInput, "handle sources differ from the basis sources");
    }
    return build_warp_field(basis, handles.targets());
}

namespace {

inline std::uint8_t fetch(const Raster& src, int x, int y, int c, Fill fill) {
    if (x < 0 || y < 0 || x >= src.width() || y >= src.height()) {
        if (fill.mode == Fill::Mode::Constant) return fill.value;
        x = std::clamp(x, 0, src.width() - 1);
        y = std::clamp(y, 0, src.height() - 1);
    }
    return src.at(x, y, c);
}

}  // namespace

Raster warp_image(const Raster& src, const WarpField& field, Sampling sampling, Fill fill) {
    const int channels = src.channels();
    Raster out(field.width(), field.height(), channels);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            const Point2 s = field.source_coordinate(x, y);
            if (sampling == Sampling::Nearest) {
                const int sx = static_cast<int>(std::floor(s.x + 0.5));
                const int sy = static_cast<int>(std::floor(s.y + 0.5));
                for (int c = 0; c < channels; ++c) out.at(x, y, c) = fetch(src, sx, sy, c, fill);
                continue;
            }
            const int x0 = static_cast<int>(std::floor(s.x));
            const int y0 = static_cast<int>(std::floor(s.y));
            const double fx = s.x - x0;
            const double fy = s.y - y0;
            if (x0 >= 0 && y0 >= 0 && x0 + 1 < src.width() && y0 + 1 < src.height()) {
                for (int c = 0; c < channels; ++c) {
                    const double v = (1 - fx) * (1 - fy) * src.at(x0, y0, c) + fx * (1 - fy) * src.at(x0 + 1, y0, c) +
                                     (1 - fx) * fy * src.at(x0, y0 + 1, c) + fx * fy * src.at(x0 + 1, y0 + 1, c);
                    out.at(x, y, c) = quantize(v);
                }
                continue;
            }
            for (int c = 0; c < channels; ++c) {
                const double v = (1 - fx) * (1 - fy) * fetch(src, x0, y0, c, fill) +
                                 fx * (1 - fy) * fetch(src, x0 + 1, y0, c, fill) +
                                 (1 - fx) * fy * fetch(src, x0, y0 + 1, c, fill) +
                                 fx * fy * fetch(src, x0 + 1, y0 + 1, c, fill);
                out.at(x, y, c) = quantize(v);
            }
        }
    }
    return out;
}

Raster warp_mask(const Raster& mask, const WarpField& field) {
    if (mask.channels() != 1) {
        throw Error(ErrorKind::InvalidInput, "warp_mask expects a 1-channel mask");
    }
    return warp_image(mask, field, Sampling::Nearest, Fill::constant(0));
}

}  // namespace ndmls
