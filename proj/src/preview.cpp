#include "ndmls/preview.hpp"

#include <cmath>

#include "ndmls/warp.hpp"

namespace ndmls {

namespace {

Raster to_rgb(const Raster& r) {
    if (r.channels() == 3) return r;
    Raster out(r.width(), r.height(), 3);
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = r.at(x, y);
        }
    }
    return out;
}

void put(Raster& canvas, int x, int y, const std::array<std::uint8_t, 3>& color, int x_limit) {
    if (x < 0 || y < 0 || x >= x_limit || y >= canvas.height()) return;
    for (int c = 0; c < 3; ++c) canvas.at(x, y, c) = color[static_cast<std::size_t>(c)];
}

// Bresenham
void line(Raster& canvas, int x0, int y0, int x1, int y1, const std::array<std::uint8_t, 3>& color,
          int x_limit) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        put(canvas, x0, y0, color, x_limit);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) { err += dy; x0 += sx; }
        if (e2 <= dx) { err += dx; y0 += sy; }
    }
}

}  // namespace

Raster render_preview(const Raster& source, const HandleSet& handles, int lattice_spacing,
                      double min_arrow) {
    const auto basis = precompute_basis(handles.sources(), handles.alpha(), source.width(),
                                        source.height(), lattice_spacing);
    const Raster warped = to_rgb(warp_image(source, build_warp_field(basis, handles.targets())));
    const Raster left = to_rgb(source);

    const int w = source.width();
    Raster canvas(2 * w, source.height(), 3);
    for (int y = 0; y < source.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                canvas.at(x, y, c) = left.at(x, y, c);
                canvas.at(x + w, y, c) = warped.at(x, y, c);
            }
        }
    }

    for (std::size_t i = 0; i < handles.size(); ++i) {
        const Point2 p = handles.sources()[i];
        const Point2 d = handles.targets()[i] - p;
        const double len = norm(d);
        if (len == 0.0) continue;
        const double scale = len < min_arrow ? min_arrow / len : 1.0;
        const Point2 tip = p + scale * d;
        line(canvas, static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)),
             static_cast<int>(std::lround(tip.x)), static_cast<int>(std::lround(tip.y)), kArrowColor, w);
    }
    for (const auto& p : handles.sources()) {
        const int cx = static_cast<int>(std::lround(p.x));
        const int cy = static_cast<int>(std::lround(p.y));
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) put(canvas, cx + dx, cy + dy, kMarkerColor, w);
        }
    }
    return canvas;
}

void preview_render(const LabeledSample& sample, const HandleSet& handles,
                    const std::filesystem::path& out_path, int lattice_spacing) {
    write_png(out_path, render_preview(sample.image, handles, lattice_spacing));
}

}  // namespace ndmls
