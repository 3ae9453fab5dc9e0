#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ndmls/types.hpp"

namespace ndmls {

// Row-major 8-bit raster with 1 (mask / gray) or 3 (RGB) interleaved channels.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, std::uint8_t fill = 0);
    Raster(int width, int height, int channels, std::vector<std::uint8_t> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    ImageDims dims() const { return {width_, height_}; }
    bool empty() const { return pixels_.empty(); }

    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::span<std::uint8_t> pixels() { return pixels_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// PNG I/O. Gray inputs load as 1 channel, everything else as RGB (alpha dropped).
Raster read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster& raster);

}  // namespace ndmls
