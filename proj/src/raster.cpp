#include "ndmls/raster.hpp"

#include <png.h>

#include <cstring>
#include <string>

namespace ndmls {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::DegenerateGrid: return "degenerate-grid";
        case ErrorKind::Exhausted: return "exhausted";
        case ErrorKind::NoIntersection: return "no-intersection";
        case ErrorKind::DegenerateRegion: return "degenerate-region";
        case ErrorKind::EmptyObject: return "empty-object";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Raster::Raster(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
        throw Error(ErrorKind::InvalidInput, "raster dims must be positive with 1 or 3 channels");
    }
    pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : Raster(width, height, channels) {
    if (pixels.size() != pixels_.size()) {
        throw Error(ErrorKind::InvalidInput, "pixel buffer length != width*height*channels");
    }
    pixels_ = std::move(pixels);
}

Raster read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;

    const std::string name = path.string();
    if (!png_image_begin_read_from_file(&image, name.c_str())) {
        throw Error(ErrorKind::Io, "cannot read PNG " + name + ": " + image.message);
    }
    const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0 &&
                      (image.format & PNG_FORMAT_FLAG_COLORMAP) == 0;
    image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    const int channels = gray ? 1 : 3;

    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorKind::Io, "cannot decode PNG " + name + ": " + msg);
    }
    return Raster(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                  std::move(buffer));
}

void write_png(const std::filesystem::path& path, const Raster& raster) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(raster.width());
    image.height = static_cast<png_uint_32>(raster.height());
    image.format = raster.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    const std::string name = path.string();
    if (!png_image_write_to_file(&image, name.c_str(), 0, raster.pixels().data(), 0, nullptr)) {
        throw Error(ErrorKind::Io, "cannot write PNG " + name + ": " + image.message);
    }
}

}  // namespace ndmls
