#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "ndmls/labels.hpp"
#include "ndmls/mls.hpp"

namespace ndmls {

inline constexpr std::array<std::uint8_t, 3> kMarkerColor = {255, 0, 0};
inline constexpr std::array<std::uint8_t, 3> kArrowColor = {0, 255, 0};

/// Side-by-side RGB canvas: source with p markers and p->q arrows on the left, the warped
/// result on the right. Arrows shorter than `min_arrow` px are stretched along their
/// direction so sub-pixel moves stay visible; zero moves draw no arrow.
Raster render_preview(const Raster& source, const HandleSet& handles, int lattice_spacing = 1,
                      double min_arrow = 6.0);

void preview_render(const LabeledSample& sample, const HandleSet& handles,
                    const std::filesystem::path& out_path, int lattice_spacing = 1);

}  // namespace ndmls
