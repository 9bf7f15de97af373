#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace jndbench {

/// Planar RGB, 8- or 16-bit samples (max_value 255 or 65535). Grayscale
/// sources are replicated across the three planes at decode time.
struct RgbImage {
    int width = 0;
    int height = 0;
    int max_value = 255;
    std::vector<std::uint16_t> r, g, b;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

/// Real-valued luminance plane on the [0, 255] scale regardless of source
/// bit depth (16-bit samples are divided by 257).
struct LumaImage {
    int width = 0;
    int height = 0;
    std::vector<double> samples;

    double at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
};

/// Pixel-exact PNG decode. Accepts 8/16-bit RGB and grayscale; rejects
/// palette, sub-byte depths and anything carrying alpha (no silent
/// compositing).
RgbImage decode_png(const std::filesystem::path& path);

/// BT.709 luminance, Y = 0.2125 R + 0.7154 G + 0.0721 B, unrounded.
LumaImage to_luma_bt709(const RgbImage& img);

}  // namespace jndbench
