#include "test_support.hpp"

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include <png.h>

namespace testsupport {

jndbench::LumaImage make_luma(int w, int h, double value) {
    jndbench::LumaImage img;
    img.width = w;
    img.height = h;
    img.samples.assign(static_cast<std::size_t>(w) * h, value);
    return img;
}

jndbench::LumaImage random_luma_u8(std::mt19937_64& rng, int w, int h) {
    jndbench::LumaImage img = make_luma(w, h, 0.0);
    for (auto& s : img.samples) s = static_cast<double>(rng() % 256);
    return img;
}

jndbench::RgbImage random_rgb_u8(std::mt19937_64& rng, int w, int h) {
    jndbench::RgbImage img;
    img.width = w;
    img.height = h;
    img.max_value = 255;
    std::size_t n = static_cast<std::size_t>(w) * h;
    img.r.resize(n);
    img.g.resize(n);
    img.b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.r[i] = static_cast<std::uint16_t>(rng() % 256);
        img.g[i] = static_cast<std::uint16_t>(rng() % 256);
        img.b[i] = static_cast<std::uint16_t>(rng() % 256);
    }
    return img;
}

jndbench::RgbImage gray_to_rgb(const jndbench::LumaImage& luma) {
    jndbench::RgbImage img;
    img.width = luma.width;
    img.height = luma.height;
    img.max_value = 255;
    img.r.resize(luma.samples.size());
    for (std::size_t i = 0; i < luma.samples.size(); ++i)
        img.r[i] = static_cast<std::uint16_t>(luma.samples[i]);
    img.g = img.r;
    img.b = img.r;
    return img;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

void write_png(const std::filesystem::path& path, int w, int h, int color_type, int bit_depth,
               const std::uint8_t* bytes, std::size_t rowbytes) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw std::runtime_error("cannot open " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png write failed: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    for (int y = 0; y < h; ++y)
        png_write_row(png, const_cast<png_bytep>(bytes + static_cast<std::size_t>(y) * rowbytes));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, int w, int h,
                    const std::vector<std::uint8_t>& rgb) {
    write_png(path, w, h, PNG_COLOR_TYPE_RGB, 8, rgb.data(), static_cast<std::size_t>(w) * 3);
}

void write_png_gray8(const std::filesystem::path& path, int w, int h,
                     const std::vector<std::uint8_t>& gray) {
    write_png(path, w, h, PNG_COLOR_TYPE_GRAY, 8, gray.data(), static_cast<std::size_t>(w));
}

void write_png_rgb16(const std::filesystem::path& path, int w, int h,
                     const std::vector<std::uint16_t>& rgb) {
    write_png(path, w, h, PNG_COLOR_TYPE_RGB, 16,
              reinterpret_cast<const std::uint8_t*>(rgb.data()),
              static_cast<std::size_t>(w) * 6);
}

void write_png_rgba8(const std::filesystem::path& path, int w, int h,
                     const std::vector<std::uint8_t>& rgba) {
    write_png(path, w, h, PNG_COLOR_TYPE_RGB_ALPHA, 8, rgba.data(),
              static_cast<std::size_t>(w) * 4);
}

}  // namespace testsupport
