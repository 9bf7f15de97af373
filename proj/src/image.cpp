#include "jndbench/image.hpp"

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include <png.h>

#include "jndbench/errors.hpp"

namespace jndbench {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

struct PngReadState {
    std::string error;
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngReadState*>(png_get_error_ptr(png));
    if (state) state->error = msg;
    std::longjmp(png_jmpbuf(png), 1);
}

void png_warning_silencer(png_structp, png_const_charp) {}

}  // namespace

RgbImage decode_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "rb"));
    if (!file) throw DecodeError("cannot open " + path.string());

    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw DecodeError(path.string() + " is not a PNG file");

    PngReadState state;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler,
                                             png_warning_silencer);
    if (!png) throw DecodeError("cannot initialise libpng");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeError("cannot initialise libpng");
    }

    // Everything the rows are read into lives out here so a longjmp from a
    // libpng error cannot skip destructors of in-flight locals.
    RgbImage img;
    std::vector<png_byte> row;
    std::string reject;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError(path.string() + ": " +
                          (state.error.empty() ? "corrupt PNG" : state.error));
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (color_type == PNG_COLOR_TYPE_PALETTE)
        reject = "palette PNGs are not supported";
    else if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
             png_get_valid(png, info, PNG_INFO_tRNS))
        reject = "alpha channel present";
    else if (bit_depth != 8 && bit_depth != 16)
        reject = "unsupported bit depth " + std::to_string(bit_depth);
    else if (width == 0 || height == 0)
        reject = "empty image";
    if (!reject.empty()) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError(path.string() + ": " + reject);
    }

    if (color_type == PNG_COLOR_TYPE_GRAY) png_set_gray_to_rgb(png);
    if (bit_depth == 16) png_set_swap(png);  // rows are read as native little-endian u16
    png_read_update_info(png, info);

    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.max_value = bit_depth == 16 ? 65535 : 255;
    img.r.resize(img.pixel_count());
    img.g.resize(img.pixel_count());
    img.b.resize(img.pixel_count());
    row.resize(png_get_rowbytes(png, info));

    for (png_uint_32 y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        std::size_t base = static_cast<std::size_t>(y) * width;
        if (bit_depth == 8) {
            for (png_uint_32 x = 0; x < width; ++x) {
                img.r[base + x] = row[3 * x];
                img.g[base + x] = row[3 * x + 1];
                img.b[base + x] = row[3 * x + 2];
            }
        } else {
            for (png_uint_32 x = 0; x < width; ++x) {
                img.r[base + x] = static_cast<std::uint16_t>(row[6 * x] | (row[6 * x + 1] << 8));
                img.g[base + x] =
                    static_cast<std::uint16_t>(row[6 * x + 2] | (row[6 * x + 3] << 8));
                img.b[base + x] =
                    static_cast<std::uint16_t>(row[6 * x + 4] | (row[6 * x + 5] << 8));
            }
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

LumaImage to_luma_bt709(const RgbImage& img) {
    LumaImage out;
    out.width = img.width;
    out.height = img.height;
    out.samples.resize(img.pixel_count());
    const double scale = 255.0 / img.max_value;
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        out.samples[i] = (0.2125 * img.r[i] + 0.7154 * img.g[i] + 0.0721 * img.b[i]) * scale;
    return out;
}

}  // namespace jndbench
