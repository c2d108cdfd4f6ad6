#include "rara/image.hpp"

#include "rara/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rara {

Image::Image(int width, int height, const Eigen::Vector3f& fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) {
        throw ParameterError("image dimensions must be positive");
    }
}

bool Image::operator==(const Image& other) const {
    if (width_ != other.width_ || height_ != other.height_) {
        return false;
    }
    // Bitwise comparison so that -0.0 and NaN payloads count as differences.
    return std::memcmp(pixels_.data(), other.pixels_.data(), pixels_.size() * sizeof(Eigen::Vector3f)) == 0;
}

std::uint8_t quantize_channel(float v) {
    const double c = std::isnan(v) ? 0.0 : std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

std::vector<std::uint8_t> to_rgb8(const Image& image) {
    std::vector<std::uint8_t> out;
    out.reserve(image.pixels().size() * 3);
    for (const auto& p : image.pixels()) {
        out.push_back(quantize_channel(p.x()));
        out.push_back(quantize_channel(p.y()));
        out.push_back(quantize_channel(p.z()));
    }
    return out;
}

Image hconcat(std::span<const Image> images) {
    if (images.empty()) {
        throw ParameterError("hconcat: no images");
    }
    int width = 0;
    const int height = images.front().height();
    for (const auto& im : images) {
        if (im.height() != height) {
            throw ParameterError("hconcat: heights differ");
        }
        width += im.width();
    }
    Image out(width, height);
    int x0 = 0;
    for (const auto& im : images) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < im.width(); ++x) {
                out.at(x0 + x, y) = im.at(x, y);
            }
        }
        x0 += im.width();
    }
    return out;
}

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

struct ReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

void read_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + length > cur->bytes.size()) {
        png_error(png, "unexpected end of data");
    }
    std::memcpy(data, cur->bytes.data() + cur->pos, length);
    cur->pos += length;
}

void silent_warning(png_structp, png_const_charp) {}

} // namespace

// libpng reports errors with longjmp; every object with a destructor is
// constructed before the setjmp point.
std::vector<std::uint8_t> encode_png(const Image& image) {
    if (image.empty()) {
        throw ParameterError("encode_png: empty image");
    }
    const auto rgb = to_rgb8(image);
    const std::size_t stride = static_cast<std::size_t>(image.width()) * 3;
    std::vector<std::uint8_t> out;
    out.reserve(rgb.size() / 2);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, silent_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng: allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng: encoding failed");
    }
    png_set_write_fn(png, &out, append_bytes, nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    for (int y = 0; y < image.height(); ++y) {
        png_write_row(png, const_cast<png_bytep>(rgb.data() + y * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
    const auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw FormatError("decode_png: not a PNG stream");
    }
    ReadCursor cursor{bytes};
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, silent_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("libpng: allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("decode_png: corrupt PNG stream");
    }
    png_set_read_fn(png, &cursor, read_bytes);
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
        png_error(png, "expected 8-bit RGB");
    }
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    pixels.resize(static_cast<std::size_t>(width) * height * 3);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) {
        rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * 3;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image image(static_cast<int>(width), static_cast<int>(height));
    for (png_uint_32 y = 0; y < height; ++y) {
        for (png_uint_32 x = 0; x < width; ++x) {
            const std::uint8_t* p = rows[y] + 3 * x;
            image.at(static_cast<int>(x), static_cast<int>(y)) = Eigen::Vector3f(p[0], p[1], p[2]) / 255.0f;
        }
    }
    return image;
}

} // namespace rara
