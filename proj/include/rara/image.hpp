#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rara {

/// Row-major float RGB frame.
class Image {
public:
    Image() = default;
    Image(int width, int height, const Eigen::Vector3f& fill = Eigen::Vector3f::Zero());

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return pixels_.empty(); }

    Eigen::Vector3f& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    const Eigen::Vector3f& at(int x, int y) const {
        return pixels_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::span<const Eigen::Vector3f> pixels() const { return pixels_; }
    std::span<Eigen::Vector3f> pixels() { return pixels_; }

    bool operator==(const Image& other) const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Eigen::Vector3f> pixels_;
};

/// floor(clamp(v, 0, 1) * 255 + 0.5)
std::uint8_t quantize_channel(float v);

/// Tightly packed 8-bit RGB, row-major.
std::vector<std::uint8_t> to_rgb8(const Image& image);

/// Images placed left to right; heights must match.
Image hconcat(std::span<const Image> images);

std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const Image& image, const std::filesystem::path& path);
/// 8-bit RGB PNG back to an Image (channels divided by 255).
Image decode_png(std::span<const std::uint8_t> bytes);

} // namespace rara
