#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "qkp/matrix.hpp"

namespace qkp {

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB raster, row-major.
class Image {
 public:
  Image() = default;
  Image(std::size_t width, std::size_t height, Rgb fill = {0, 0, 0});

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Rgb at(std::size_t col, std::size_t row) const;
  void set(std::size_t col, std::size_t row, Rgb value);
  // Writes only when (col, row) lies inside the image.
  void set_clipped(long col, long row, Rgb value);

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

// PNG or binary PPM (P6), detected from the file signature. Throws IoError.
Image load_image(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const Image& image);
void save_ppm(const std::filesystem::path& path, const Image& image);

// Box-filter resampling: each output pixel is the area-weighted mean of the
// source pixels it covers.
Image downsample_area(const Image& image, std::size_t width, std::size_t height);

// Rotation about the image center, clockwise for positive degrees, with
// bilinear interpolation. Samples outside the source are clamped to the border.
Image rotate_bilinear(const Image& image, double degrees);

Image crop(const Image& image, std::size_t col, std::size_t row, std::size_t width, std::size_t height);
Image hstack(const Image& left, const Image& right, std::size_t gap = 0, Rgb gap_color = {255, 255, 255});
Image upscale_nearest(const Image& image, std::size_t factor);

void draw_cross(Image& image, long col, long row, long arm, Rgb color);
void draw_line(Image& image, long c0, long r0, long c1, long r1, Rgb color);

// Fixed five-stop ramp (dark blue, blue, teal, yellow-green, yellow) over
// [lo, hi]; one output pixel per matrix entry.
Image render_heatmap(const DenseMatrix& values, double lo = 0.0, double hi = 1.0);

// Deterministic test scene: smooth colour gradients with a few coloured
// discs and rectangles, loosely resembling rooftops on terrain.
Image synthetic_scene(std::size_t width, std::size_t height, std::uint64_t seed);

}  // namespace qkp
