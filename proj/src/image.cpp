#include "qkp/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "qkp/errors.hpp"

namespace qkp {
namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Image load_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw IoError("cannot decode PNG '" + path.string() + "': " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image image(png.width, png.height);
  if (!png_image_finish_read(&png, nullptr, image.data().data(), 0, nullptr)) {
    png_image_free(&png);
    throw IoError("cannot decode PNG '" + path.string() + "': " + png.message);
  }
  return image;
}

std::size_t read_ppm_number(std::istream& in) {
  // skips whitespace and '#' comments
  int c = in.get();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    }
    c = in.get();
  }
  std::size_t value = 0;
  bool any = false;
  while (in && std::isdigit(c)) {
    value = value * 10 + static_cast<std::size_t>(c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw IoError("malformed PPM header");
  return value;
}

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') throw IoError("not a binary PPM: " + path.string());
  const std::size_t width = read_ppm_number(in);
  const std::size_t height = read_ppm_number(in);
  const std::size_t maxval = read_ppm_number(in);
  if (width == 0 || height == 0 || maxval != 255) {
    throw IoError("unsupported PPM (need non-empty 8-bit image): " + path.string());
  }
  Image image(width, height);
  in.read(reinterpret_cast<char*>(image.data().data()), static_cast<std::streamsize>(image.data().size()));
  if (!in) throw IoError("truncated PPM: " + path.string());
  return image;
}

}  // namespace

Image::Image(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), data_(width * height * 3) {
  for (std::size_t p = 0; p < width * height; ++p) std::copy(fill.begin(), fill.end(), data_.begin() + 3 * p);
}

Rgb Image::at(std::size_t col, std::size_t row) const {
  const std::size_t o = 3 * (row * width_ + col);
  return {data_[o], data_[o + 1], data_[o + 2]};
}

void Image::set(std::size_t col, std::size_t row, Rgb value) {
  const std::size_t o = 3 * (row * width_ + col);
  std::copy(value.begin(), value.end(), data_.begin() + o);
}

void Image::set_clipped(long col, long row, Rgb value) {
  if (col < 0 || row < 0 || col >= static_cast<long>(width_) || row >= static_cast<long>(height_)) return;
  set(static_cast<std::size_t>(col), static_cast<std::size_t>(row), value);
}

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  in.close();
  if (png_sig_cmp(sig, 0, 8) == 0) return load_png(path);
  if (sig[0] == 'P' && sig[1] == '6') return load_ppm(path);
  throw IoError("unrecognized image format: " + path.string());
}

void save_png(const std::filesystem::path& path, const Image& image) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.data().data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + png.message);
  }
}

void save_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data().data()), static_cast<std::streamsize>(image.data().size()));
}

Image downsample_area(const Image& image, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw std::invalid_argument("downsample target must be non-empty");
  if (width == image.width() && height == image.height()) return image;

  struct Tap {
    std::size_t index;
    double weight;
  };
  auto taps = [](std::size_t src, std::size_t dst) {
    std::vector<std::vector<Tap>> table(dst);
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t o = 0; o < dst; ++o) {
      const double lo = static_cast<double>(o) * scale;
      const double hi = static_cast<double>(o + 1) * scale;
      for (auto s = static_cast<std::size_t>(lo); s < src && static_cast<double>(s) < hi; ++s) {
        const double w = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
        if (w > 0.0) table[o].push_back({s, w});
      }
    }
    return table;
  };
  const auto cols = taps(image.width(), width);
  const auto rows = taps(image.height(), height);
  Image out(width, height);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      double acc[3] = {0, 0, 0};
      double total = 0.0;
      for (const auto& tr : rows[r]) {
        for (const auto& tc : cols[c]) {
          const double w = tr.weight * tc.weight;
          const Rgb px = image.at(tc.index, tr.index);
          for (int ch = 0; ch < 3; ++ch) acc[ch] += w * px[ch];
          total += w;
        }
      }
      out.set(c, r, {to_byte(acc[0] / total), to_byte(acc[1] / total), to_byte(acc[2] / total)});
    }
  }
  return out;
}

Image rotate_bilinear(const Image& image, double degrees) {
  if (image.empty()) throw std::invalid_argument("cannot rotate an empty image");
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cx = (static_cast<double>(image.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(image.height()) - 1.0) / 2.0;
  const double max_x = static_cast<double>(image.width() - 1);
  const double max_y = static_cast<double>(image.height() - 1);
  Image out(image.width(), image.height());
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < image.width(); ++c) {
      const double dx = static_cast<double>(c) - cx;
      const double dy = static_cast<double>(r) - cy;
      const double sx = std::clamp(cx + cs * dx + sn * dy, 0.0, max_x);
      const double sy = std::clamp(cy - sn * dx + cs * dy, 0.0, max_y);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const auto y0 = static_cast<std::size_t>(std::floor(sy));
      const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
      const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
      const double fx = sx - static_cast<double>(x0);
      const double fy = sy - static_cast<double>(y0);
      const Rgb p00 = image.at(x0, y0), p10 = image.at(x1, y0), p01 = image.at(x0, y1), p11 = image.at(x1, y1);
      Rgb px;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1 - fx) * p00[ch] + fx * p10[ch];
        const double bottom = (1 - fx) * p01[ch] + fx * p11[ch];
        px[ch] = to_byte((1 - fy) * top + fy * bottom);
      }
      out.set(c, r, px);
    }
  }
  return out;
}

Image crop(const Image& image, std::size_t col, std::size_t row, std::size_t width, std::size_t height) {
  if (col + width > image.width() || row + height > image.height()) {
    throw std::invalid_argument("crop window exceeds image bounds");
  }
  Image out(width, height);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) out.set(c, r, image.at(col + c, row + r));
  }
  return out;
}

Image hstack(const Image& left, const Image& right, std::size_t gap, Rgb gap_color) {
  Image out(left.width() + gap + right.width(), std::max(left.height(), right.height()), gap_color);
  for (std::size_t r = 0; r < left.height(); ++r) {
    for (std::size_t c = 0; c < left.width(); ++c) out.set(c, r, left.at(c, r));
  }
  const std::size_t shift = left.width() + gap;
  for (std::size_t r = 0; r < right.height(); ++r) {
    for (std::size_t c = 0; c < right.width(); ++c) out.set(shift + c, r, right.at(c, r));
  }
  return out;
}

Image upscale_nearest(const Image& image, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("upscale factor must be positive");
  Image out(image.width() * factor, image.height() * factor);
  for (std::size_t r = 0; r < out.height(); ++r) {
    for (std::size_t c = 0; c < out.width(); ++c) out.set(c, r, image.at(c / factor, r / factor));
  }
  return out;
}

void draw_cross(Image& image, long col, long row, long arm, Rgb color) {
  for (long d = -arm; d <= arm; ++d) {
    image.set_clipped(col + d, row, color);
    image.set_clipped(col, row + d, color);
  }
}

void draw_line(Image& image, long c0, long r0, long c1, long r1, Rgb color) {
  // Bresenham
  const long dc = std::abs(c1 - c0), dr = -std::abs(r1 - r0);
  const long sc = c0 < c1 ? 1 : -1, sr = r0 < r1 ? 1 : -1;
  long err = dc + dr;
  for (;;) {
    image.set_clipped(c0, r0, color);
    if (c0 == c1 && r0 == r1) break;
    const long e2 = 2 * err;
    if (e2 >= dr) {
      err += dr;
      c0 += sc;
    }
    if (e2 <= dc) {
      err += dc;
      r0 += sr;
    }
  }
}

Image render_heatmap(const DenseMatrix& values, double lo, double hi) {
  static constexpr std::array<std::array<double, 3>, 5> kRamp{{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  Image out(values.cols(), values.rows());
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t c = 0; c < values.cols(); ++c) {
      const double t = std::clamp((values(r, c) - lo) / span, 0.0, 1.0) * (kRamp.size() - 1);
      const auto k = std::min(static_cast<std::size_t>(t), kRamp.size() - 2);
      const double f = t - static_cast<double>(k);
      Rgb px;
      for (int ch = 0; ch < 3; ++ch) px[ch] = to_byte((1 - f) * kRamp[k][ch] + f * kRamp[k + 1][ch]);
      out.set(c, r, px);
    }
  }
  return out;
}

Image synthetic_scene(std::size_t width, std::size_t height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return lo + (hi - lo) * std::generate_canonical<double, 53>(rng); };
  Image image(width, height);
  const double w = static_cast<double>(width), h = static_cast<double>(height);
  const double fx = uniform(1.0, 3.0), fy = uniform(1.0, 3.0);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double u = static_cast<double>(c) / w, v = static_cast<double>(r) / h;
      const double wave = 0.5 + 0.5 * std::sin(fx * std::numbers::pi * u) * std::cos(fy * std::numbers::pi * v);
      image.set(c, r, {to_byte(60 + 60 * wave), to_byte(90 + 70 * u), to_byte(50 + 50 * v)});
    }
  }
  const std::size_t shapes = 6 + static_cast<std::size_t>(w * h / 400.0);
  for (std::size_t s = 0; s < shapes; ++s) {
    const Rgb color{to_byte(uniform(0, 255)), to_byte(uniform(0, 255)), to_byte(uniform(0, 255))};
    const double cx = uniform(0, w), cy = uniform(0, h);
    const double size = uniform(1.5, std::max(2.0, std::min(w, h) / 6.0));
    const bool disc = uniform(0, 1) < 0.5;
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        const double dx = static_cast<double>(c) - cx, dy = static_cast<double>(r) - cy;
        const bool inside = disc ? dx * dx + dy * dy <= size * size
                                 : std::abs(dx) <= size && std::abs(dy) <= 0.6 * size;
        if (inside) image.set(c, r, color);
      }
    }
  }
  return image;
}

}  // namespace qkp
