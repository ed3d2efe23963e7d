#pragma once

// Tiny binary PPM (P6) raster with deterministic scene rendering. Images are
// content-addressed: the file name embeds a 64-bit FNV-1a hash of the pixel
// payload, so identical scenes map to identical files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabletalk/core.hpp"
#include "tabletalk/rng.hpp"

namespace tabletalk {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

class Pixmap {
 public:
  Pixmap(int width, int height, Rgb fill = {})
      : width_(checked_dim(width)), height_(checked_dim(height)),
        pixels_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  const Rgb& at(int x, int y) const {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }

  // Fills the pixel rectangle covered by a normalized box. A normalized span
  // [lo, hi) maps to pixel columns floor(lo * width) through
  // ceil(hi * width) - 1, clamped to the image.
  void fill_box(const BBox& box, Rgb color) {
    int x0 = static_cast<int>(std::floor(box.x_min() * width_));
    int x1 = static_cast<int>(std::ceil(box.x_max() * width_)) - 1;
    int y0 = static_cast<int>(std::floor(box.y_min() * height_));
    int y1 = static_cast<int>(std::ceil(box.y_max() * height_)) - 1;
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, width_ - 1);
    y1 = std::min(y1, height_ - 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) at(x, y) = color;
  }

  std::vector<std::uint8_t> encode_ppm() const {
    std::string header = "P6\n" + std::to_string(width_) + " " + std::to_string(height_) +
                         "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + pixels_.size() * 3);
    for (const Rgb& p : pixels_) {
      out.push_back(p.r);
      out.push_back(p.g);
      out.push_back(p.b);
    }
    return out;
  }

  std::uint64_t content_hash() const {
    std::vector<std::uint8_t> bytes = encode_ppm();
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }

 private:
  static int checked_dim(int v) {
    if (v <= 0) throw std::invalid_argument("pixmap dimensions must be positive");
    return v;
  }

  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

inline constexpr int kSceneWidth = 256;
inline constexpr int kSceneHeight = 128;
inline constexpr Rgb kSceneBackground = {32, 32, 40};

// Stable per-name color, kept away from the background's dark band.
inline Rgb object_color(const std::string& name) {
  std::uint64_t h = splitmix64(fnv1a64(name));
  auto channel = [&](int shift) {
    return static_cast<std::uint8_t>(64 + ((h >> shift) & 0xff) % 192);
  };
  return {channel(0), channel(8), channel(16)};
}

// Draws objects in scene-list order, later entries painting over earlier
// ones. Geometry only; rotation has no visual effect on axis-aligned boxes.
inline Pixmap render_scene(const SceneState& scene) {
  Pixmap img(kSceneWidth, kSceneHeight, kSceneBackground);
  for (const ObjectInstance& obj : scene.objects) img.fill_box(obj.bbox, object_color(obj.name));
  return img;
}

inline std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline std::string scene_image_name(const Pixmap& img) {
  return "scene-" + hash_hex(img.content_hash()) + ".ppm";
}

inline void write_ppm(const Pixmap& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path.string());
  std::vector<std::uint8_t> bytes = img.encode_ppm();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline Pixmap read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read image: " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255)
    throw std::runtime_error("unsupported pixmap format in " + path.string());
  in.get();
  Pixmap img(w, h);
  std::vector<char> raw(static_cast<std::size_t>(w) * h * 3);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw std::runtime_error("truncated pixmap in " + path.string());
  std::size_t i = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y) = {static_cast<std::uint8_t>(raw[i]), static_cast<std::uint8_t>(raw[i + 1]),
                      static_cast<std::uint8_t>(raw[i + 2])};
      i += 3;
    }
  return img;
}

}  // namespace tabletalk
