#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hpfs {

// Row-major 8-bit grayscale raster.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint8_t at(int row, int col) const { return pixels_[row * width_ + col]; }
  std::uint8_t& at(int row, int col) { return pixels_[row * width_ + col]; }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Portable graymap, binary (P5) on write; P2 and P5 accepted on read.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

}  // namespace hpfs
