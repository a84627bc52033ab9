#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace refill3d {

// Float image, row-major, interleaved channels (1 or 3). Values are kept in
// [0,1] by every producer in this library; the container itself does not
// clamp.
class ImageF {
 public:
  ImageF() = default;
  ImageF(int width, int height, int channels) {
    if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
      throw std::invalid_argument("ImageF: invalid dimensions");
    width_ = width;
    height_ = height;
    channels_ = channels;
    data_.assign(static_cast<size_t>(width) * height * channels, 0.0f);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  float at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
  float& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

  size_t index(int x, int y, int c = 0) const {
    return (static_cast<size_t>(y) * width_ + x) * channels_ + c;
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool same_size(const ImageF& o) const {
    return width_ == o.width_ && height_ == o.height_ &&
           channels_ == o.channels_;
  }

  friend bool operator==(const ImageF&, const ImageF&) = default;

 private:
  int width_ = 0, height_ = 0, channels_ = 0;
  std::vector<float> data_;
};

// Binary mask, one byte per pixel, values restricted to {0,1}.
// Convention throughout: for hole masks, 1 = known pixel, 0 = hole.
class MaskImage {
 public:
  MaskImage() = default;
  MaskImage(int width, int height, uint8_t fill = 0) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("MaskImage: invalid dimensions");
    width_ = width;
    height_ = height;
    data_.assign(static_cast<size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }

  uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  uint8_t& at(int x, int y) { return data_[index(x, y)]; }

  size_t index(int x, int y) const {
    return static_cast<size_t>(y) * width_ + x;
  }

  const std::vector<uint8_t>& data() const { return data_; }
  std::vector<uint8_t>& data() { return data_; }

  size_t count_ones() const {
    size_t n = 0;
    for (uint8_t v : data_) n += v;
    return n;
  }

  friend bool operator==(const MaskImage&, const MaskImage&) = default;

 private:
  int width_ = 0, height_ = 0;
  std::vector<uint8_t> data_;
};

// Per-pixel scene depth (camera-frame Z), strictly positive and finite.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, float fill = 1.0f) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("DepthMap: invalid dimensions");
    width_ = width;
    height_ = height;
    data_.assign(static_cast<size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }

  float at(int x, int y) const { return data_[index(x, y)]; }
  float& at(int x, int y) { return data_[index(x, y)]; }

  size_t index(int x, int y) const {
    return static_cast<size_t>(y) * width_ + x;
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  int width_ = 0, height_ = 0;
  std::vector<float> data_;
};

}  // namespace refill3d
