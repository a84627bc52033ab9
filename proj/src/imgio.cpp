#include "refill3d/imgio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "refill3d/errors.hpp"

namespace refill3d {

namespace {

struct FileHandle {
  FILE* fp = nullptr;
  explicit FileHandle(const std::string& path, const char* mode)
      : fp(std::fopen(path.c_str(), mode)) {}
  ~FileHandle() {
    if (fp) std::fclose(fp);
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
};

// Raw decoded PNG: samples are kept at their stored bit depth so callers can
// enforce depth requirements.
struct DecodedPng {
  int width = 0, height = 0, channels = 0, bit_depth = 0;
  std::vector<uint16_t> samples;
};

DecodedPng decode_png(const std::string& path) {
  FileHandle file(path, "rb");
  if (!file.fp) throw IoError("cannot open file: " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, file.fp) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError("not a PNG file: " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("PNG decoder init failed: " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("PNG decoder init failed: " + path);
  }

  // Heap storage so longjmp from libpng error handling cannot clobber it.
  struct Buffers {
    std::vector<png_byte> raw;
    std::vector<png_bytep> row_ptrs;
    int width = 0, height = 0, channels = 0, bit_depth = 0;
  };
  const auto buf = std::make_unique<Buffers>();

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode PNG: " + path);
  }

  png_init_io(png, file.fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  buf->width = static_cast<int>(png_get_image_width(png, info));
  buf->height = static_cast<int>(png_get_image_height(png, info));
  buf->bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (color_type == PNG_COLOR_TYPE_GRAY) buf->channels = 1;
  if (color_type == PNG_COLOR_TYPE_RGB) buf->channels = 3;
  if (buf->channels == 0 || (buf->bit_depth != 8 && buf->bit_depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported PNG format (need 8/16-bit gray or RGB): " +
                  path);
  }

  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const size_t row_bytes = png_get_rowbytes(png, info);
  buf->raw.assign(row_bytes * buf->height, 0);
  buf->row_ptrs.resize(buf->height);
  for (int y = 0; y < buf->height; ++y)
    buf->row_ptrs[y] = buf->raw.data() + y * row_bytes;
  png_read_image(png, buf->row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  DecodedPng out;
  out.width = buf->width;
  out.height = buf->height;
  out.channels = buf->channels;
  out.bit_depth = buf->bit_depth;
  out.samples.resize(static_cast<size_t>(out.width) * out.height *
                     out.channels);
  if (out.bit_depth == 8) {
    for (size_t i = 0; i < out.samples.size(); ++i)
      out.samples[i] = buf->raw[i];
  } else {
    // PNG 16-bit samples are big-endian.
    for (size_t i = 0; i < out.samples.size(); ++i)
      out.samples[i] =
          static_cast<uint16_t>((buf->raw[2 * i] << 8) | buf->raw[2 * i + 1]);
  }
  return out;
}

bool host_is_little_endian() {
  const uint16_t probe = 1;
  return *reinterpret_cast<const uint8_t*>(&probe) == 1;
}

}  // namespace

ImageF load_png(const std::string& path) {
  const DecodedPng d = decode_png(path);
  ImageF img(d.width, d.height, d.channels);
  const float scale = d.bit_depth == 8 ? 1.0f / 255.0f : 1.0f / 65535.0f;
  for (size_t i = 0; i < d.samples.size(); ++i)
    img.data()[i] = d.samples[i] * scale;
  return img;
}

void save_png(const std::string& path, const ImageF& img) {
  if (img.width() == 0) throw IoError("save_png: empty image: " + path);
  FileHandle file(path, "wb");
  if (!file.fp) throw IoError("cannot open file for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw IoError("PNG encoder init failed: " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("PNG encoder init failed: " + path);
  }

  // Prepared before setjmp and heap-backed for the same reason as reading.
  struct Buffers {
    std::vector<png_byte> raw;
    std::vector<png_bytep> row_ptrs;
  };
  const auto buf = std::make_unique<Buffers>();
  const size_t row_bytes = static_cast<size_t>(img.width()) * img.channels();
  buf->raw.resize(row_bytes * img.height());
  for (size_t i = 0; i < img.data().size(); ++i) {
    const float v = std::clamp(img.data()[i], 0.0f, 1.0f);
    buf->raw[i] = static_cast<png_byte>(std::lround(v * 255.0f));
  }
  buf->row_ptrs.resize(img.height());
  for (int y = 0; y < img.height(); ++y)
    buf->row_ptrs[y] = buf->raw.data() + y * row_bytes;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG: " + path);
  }

  png_init_io(png, file.fp);
  png_set_compression_level(png, 6);
  const int color_type =
      img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, img.width(), img.height(), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, buf->row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

DepthMap load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);

  std::string magic;
  in >> magic;
  if (magic == "PF")
    throw IoError("color PFM not supported (need grayscale \"Pf\"): " + path);
  if (magic != "Pf") throw IoError("not a PFM file: " + path);

  int width = 0, height = 0;
  double scale = 0.0;
  in >> width >> height >> scale;
  if (!in || width <= 0 || height <= 0 || scale == 0.0)
    throw IoError("malformed PFM header: " + path);
  in.get();  // single whitespace byte separating header from data

  std::vector<float> data(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!in) throw IoError("truncated PFM data: " + path);

  const bool file_little = scale < 0.0;
  if (file_little != host_is_little_endian()) {
    for (float& f : data) {
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      bits = __builtin_bswap32(bits);
      std::memcpy(&f, &bits, 4);
    }
  }

  // PFM rows run bottom to top.
  DepthMap depth(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      depth.at(x, y) = data[static_cast<size_t>(height - 1 - y) * width + x];

  for (float v : depth.data())
    if (!(v > 0.0f) || !std::isfinite(v))
      throw IoError("depth must be positive and finite: " + path);
  return depth;
}

void save_pfm(const std::string& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << "Pf\n" << depth.width() << " " << depth.height() << "\n-1.0\n";

  const bool host_little = host_is_little_endian();
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x) {
      float v = depth.at(x, y);
      if (!host_little) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        bits = __builtin_bswap32(bits);
        std::memcpy(&v, &bits, 4);
      }
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
  if (!out) throw IoError("failed to write PFM: " + path);
}

MaskImage load_mask(const std::string& path) {
  const DecodedPng d = decode_png(path);
  if (d.channels != 1 || d.bit_depth != 8)
    throw IoError("mask must be an 8-bit grayscale PNG: " + path);
  MaskImage mask(d.width, d.height, 0);
  for (size_t i = 0; i < d.samples.size(); ++i)
    mask.data()[i] = d.samples[i] >= 128 ? 1 : 0;
  return mask;
}

void save_mask(const std::string& path, const MaskImage& mask) {
  ImageF img(mask.width(), mask.height(), 1);
  for (size_t i = 0; i < mask.data().size(); ++i)
    img.data()[i] = mask.data()[i] ? 1.0f : 0.0f;
  save_png(path, img);
}

std::vector<std::string> save_outputs(const std::string& dir,
                                      const OutputBundle& bundle) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);

  std::vector<std::string> written;
  const auto join = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  const auto write_json = [&](const char* name, const nlohmann::json& j) {
    const std::string p = join(name);
    std::ofstream out(p);
    if (!out) throw IoError("cannot open file for writing: " + p);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed to write JSON: " + p);
    written.push_back(p);
  };

  if (bundle.coarse) {
    save_png(join("coarse.png"), *bundle.coarse);
    written.push_back(join("coarse.png"));
  }
  if (bundle.fine) {
    save_png(join("fine.png"), *bundle.fine);
    written.push_back(join("fine.png"));
  }
  if (bundle.valid) {
    save_mask(join("valid.png"), *bundle.valid);
    written.push_back(join("valid.png"));
  }
  if (bundle.filled) {
    save_png(join("filled.png"), *bundle.filled);
    written.push_back(join("filled.png"));
  }
  if (bundle.result) {
    save_png(join("result.png"), *bundle.result);
    written.push_back(join("result.png"));
  }
  if (bundle.pose) write_json("pose.json", *bundle.pose);
  if (bundle.se2) write_json("se2.json", *bundle.se2);
  if (bundle.metrics) write_json("metrics.json", *bundle.metrics);
  return written;
}

}  // namespace refill3d
