#include "rlab/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "rlab/error.hpp"

namespace rlab {

std::vector<unsigned char> quantize_pixels(const DenseArray& image) {
  const auto dims = image.shape().dims();
  if (dims.size() != 3 || dims[0] != 3) fail(ErrorKind::dimension, "image must be [3 x H x W], got " + image.shape().str());
  const auto h = static_cast<std::size_t>(dims[1]), w = static_cast<std::size_t>(dims[2]);
  std::vector<unsigned char> out(3 * h * w);
  const float* src = image.data();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const float v = std::clamp(src[(c * h + y) * w + x], 0.0f, 1.0f);
        out[(y * w + x) * 3 + c] = static_cast<unsigned char>(std::lround(v * 255.0f));
      }
    }
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const DenseArray& image) {
  const auto bytes = quantize_pixels(image);
  const auto dims = image.shape().dims();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << "P6\n" << dims[2] << " " << dims[1] << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io, "short write to " + path.string());
}

DenseArray read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::missing_artifact, "cannot open " + path.string());
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w == 0 || h == 0 || w > 65536 || h > 65536 || maxval != 255) fail(ErrorKind::io, "unsupported PPM header in " + path.string());
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> bytes(3 * w * h);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) fail(ErrorKind::io, "truncated PPM " + path.string());
  DenseArray img(Shape{3, static_cast<int>(h), static_cast<int>(w)});
  float* dst = img.data();
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) dst[(c * h + y) * w + x] = static_cast<float>(bytes[(y * w + x) * 3 + c]) / 255.0f;
  return img;
}

}  // namespace rlab
