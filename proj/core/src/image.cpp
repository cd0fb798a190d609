#include "lte/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "lte/error.hpp"

namespace lte {

Image::Image(int h, int w, float fill) : height(h), width(w) {
  if (h < 1 || w < 1) throw InvalidArgument("image dims must be positive");
  data.assign(3 * static_cast<std::size_t>(h) * w, fill);
}

Image crop(const Image& img, int y, int x, int h, int w) {
  if (y < 0 || x < 0 || h < 1 || w < 1 || y + h > img.height || x + w > img.width) {
    throw InvalidArgument("crop outside image");
  }
  Image out(h, w);
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < h; ++r) {
      std::copy_n(&img.data[(static_cast<std::size_t>(c) * img.height + y + r) * img.width + x], w, &out.at(c, r, 0));
    }
  }
  return out;
}

Image clip01(const Image& img) {
  Image out = img;
  for (float& v : out.data) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

std::vector<float> grayscale(const Image& img) {
  std::vector<float> out(img.plane());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (img.data[i] + img.data[img.plane() + i] + img.data[2 * img.plane() + i]) / 3.0f;
  }
  return out;
}

Tensor to_model_space(const Image& img) {
  Tensor t = Tensor::zeros({3, img.height, img.width});
  auto d = t.data();
  for (std::size_t i = 0; i < img.data.size(); ++i) d[i] = img.data[i] - 0.5f;
  return t;
}

Image from_model_space(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != 3) throw InvalidArgument("from_model_space: expected 3 x H x W");
  Image img(static_cast<int>(t.dim(1)), static_cast<int>(t.dim(2)));
  const auto d = t.data();
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = d[i] + 0.5f;
  return img;
}

namespace {

std::uint8_t quantize(float v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") throw IoError(path.string() + ": not a binary PPM (P6)");
  int w = 0, h = 0, maxval = 0;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  if (!in || w < 1 || h < 1 || maxval != 255) throw IoError(path.string() + ": unsupported PPM header");
  in.get();
  std::vector<unsigned char> bytes(3 * static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw IoError(path.string() + ": truncated PPM payload");
  Image img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = bytes[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0f;
    }
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> bytes(3 * img.plane());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) bytes[(static_cast<std::size_t>(y) * img.width + x) * 3 + c] = quantize(img.at(c, y, x));
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw IoError(path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> bytes(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw IoError(path.string() + ": " + message);
  }
  const int w = static_cast<int>(png.width), h = static_cast<int>(png.height);
  Image img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = bytes[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0f;
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  std::vector<unsigned char> bytes(3 * img.plane());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) bytes[(static_cast<std::size_t>(y) * img.width + x) * 3 + c] = quantize(img.at(c, y, x));
    }
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + png.message);
  }
}

Image read_image(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path.string());
  unsigned char head[8] = {};
  const std::size_t n = std::fread(head, 1, sizeof head, f.get());
  f.reset();
  if (n >= 8 && png_sig_cmp(head, 0, 8) == 0) return read_png(path);
  if (n >= 2 && head[0] == 'P' && head[1] == '6') return read_ppm(path);
  throw IoError(path.string() + ": unrecognized image format (expected PNG or P6 PPM)");
}

void write_image(const std::filesystem::path& path, const Image& img) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, img);
  if (ext == ".ppm") return write_ppm(path, img);
  throw IoError(path.string() + ": unsupported output extension (use .png or .ppm)");
}

}  // namespace lte
