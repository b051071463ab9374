#include "morseunc/render.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>

#include <png.h>

namespace morseunc {

namespace {

constexpr Rgb kHeat[256] = {
#include "heat_lut.inc"
};

std::uint8_t channel(const Rgb& c, int k) { return k == 0 ? c.r : k == 1 ? c.g : c.b; }

void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<binary::Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_consume(png_structp png, png_bytep data, png_size_t length) {
  auto* in = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (in->bytes.size() - in->pos < length) png_error(png, "truncated PNG");
  std::memcpy(data, in->bytes.data() + in->pos, length);
  in->pos += length;
}

void png_fail(png_structp png, png_const_charp) { png_longjmp(png, 1); }

void png_quiet(png_structp, png_const_charp) {}

void draw_line(RGBImage& img, long r0, long c0, long r1, long c1, Rgb color) {
  const long dr = std::abs(r1 - r0), dc = std::abs(c1 - c0);
  const long sr = r0 < r1 ? 1 : -1, sc = c0 < c1 ? 1 : -1;
  long err = dc - dr;
  while (true) {
    if (r0 >= 0 && c0 >= 0 && r0 < long(img.height) && c0 < long(img.width)) img.set(r0, c0, color);
    if (r0 == r1 && c0 == c1) break;
    const long e2 = 2 * err;
    if (e2 > -dr) {
      err -= dr;
      c0 += sc;
    }
    if (e2 < dc) {
      err += dc;
      r0 += sr;
    }
  }
}

}  // namespace

const Palette& categorical_palette() {
  static const Palette p{{{230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
                          {245, 130, 48},  {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
                          {210, 245, 60},  {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
                          {170, 110, 40},  {255, 250, 200}, {128, 0, 0},    {170, 255, 195}},
                         PaletteKind::categorical};
  return p;
}

Palette label_palette(std::size_t l) {
  Palette p = categorical_palette();
  for (std::size_t i = p.colors.size(); i < l; ++i) {
    const double h = std::fmod(double(i) * 137.507764, 360.0) / 60.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    const double rgb[6][3] = {{1, x, 0}, {x, 1, 0}, {0, 1, x}, {0, x, 1}, {x, 0, 1}, {1, 0, x}};
    const auto& c = rgb[static_cast<int>(h) % 6];
    auto byte = [](double v) { return static_cast<std::uint8_t>(std::floor(40.0 + 180.0 * v + 0.5)); };
    p.colors.push_back({byte(c[0]), byte(c[1]), byte(c[2])});
  }
  return p;
}

const Palette& heat_palette() {
  static const Palette p{std::vector<Rgb>(std::begin(kHeat), std::end(kHeat)), PaletteKind::heat};
  return p;
}

Palette quantized_palette(std::uint32_t k) {
  if (k == 0) throw ArgumentError("palette needs at least one color");
  Palette p{{}, PaletteKind::heat};
  for (std::uint32_t i = 0; i < k; ++i) {
    const std::uint32_t at = k == 1 ? 0 : (i * 255 * 2 + (k - 1)) / (2 * (k - 1));
    p.colors.push_back(kHeat[at]);
  }
  return p;
}

RGBImage::RGBImage(std::size_t w, std::size_t h, Rgb fill) : width(w), height(h), pixels(w * h * 3) {
  for (std::size_t i = 0; i < w * h; ++i) {
    pixels[3 * i] = fill.r;
    pixels[3 * i + 1] = fill.g;
    pixels[3 * i + 2] = fill.b;
  }
}

Rgb RGBImage::at(std::size_t row, std::size_t col) const {
  const std::size_t i = 3 * (row * width + col);
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RGBImage::set(std::size_t row, std::size_t col, Rgb c) {
  const std::size_t i = 3 * (row * width + col);
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

RGBImage blend(const ProbabilisticMap& p, const Palette& palette) {
  if (palette.colors.size() < p.l) {
    throw ArgumentError("palette has " + std::to_string(palette.colors.size()) + " colors, need " +
                        std::to_string(p.l));
  }
  RGBImage img(p.width, p.height);
  for (VertexId v = 0; v < p.size(); ++v) {
    const auto counts = p.at(v);
    for (int k = 0; k < 3; ++k) {
      std::uint64_t sum = 0;
      for (std::uint32_t i = 0; i < p.l; ++i) sum += std::uint64_t(channel(palette.colors[i], k)) * counts[i];
      img.pixels[3 * v + k] = static_cast<std::uint8_t>((2 * sum + p.n) / (2 * std::uint64_t(p.n)));
    }
  }
  return img;
}

RGBImage heatmap(std::span<const double> values, std::size_t width, std::size_t height, const Palette& ramp) {
  if (values.size() != width * height) throw ArgumentError("heat map values do not match the dimensions");
  if (ramp.colors.empty()) throw ArgumentError("empty palette");
  RGBImage img(width, height);
  if (values.empty()) return img;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, span = *hi - *lo;
  const double top = double(ramp.colors.size() - 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = span > 0.0 ? (values[i] - min) / span : 0.0;
    const auto k = static_cast<std::size_t>(std::floor(t * top + 0.5));
    img.set(i / width, i % width, ramp.colors[std::min(k, ramp.colors.size() - 1)]);
  }
  return img;
}

RGBImage categorical(std::span<const std::int32_t> labels, std::size_t width, std::size_t height,
                     const Palette& palette, Rgb unassigned) {
  if (labels.size() != width * height) throw ArgumentError("label image does not match the dimensions");
  RGBImage img(width, height, unassigned);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    if (std::size_t(labels[i]) >= palette.colors.size()) {
      throw ArgumentError("label " + std::to_string(labels[i]) + " exceeds the palette");
    }
    img.set(i / width, i % width, palette.colors[std::size_t(labels[i])]);
  }
  return img;
}

RGBImage overlay_contours(RGBImage image, const std::vector<Polyline>& lines, Rgb color) {
  auto px = [](double x) { return static_cast<long>(std::floor(x + 0.5)); };
  for (const auto& line : lines) {
    if (line.size() == 1) draw_line(image, px(line[0].row), px(line[0].col), px(line[0].row), px(line[0].col), color);
    for (std::size_t i = 1; i < line.size(); ++i) {
      draw_line(image, px(line[i - 1].row), px(line[i - 1].col), px(line[i].row), px(line[i].col), color);
    }
  }
  return image;
}

binary::Bytes encode_png(const RGBImage& image) {
  if (image.width == 0 || image.height == 0) throw ArgumentError("cannot encode an empty image");
  binary::Bytes out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_quiet);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: out of memory");
  }
  std::vector<png_bytep> rows(image.height);
  for (std::size_t r = 0; r < image.height; ++r) rows[r] = const_cast<png_bytep>(image.pixels.data() + 3 * r * image.width);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: encoding failed");
  }
  png_set_write_fn(png, &out, png_append, nullptr);
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE | PNG_FILTER_SUB | PNG_FILTER_UP | PNG_FILTER_AVG | PNG_FILTER_PAETH);
  png_set_IHDR(png, info, png_uint_32(image.width), png_uint_32(image.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

RGBImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw FormatError("not a PNG file", 0);
  ReadCursor cursor{bytes, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_quiet);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png: out of memory");
  }
  RGBImage img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("malformed PNG", cursor.pos);
  }
  png_set_read_fn(png, &cursor, png_consume);
  png_read_png(png, info, PNG_TRANSFORM_STRIP_16 | PNG_TRANSFORM_PACKING | PNG_TRANSFORM_EXPAND, nullptr);
  const auto w = png_get_image_width(png, info), h = png_get_image_height(png, info);
  const int type = png_get_color_type(png, info);
  if (type != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("only 8-bit RGB PNG files are supported", 0);
  }
  img = RGBImage(w, h);
  png_bytepp rows = png_get_rows(png, info);
  for (std::size_t r = 0; r < h; ++r) std::memcpy(img.pixels.data() + 3 * r * w, rows[r], 3 * w);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

binary::Bytes encode_ppm(const RGBImage& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  binary::Bytes out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_png(const RGBImage& image, const std::string& path) { binary::write_file(path, encode_png(image)); }

void write_ppm(const RGBImage& image, const std::string& path) { binary::write_file(path, encode_ppm(image)); }

}  // namespace morseunc
