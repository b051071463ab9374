#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "morseunc/binary_io.hpp"
#include "morseunc/contour.hpp"
#include "morseunc/summary_maps.hpp"

namespace morseunc {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

enum class PaletteKind { categorical, heat, miscellaneous };

/// Colors are stored as 8-bit triples; real components are value / 255.
struct Palette {
  std::vector<Rgb> colors;
  PaletteKind kind = PaletteKind::categorical;
};

/// 16 fixed, well-separated colors.
const Palette& categorical_palette();
/// At least l colors: the 16 fixed ones, then golden-angle hues.
Palette label_palette(std::size_t l);
/// 256-entry blue -> green -> yellow ramp.
const Palette& heat_palette();
/// k colors sampled evenly from the heat ramp (k = 1 gives the low end).
Palette quantized_palette(std::uint32_t k);

struct RGBImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  RGBImage() = default;
  RGBImage(std::size_t w, std::size_t h, Rgb fill = {});
  Rgb at(std::size_t row, std::size_t col) const;
  void set(std::size_t row, std::size_t col, Rgb c);
  bool operator==(const RGBImage&) const = default;
};

/// C(x) = sum_i c_i P_i(x), each channel rounded half up.
RGBImage blend(const ProbabilisticMap& p, const Palette& palette = categorical_palette());

/// Linear ramp over [min, max]; a constant field renders as the lowest color.
RGBImage heatmap(std::span<const double> values, std::size_t width, std::size_t height,
                 const Palette& ramp = heat_palette());

/// Label image; negative labels take `unassigned`.
RGBImage categorical(std::span<const std::int32_t> labels, std::size_t width, std::size_t height,
                     const Palette& palette = categorical_palette(), Rgb unassigned = {255, 255, 255});

/// Bresenham lines between consecutive polyline vertices (rounded to the nearest pixel), clipped.
RGBImage overlay_contours(RGBImage image, const std::vector<Polyline>& lines, Rgb color = {0, 0, 0});

/// PNG with fixed encoder settings (8-bit RGB, no interlace, no ancillary chunks).
binary::Bytes encode_png(const RGBImage& image);
RGBImage decode_png(std::span<const std::uint8_t> bytes);
binary::Bytes encode_ppm(const RGBImage& image);
void write_png(const RGBImage& image, const std::string& path);
void write_ppm(const RGBImage& image, const std::string& path);

}  // namespace morseunc
