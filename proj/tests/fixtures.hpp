#pragma once

#include <cmath>
#include <vector>

#include "morseunc/grid.hpp"

namespace fixture {

struct Bump {
  double row, col, sigma, amplitude;
};

inline morseunc::ScalarGrid bumps(std::size_t w, std::size_t h, const std::vector<Bump>& list) {
  std::vector<float> v(w * h);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double s = 0.0;
      for (const auto& b : list) {
        const double dr = double(r) - b.row, dc = double(c) - b.col;
        s += b.amplitude * std::exp(-(dr * dr + dc * dc) / (2.0 * b.sigma * b.sigma));
      }
      v[r * w + c] = static_cast<float>(s);
    }
  }
  return morseunc::ScalarGrid(w, h, std::move(v));
}

// 1D profile repeated along a middle row, walls of +wall above and below.
inline morseunc::ScalarGrid ridge(const std::vector<float>& profile, float wall) {
  const std::size_t w = profile.size();
  std::vector<float> v(3 * w);
  for (std::size_t c = 0; c < w; ++c) {
    v[c] = profile[c] + wall;
    v[w + c] = profile[c];
    v[2 * w + c] = profile[c] + wall;
  }
  return morseunc::ScalarGrid(w, 3, std::move(v));
}

inline morseunc::ScalarGrid from_rows(const std::vector<std::vector<float>>& rows) {
  std::vector<float> v;
  for (const auto& r : rows) v.insert(v.end(), r.begin(), r.end());
  return morseunc::ScalarGrid(rows.front().size(), rows.size(), std::move(v));
}

}  // namespace fixture
