#pragma once

// Little-endian encoding helpers shared by the MCF1/MSG1/PMP1/SVM1 formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morseunc/errors.hpp"

namespace morseunc::binary {

using Bytes = std::vector<std::uint8_t>;

class Writer {
 public:
  void magic(std::string_view tag) { bytes_.insert(bytes_.end(), tag.begin(), tag.end()); }

  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }

  Bytes take() { return std::move(bytes_); }
  std::size_t size() const { return bytes_.size(); }
  void reserve(std::size_t n) { bytes_.reserve(n); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(std::string_view tag) {
    need(tag.size(), "truncated magic");
    if (std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0) {
      throw FormatError("bad magic, expected \"" + std::string(tag) + "\"", pos_);
    }
    pos_ += tag.size();
  }

  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2, "truncated u16")); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4, "truncated u32")); }
  float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4, "truncated f32"))); }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(what, pos_);
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) throw FormatError("trailing bytes after payload", pos_);
  }

 private:
  std::uint64_t get(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_text(const std::string& path, std::string_view text);
std::string read_text(const std::string& path);

}  // namespace morseunc::binary
