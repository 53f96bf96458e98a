#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexcascade {

/// Appends little-endian fields to a byte buffer.
class ByteWriter {
 public:
  void bytes(std::string_view data) { buffer_.append(data); }
  void u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v);

  const std::string& buffer() const { return buffer_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }

  std::string buffer_;
};

/// Bounds-checked little-endian reader. Every accessor throws MalformedFile
/// (naming `source`) when the buffer runs out.
class ByteReader {
 public:
  ByteReader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

  std::string_view bytes(std::size_t n);
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32();

  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& source() const { return source_; }

 private:
  std::uint64_t get(int width);

  std::string_view data_;
  std::size_t pos_ = 0;
  std::string source_;
};

/// Reads a whole file. Throws IoError if it cannot be opened or read.
std::string read_file(const std::filesystem::path& path);

/// Writes `data` to a sibling temporary file and renames it over `path`, so
/// readers never observe a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace lexcascade
