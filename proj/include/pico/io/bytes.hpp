#pragma once

#include "pico/common.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace pico {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// Bounds-checked little-endian reader; errors report the byte offset.
class ByteReader {
 public:
  ByteReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  template <class T>
  T read() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view bytes(size_t n) {
    need(n);
    const std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  /// u32 length followed by that many bytes.
  std::string string() {
    const auto n = read<std::uint32_t>();
    return std::string(bytes(n));
  }

  void expect_end() const {
    if (!at_end()) fail(std::to_string(remaining()) + " trailing bytes");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::ParseError, what_ + ": " + msg + " at byte " + std::to_string(pos_));
  }

 private:
  void need(size_t n) const {
    if (remaining() < n) fail("unexpected end of data, need " + std::to_string(n) + " bytes");
  }

  std::string_view data_;
  std::string what_;
  size_t pos_ = 0;
};

class ByteWriter {
 public:
  template <class T>
  void write(T v) {
    const char* p = reinterpret_cast<const char*>(&v);
    out_.append(p, sizeof(T));
  }
  void bytes(std::string_view s) { out_.append(s); }
  void string(std::string_view s) {
    write(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  const std::string& data() const { return out_; }

 private:
  std::string out_;
};

/// Whole file contents. Throws IoError.
std::string read_file(const std::string& path);
/// Throws IoError.
void write_file(const std::string& path, std::string_view data);

}  // namespace pico
