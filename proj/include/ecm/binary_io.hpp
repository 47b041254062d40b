#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecm/errors.hpp"

namespace ecm {

// Little-endian frame writer. All multi-byte fields are emitted low byte
// first regardless of host order.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put_le(v, 2); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void magic(std::string_view tag) {
    buf_.insert(buf_.end(), tag.begin(), tag.end());
  }
  void bytes(std::span<const std::uint8_t> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
  }
  // u32 length prefix followed by the payload.
  void blob(std::span<const std::uint8_t> data) {
    u32(static_cast<std::uint32_t>(data.size()));
    bytes(data);
  }

  std::size_t size() const { return buf_.size(); }
  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void put_le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) {
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  double f64() { return std::bit_cast<double>(u64()); }

  void expect_magic(std::string_view tag) {
    need(tag.size());
    if (std::memcmp(data_.data() + pos_, tag.data(), tag.size()) != 0) {
      throw FormatError("bad frame magic, expected '" + std::string(tag) + "'");
    }
    pos_ += tag.size();
  }

  std::span<const std::uint8_t> blob() {
    std::uint32_t len = u32();
    need(len);
    auto out = data_.subspan(pos_, len);
    pos_ += len;
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  // Sanity bound for element counts read from untrusted frames.
  std::size_t count(std::size_t element_bytes) {
    std::uint32_t n = u32();
    if (element_bytes != 0 && n > remaining() / element_bytes) {
      throw FormatError("frame element count exceeds payload");
    }
    return n;
  }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) throw FormatError("truncated frame");
  }
  std::uint64_t get_le(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace ecm
