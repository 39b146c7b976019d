#pragma once

// Tagged, length-prefixed binary records.
//
//   record := tag:u8  length:u32 (little endian)  value[length]
//
// Integers are little endian, doubles are IEEE-754 binary64 bit patterns
// stored as u64, strings are raw UTF-8. Nested structures are records whose
// value is itself a sequence of records. Encoding is canonical: the same
// value always produces the same bytes.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pof::wire {

using Bytes = std::vector<std::uint8_t>;

class Writer {
 public:
  Writer& u8(std::uint8_t tag, std::uint8_t v);
  Writer& u32(std::uint8_t tag, std::uint32_t v);
  Writer& u64(std::uint8_t tag, std::uint64_t v);
  Writer& f64(std::uint8_t tag, double v);
  Writer& str(std::uint8_t tag, std::string_view v);
  Writer& bytes(std::uint8_t tag, std::span<const std::uint8_t> v);

  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  void header(std::uint8_t tag, std::size_t length);
  Bytes out_;
};

struct Field {
  std::uint8_t tag;
  std::span<const std::uint8_t> value;

  std::uint8_t as_u8() const;
  std::uint32_t as_u32() const;
  std::uint64_t as_u64() const;
  double as_f64() const;
  std::string as_str() const;
  Bytes as_bytes() const { return {value.begin(), value.end()}; }
};

/// Sequential reader over a record sequence. Throws ProtocolError on
/// truncated input or unexpected tags.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  bool done() const { return pos_ == data_.size(); }
  Field next();
  Field expect(std::uint8_t tag);

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> data);

}  // namespace pof::wire
