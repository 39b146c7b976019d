#include "pof/wire.hpp"

#include <bit>
#include <limits>

#include "pof/error.hpp"

namespace pof::wire {

namespace {

void put_le(Bytes& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t width) {
  if (in.size() != width) throw ProtocolError("field has wrong width");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

}  // namespace

void Writer::header(std::uint8_t tag, std::size_t length) {
  if (length > std::numeric_limits<std::uint32_t>::max()) throw ProtocolError("record too long");
  out_.push_back(tag);
  put_le(out_, length, 4);
}

Writer& Writer::u8(std::uint8_t tag, std::uint8_t v) {
  header(tag, 1);
  out_.push_back(v);
  return *this;
}

Writer& Writer::u32(std::uint8_t tag, std::uint32_t v) {
  header(tag, 4);
  put_le(out_, v, 4);
  return *this;
}

Writer& Writer::u64(std::uint8_t tag, std::uint64_t v) {
  header(tag, 8);
  put_le(out_, v, 8);
  return *this;
}

Writer& Writer::f64(std::uint8_t tag, double v) { return u64(tag, std::bit_cast<std::uint64_t>(v)); }

Writer& Writer::str(std::uint8_t tag, std::string_view v) {
  header(tag, v.size());
  out_.insert(out_.end(), v.begin(), v.end());
  return *this;
}

Writer& Writer::bytes(std::uint8_t tag, std::span<const std::uint8_t> v) {
  header(tag, v.size());
  out_.insert(out_.end(), v.begin(), v.end());
  return *this;
}

std::uint8_t Field::as_u8() const { return static_cast<std::uint8_t>(get_le(value, 1)); }
std::uint32_t Field::as_u32() const { return static_cast<std::uint32_t>(get_le(value, 4)); }
std::uint64_t Field::as_u64() const { return get_le(value, 8); }
double Field::as_f64() const { return std::bit_cast<double>(get_le(value, 8)); }
std::string Field::as_str() const { return {value.begin(), value.end()}; }

Field Reader::next() {
  if (data_.size() - pos_ < 5) throw ProtocolError("truncated record header");
  const std::uint8_t tag = data_[pos_];
  const auto length = static_cast<std::size_t>(get_le(data_.subspan(pos_ + 1, 4), 4));
  pos_ += 5;
  if (data_.size() - pos_ < length) throw ProtocolError("truncated record value");
  Field f{tag, data_.subspan(pos_, length)};
  pos_ += length;
  return f;
}

Field Reader::expect(std::uint8_t tag) {
  Field f = next();
  if (f.tag != tag) throw ProtocolError("unexpected record tag " + std::to_string(f.tag));
  return f;
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xF]);
  }
  return s;
}

}  // namespace pof::wire
