// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/io.hpp"

#include <cstring>
#include <fstream>

namespace mtlab::io {

namespace {

template <typename T>
void store_le(std::uint8_t* out, T v) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out[i] = static_cast<std::uint8_t>(bits >> (8 * i));
}

template <typename T>
T load_le(const std::uint8_t* in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<U>(in[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

}  // namespace

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw FormatError("write failed");
}

void write_u8(std::ostream& out, std::uint8_t v) { write_bytes(out, &v, 1); }

void write_u32(std::ostream& out, std::uint32_t v) {
  std::uint8_t b[4];
  store_le(b, v);
  write_bytes(out, b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  std::uint8_t b[8];
  store_le(b, v);
  write_bytes(out, b, 8);
}

void write_f32(std::ostream& out, float v) {
  std::uint8_t b[4];
  store_le(b, v);
  write_bytes(out, b, 4);
}

void write_f64(std::ostream& out, double v) {
  std::uint8_t b[8];
  store_le(b, v);
  write_bytes(out, b, 8);
}

void Reader::read_bytes(void* data, std::size_t n) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n)
    fail("truncated: wanted " + std::to_string(n) + " bytes");
  offset_ += n;
}

std::uint8_t Reader::read_u8() {
  std::uint8_t v;
  read_bytes(&v, 1);
  return v;
}

std::uint32_t Reader::read_u32() {
  std::uint8_t b[4];
  read_bytes(b, 4);
  return load_le<std::uint32_t>(b);
}

std::uint64_t Reader::read_u64() {
  std::uint8_t b[8];
  read_bytes(b, 8);
  return load_le<std::uint64_t>(b);
}

float Reader::read_f32() {
  std::uint8_t b[4];
  read_bytes(b, 4);
  return load_le<float>(b);
}

double Reader::read_f64() {
  std::uint8_t b[8];
  read_bytes(b, 8);
  return load_le<double>(b);
}

std::string Reader::read_string(std::size_t n) {
  std::string s(n, '\0');
  read_bytes(s.data(), n);
  return s;
}

void Reader::expect_eof() {
  char extra;
  in_.read(&extra, 1);
  if (in_.gcount() != 0) fail("trailing bytes after the expected end");
}

void Reader::fail(const std::string& message) const {
  throw FormatError(what_ + ": " + message + " at byte offset " +
                    std::to_string(offset_));
}

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& produce) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    produce(out);
    out.flush();
    if (!out) throw FormatError("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mtlab::io
