// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Byte-level file helpers. Everything on disk is little-endian
// regardless of host order, and reads track their byte offset so format
// errors can say where the file went wrong.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <string>

#include "mtlab/errors.hpp"

namespace mtlab::io {

void write_bytes(std::ostream& out, const void* data, std::size_t n);
void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);

class Reader {
 public:
  Reader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::uint64_t offset() const { return offset_; }
  void read_bytes(void* data, std::size_t n);
  std::uint8_t read_u8();
  std::uint32_t read_u32();
  std::uint64_t read_u64();
  float read_f32();
  double read_f64();
  std::string read_string(std::size_t n);
  void expect_eof();
  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::istream& in_;
  std::string what_;
  std::uint64_t offset_ = 0;
};

// Writes to a temp file in the same directory, then renames into place.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& produce);

}  // namespace mtlab::io
