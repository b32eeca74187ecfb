#include "hpnn/io_util.hpp"

#include <cstdio>
#include <cstring>

#include "hpnn/errors.hpp"

namespace hpnn {

namespace {

// All supported targets are little-endian; keep the byte-order explicit
// anyway so the formats stay portable.
template <class T>
void put_le(std::ofstream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::ifstream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

}  // namespace

BinWriter::BinWriter(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw DataError("cannot open for writing: " + path);
}
void BinWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
void BinWriter::u32(std::uint32_t v) { put_le(out_, v); }
void BinWriter::u64(std::uint64_t v) { put_le(out_, v); }
void BinWriter::f64(double v) { put_le(out_, v); }
void BinWriter::f64_array(std::span<const double> v) {
  for (double x : v) f64(x);
}
void BinWriter::tag(const char (&magic)[5]) { out_.write(magic, 4); }

BinReader::BinReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw DataError("cannot open for reading: " + path_);
}
void BinReader::need(std::size_t) {
  if (!in_.good()) throw DataError("truncated or unreadable file: " + path_);
}
std::uint8_t BinReader::u8() {
  need(1);
  const int c = in_.get();
  if (c < 0) throw DataError("truncated file: " + path_);
  return static_cast<std::uint8_t>(c);
}
std::uint32_t BinReader::u32() {
  need(4);
  const auto v = get_le<std::uint32_t>(in_);
  if (!in_.good()) throw DataError("truncated file: " + path_);
  return v;
}
std::uint64_t BinReader::u64() {
  need(8);
  const auto v = get_le<std::uint64_t>(in_);
  if (!in_.good()) throw DataError("truncated file: " + path_);
  return v;
}
double BinReader::f64() {
  need(8);
  const auto v = get_le<double>(in_);
  if (!in_.good()) throw DataError("truncated file: " + path_);
  return v;
}
void BinReader::f64_array(std::span<double> v) {
  for (double& x : v) x = f64();
}
void BinReader::expect_tag(const char (&magic)[5], const std::string& what) {
  char buf[4];
  in_.read(buf, 4);
  if (!in_.good() || std::memcmp(buf, magic, 4) != 0)
    throw DataError("not a " + what + " file: " + path_);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path), ncols_(columns.size()) {
  if (!out_) throw DataError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != ncols_) throw DataError("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
}

std::string CsvWriter::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool file_exists(const std::string& path) {
  std::ifstream f(path);
  return f.good();
}

}  // namespace hpnn
