#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace hpnn {

// Little-endian binary primitives shared by the model / reference /
// trajectory file formats.
class BinWriter {
 public:
  explicit BinWriter(const std::string& path);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64_array(std::span<const double> v);
  void tag(const char (&magic)[5]);  // 4 chars + NUL
  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64_array(std::span<double> v);
  void expect_tag(const char (&magic)[5], const std::string& what);

 private:
  void need(std::size_t n);
  std::ifstream in_;
  std::string path_;
};

// Minimal CSV emitter: one header row, then data rows; numbers printed
// with round-trip precision so reports are byte-stable given equal inputs.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  static std::string num(double v);

 private:
  std::ofstream out_;
  std::size_t ncols_;
};

bool file_exists(const std::string& path);

}  // namespace hpnn
