#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace kgi {

/// Little-endian primitives shared by the checkpoint formats. Doubles are
/// IEEE-754 binary64 written as their 8-byte bit pattern, least significant
/// byte first; strings are a u32 byte length followed by the raw bytes;
/// matrices are u32 rows, u32 cols, then row-major binary64 values.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(std::string_view s);
  template <typename Derived>
  void matrix(const Eigen::MatrixBase<Derived>& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }
  void vector(const Eigen::VectorXd& v);

 private:
  std::ostream& out_;
};

/// Mirrors BinaryWriter. Throws Error(kParse) on truncated or mismatched
/// input.
class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  void expect_magic(std::string_view tag);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  Eigen::MatrixXd matrix();
  Eigen::VectorXd vector();

 private:
  void read(char* dst, std::size_t n);

  std::istream& in_;
};

}  // namespace kgi
