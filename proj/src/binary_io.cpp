#include "kgi/binary_io.hpp"

#include <array>
#include <bit>

#include "kgi/error.hpp"

namespace kgi {
namespace {

// Guards against absurd sizes from corrupted headers.
constexpr std::uint32_t kMaxLength = 1u << 30;

}  // namespace

void BinaryWriter::magic(std::string_view tag) {
  out_.write(tag.data(), static_cast<std::streamsize>(tag.size()));
}

void BinaryWriter::u32(std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out_.write(b.data(), b.size());
}

void BinaryWriter::u64(std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out_.write(b.data(), b.size());
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::vector(const Eigen::VectorXd& v) {
  u32(static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
}

void BinaryReader::read(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw Error(ErrorCode::kParse, "truncated checkpoint");
  }
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  read(got.data(), got.size());
  if (got != tag) {
    throw Error(ErrorCode::kParse,
                "bad checkpoint magic, expected '" + std::string(tag) + "'");
  }
}

std::uint32_t BinaryReader::u32() {
  std::array<unsigned char, 4> b{};
  read(reinterpret_cast<char*>(b.data()), b.size());
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t BinaryReader::u64() {
  std::array<unsigned char, 8> b{};
  read(reinterpret_cast<char*>(b.data()), b.size());
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  if (n > kMaxLength) throw Error(ErrorCode::kParse, "string too long");
  std::string s(n, '\0');
  read(s.data(), n);
  return s;
}

Eigen::MatrixXd BinaryReader::matrix() {
  const std::uint32_t rows = u32();
  const std::uint32_t cols = u32();
  if (static_cast<std::uint64_t>(rows) * cols > kMaxLength) {
    throw Error(ErrorCode::kParse, "matrix too large");
  }
  Eigen::MatrixXd m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = f64();
  }
  return m;
}

Eigen::VectorXd BinaryReader::vector() {
  const std::uint32_t n = u32();
  if (n > kMaxLength) throw Error(ErrorCode::kParse, "vector too large");
  Eigen::VectorXd v(n);
  for (std::uint32_t i = 0; i < n; ++i) v[i] = f64();
  return v;
}

}  // namespace kgi
