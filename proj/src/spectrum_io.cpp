#include <array>
#include <bit>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>

#include "skelfreq/transforms.hpp"

namespace skelfreq {
namespace {

static_assert(std::endian::native == std::endian::little, "binary spectrum dumps assume a little-endian host");

constexpr std::array<char, 4> magic = {'J', 'F', 'T', 'S'};

void write_header(std::ostream& out, std::size_t rows, std::size_t cols, std::uint32_t flags) {
  const std::uint32_t fields[3] = {static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(cols), flags};
  out.write(magic.data(), magic.size());
  out.write(reinterpret_cast<const char*>(fields), sizeof(fields));
}

void write_doubles(std::ostream& out, std::span<const double> values) {
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  require(static_cast<bool>(out), ErrorKind::format, "failed to write spectrum payload");
}

}  // namespace

void write_spectrum_binary(std::ostream& out, const ComplexMatrix& spectrum) {
  write_header(out, spectrum.rows(), spectrum.cols(), spectrum_flag_complex);
  write_doubles(out, spectrum.interleaved());
}

void write_spectrum_binary(std::ostream& out, const Matrix& magnitudes) {
  write_header(out, magnitudes.rows(), magnitudes.cols(), 0);
  write_doubles(out, magnitudes.values());
}

ComplexMatrix read_spectrum_binary(std::istream& in, std::uint32_t* flags_out) {
  std::array<char, 4> got{};
  std::uint32_t fields[3] = {};
  in.read(got.data(), got.size());
  in.read(reinterpret_cast<char*>(fields), sizeof(fields));
  require(static_cast<bool>(in), ErrorKind::format, "truncated spectrum header");
  require(got == magic, ErrorKind::format, "bad spectrum magic");
  const std::size_t rows = fields[0];
  const std::size_t cols = fields[1];
  const std::uint32_t flags = fields[2];
  require((flags & ~spectrum_flag_complex) == 0, ErrorKind::format, "unknown spectrum flags");
  if (flags_out != nullptr) *flags_out = flags;

  ComplexMatrix out(rows, cols);
  if ((flags & spectrum_flag_complex) != 0) {
    auto dst = out.interleaved();
    in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size_bytes()));
  } else {
    std::vector<double> buffer(rows * cols);
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size() * sizeof(double)));
    for (std::size_t i = 0; i < buffer.size(); ++i) out.set(i / cols, i % cols, buffer[i]);
  }
  require(static_cast<bool>(in), ErrorKind::format, "truncated spectrum payload");
  return out;
}

void write_magnitude_csv(std::ostream& out, const Matrix& magnitudes) {
  out << std::setprecision(17);
  for (std::size_t r = 0; r < magnitudes.rows(); ++r) {
    for (std::size_t c = 0; c < magnitudes.cols(); ++c) {
      if (c != 0) out << ',';
      out << magnitudes(r, c);
    }
    out << '\n';
  }
}

}  // namespace skelfreq
