#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "blips/complex_image.hpp"
#include "blips/denoiser.hpp"
#include "blips/dictionary.hpp"
#include "blips/multicoil.hpp"

// .ctz tensors: a JSON header line {"dtype", "shape", "version"} followed by a
// little-endian payload. c64 is interleaved float32 real/imag, f32 is float32,
// b8 is one byte per element.
namespace blips::ctz {

enum class DType
{
  c64,
  f32,
  b8,
};

struct Header
{
  int version = 1;
  DType dtype = DType::c64;
  std::vector<std::size_t> shape;

  std::size_t elements() const;
};

std::string to_string(DType dtype);
DType parse_dtype(const std::string &name);

void write_c64(const std::filesystem::path &path, const std::vector<std::size_t> &shape, const std::vector<cplx> &values);
void write_f32(const std::filesystem::path &path, const std::vector<std::size_t> &shape,
               const std::vector<double> &values);
void write_b8(const std::filesystem::path &path, const std::vector<std::size_t> &shape,
              const std::vector<std::uint8_t> &values);

Header read_header(const std::filesystem::path &path);
std::vector<cplx> read_c64(const std::filesystem::path &path, Header *header = nullptr);
std::vector<double> read_f32(const std::filesystem::path &path, Header *header = nullptr);
std::vector<std::uint8_t> read_b8(const std::filesystem::path &path, Header *header = nullptr);

void write_image(const std::filesystem::path &path, const ComplexImage &img);
ComplexImage read_image(const std::filesystem::path &path);

// [n_coils, height, width]
void write_stack(const std::filesystem::path &path, const std::vector<ComplexImage> &stack);
std::vector<ComplexImage> read_stack(const std::filesystem::path &path);

void write_mask(const std::filesystem::path &path, const SamplingMask &mask);
SamplingMask read_mask(const std::filesystem::path &path);

// [r, U]
void write_dictionary(const std::filesystem::path &path, const Dictionary &dict);
Dictionary read_dictionary(const std::filesystem::path &path);

// Directory holding manifest.json and layerN_weight.ctz / layerN_bias.ctz (f32).
void save_params(const std::filesystem::path &dir, const DenoiserParams &params);
DenoiserParams load_params(const std::filesystem::path &dir);

// 8-bit binary graymap, min-max windowed.
void write_pgm(const std::filesystem::path &path, const std::vector<double> &values, std::size_t height,
               std::size_t width);
void write_pgm(const std::filesystem::path &path, const std::vector<double> &values, std::size_t height,
               std::size_t width, double lo, double hi);
void write_magnitude_pgm(const std::filesystem::path &path, const ComplexImage &img);
// 5 |xhat - xtrue|, windowed with the reference's magnitude range.
void write_error_pgm(const std::filesystem::path &path, const ComplexImage &xhat, const ComplexImage &xtrue);
// Plain bitmap, sampled = black.
void write_pbm(const std::filesystem::path &path, const SamplingMask &mask);

} // namespace blips::ctz
