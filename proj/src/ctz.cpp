#include "blips/ctz.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "blips/errors.hpp"

namespace blips::ctz {
namespace {

static_assert(std::endian::native == std::endian::little, "ctz payloads are written in native little-endian order");

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path &path)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidArgument("cannot open for writing: " + path.string());
  }
  return out;
}

void write_header(std::ofstream &out, DType dtype, const std::vector<std::size_t> &shape)
{
  json header = {{"version", 1}, {"dtype", to_string(dtype)}, {"shape", shape}};
  out << header.dump() << '\n';
}

std::size_t product(const std::vector<std::size_t> &shape)
{
  std::size_t n = 1;
  for (auto s : shape) {
    n *= s;
  }
  return n;
}

Header parse_header(std::ifstream &in, const std::filesystem::path &path)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidArgument("ctz: missing header in " + path.string());
  }
  Header h;
  try {
    const json j = json::parse(line);
    h.version = j.at("version").get<int>();
    h.dtype = parse_dtype(j.at("dtype").get<std::string>());
    h.shape = j.at("shape").get<std::vector<std::size_t>>();
  } catch (const json::exception &e) {
    throw InvalidArgument("ctz: bad header in " + path.string() + ": " + e.what());
  }
  require(h.version == 1, "ctz: unsupported version in " + path.string());
  return h;
}

std::ifstream open_in(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidArgument("cannot open for reading: " + path.string());
  }
  return in;
}

std::vector<char> read_payload(std::ifstream &in, std::size_t bytes, const std::filesystem::path &path)
{
  std::vector<char> buf(bytes);
  in.read(buf.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw InvalidArgument("ctz: truncated payload in " + path.string());
  }
  in.peek();
  require(in.eof(), "ctz: trailing bytes in " + path.string());
  return buf;
}

Header expect(std::ifstream &in, const std::filesystem::path &path, DType dtype)
{
  Header h = parse_header(in, path);
  require(h.dtype == dtype, "ctz: expected dtype " + to_string(dtype) + " in " + path.string());
  return h;
}

void write_floats(std::ofstream &out, const std::vector<float> &vals)
{
  out.write(reinterpret_cast<const char *>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(float)));
}

std::vector<float> to_floats(const std::vector<char> &buf)
{
  std::vector<float> vals(buf.size() / sizeof(float));
  std::memcpy(vals.data(), buf.data(), buf.size());
  return vals;
}

std::vector<std::size_t> checked_shape(const Header &h, std::size_t rank, const std::filesystem::path &path)
{
  require(h.shape.size() == rank, "ctz: expected rank " + std::to_string(rank) + " in " + path.string());
  return h.shape;
}

} // namespace

std::size_t Header::elements() const { return product(shape); }

std::string to_string(DType dtype)
{
  switch (dtype) {
  case DType::c64:
    return "c64";
  case DType::f32:
    return "f32";
  case DType::b8:
    return "b8";
  }
  return "?";
}

DType parse_dtype(const std::string &name)
{
  if (name == "c64") {
    return DType::c64;
  }
  if (name == "f32") {
    return DType::f32;
  }
  if (name == "b8") {
    return DType::b8;
  }
  throw InvalidArgument("ctz: unknown dtype " + name);
}

void write_c64(const std::filesystem::path &path, const std::vector<std::size_t> &shape, const std::vector<cplx> &values)
{
  require(product(shape) == values.size(), "ctz: shape does not match element count");
  std::vector<float> flat(values.size() * 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    flat[2 * i] = static_cast<float>(values[i].real());
    flat[2 * i + 1] = static_cast<float>(values[i].imag());
  }
  auto out = open_out(path);
  write_header(out, DType::c64, shape);
  write_floats(out, flat);
}

void write_f32(const std::filesystem::path &path, const std::vector<std::size_t> &shape,
               const std::vector<double> &values)
{
  require(product(shape) == values.size(), "ctz: shape does not match element count");
  std::vector<float> flat(values.begin(), values.end());
  auto out = open_out(path);
  write_header(out, DType::f32, shape);
  write_floats(out, flat);
}

void write_b8(const std::filesystem::path &path, const std::vector<std::size_t> &shape,
              const std::vector<std::uint8_t> &values)
{
  require(product(shape) == values.size(), "ctz: shape does not match element count");
  auto out = open_out(path);
  write_header(out, DType::b8, shape);
  std::vector<char> bytes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bytes[i] = values[i] ? 1 : 0;
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Header read_header(const std::filesystem::path &path)
{
  auto in = open_in(path);
  return parse_header(in, path);
}

std::vector<cplx> read_c64(const std::filesystem::path &path, Header *header)
{
  auto in = open_in(path);
  const Header h = expect(in, path, DType::c64);
  const auto flat = to_floats(read_payload(in, h.elements() * 2 * sizeof(float), path));
  std::vector<cplx> values(h.elements());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = {flat[2 * i], flat[2 * i + 1]};
  }
  if (header) {
    *header = h;
  }
  return values;
}

std::vector<double> read_f32(const std::filesystem::path &path, Header *header)
{
  auto in = open_in(path);
  const Header h = expect(in, path, DType::f32);
  const auto flat = to_floats(read_payload(in, h.elements() * sizeof(float), path));
  if (header) {
    *header = h;
  }
  return {flat.begin(), flat.end()};
}

std::vector<std::uint8_t> read_b8(const std::filesystem::path &path, Header *header)
{
  auto in = open_in(path);
  const Header h = expect(in, path, DType::b8);
  const auto buf = read_payload(in, h.elements(), path);
  if (header) {
    *header = h;
  }
  std::vector<std::uint8_t> values(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    values[i] = buf[i] != 0 ? 1 : 0;
  }
  return values;
}

void write_image(const std::filesystem::path &path, const ComplexImage &img)
{
  write_c64(path, {img.height(), img.width()}, img.values());
}

ComplexImage read_image(const std::filesystem::path &path)
{
  Header h;
  auto values = read_c64(path, &h);
  const auto shape = checked_shape(h, 2, path);
  return {shape[0], shape[1], std::move(values)};
}

void write_stack(const std::filesystem::path &path, const std::vector<ComplexImage> &stack)
{
  require(!stack.empty(), "ctz: empty image stack");
  const Shape s = stack.front().shape();
  std::vector<cplx> values;
  values.reserve(stack.size() * s.size());
  for (const auto &img : stack) {
    require(img.shape() == s, "ctz: stack images differ in shape");
    values.insert(values.end(), img.values().begin(), img.values().end());
  }
  write_c64(path, {stack.size(), s.height, s.width}, values);
}

std::vector<ComplexImage> read_stack(const std::filesystem::path &path)
{
  Header h;
  const auto values = read_c64(path, &h);
  const auto shape = checked_shape(h, 3, path);
  const std::size_t plane = shape[1] * shape[2];
  std::vector<ComplexImage> stack;
  for (std::size_t c = 0; c < shape[0]; ++c) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(c * plane);
    stack.emplace_back(shape[1], shape[2], std::vector<cplx>(first, first + static_cast<std::ptrdiff_t>(plane)));
  }
  return stack;
}

void write_mask(const std::filesystem::path &path, const SamplingMask &mask)
{
  write_b8(path, {mask.height(), mask.width()}, mask.keep());
}

SamplingMask read_mask(const std::filesystem::path &path)
{
  Header h;
  auto values = read_b8(path, &h);
  const auto shape = checked_shape(h, 2, path);
  return {shape[0], shape[1], std::move(values)};
}

void write_dictionary(const std::filesystem::path &path, const Dictionary &dict)
{
  const auto r = static_cast<std::size_t>(dict.atoms.rows());
  const auto u = static_cast<std::size_t>(dict.atoms.cols());
  std::vector<cplx> values(r * u);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t k = 0; k < u; ++k) {
      values[i * u + k] = dict.atoms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  }
  write_c64(path, {r, u}, values);
}

Dictionary read_dictionary(const std::filesystem::path &path)
{
  Header h;
  const auto values = read_c64(path, &h);
  const auto shape = checked_shape(h, 2, path);
  Dictionary dict;
  dict.atoms.resize(static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1]));
  for (std::size_t i = 0; i < shape[0]; ++i) {
    for (std::size_t k = 0; k < shape[1]; ++k) {
      dict.atoms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i * shape[1] + k];
    }
  }
  return dict;
}

void save_params(const std::filesystem::path &dir, const DenoiserParams &params)
{
  params.validate();
  std::filesystem::create_directories(dir);
  json layers = json::array();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto &layer = params.layers[l];
    const std::string stem = "layer" + std::to_string(l);
    const std::vector<std::size_t> wshape = {layer.out_channels, layer.in_channels, 3, 3};
    write_f32(dir / (stem + "_weight.ctz"), wshape, layer.weight);
    write_f32(dir / (stem + "_bias.ctz"), {layer.out_channels}, layer.bias);
    layers.push_back({{"weight", stem + "_weight.ctz"},
                      {"bias", stem + "_bias.ctz"},
                      {"weight_shape", wshape},
                      {"bias_shape", std::vector<std::size_t>{layer.out_channels}}});
  }
  json manifest = {{"architecture", params.architecture()},
                   {"channels", params.channels()},
                   {"depth", params.depth()},
                   {"seed", params.seed},
                   {"layers", layers}};
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

DenoiserParams load_params(const std::filesystem::path &dir)
{
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    throw InvalidArgument("cannot open params manifest in " + dir.string());
  }
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception &e) {
    throw InvalidArgument(std::string("params manifest: ") + e.what());
  }
  DenoiserParams params;
  params.seed = manifest.value("seed", std::uint64_t{0});
  for (const auto &entry : manifest.at("layers")) {
    Header wh;
    Header bh;
    auto weight = read_f32(dir / entry.at("weight").get<std::string>(), &wh);
    auto bias = read_f32(dir / entry.at("bias").get<std::string>(), &bh);
    require(wh.shape.size() == 4 && wh.shape[2] == 3 && wh.shape[3] == 3, "params: weight must be [out, in, 3, 3]");
    require(bh.shape.size() == 1 && bh.shape[0] == wh.shape[0], "params: bias must be [out]");
    kernels::ConvLayer layer(wh.shape[1], wh.shape[0]);
    layer.weight = std::move(weight);
    layer.bias = std::move(bias);
    params.layers.push_back(std::move(layer));
  }
  params.validate();
  require(manifest.at("architecture").get<std::string>() == params.architecture(),
          "params: architecture string does not match layer shapes");
  return params;
}

void write_pgm(const std::filesystem::path &path, const std::vector<double> &values, std::size_t height,
               std::size_t width, double lo, double hi)
{
  require(values.size() == height * width, "pgm: size mismatch");
  auto out = open_out(path);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  std::vector<unsigned char> pixels(values.size());
  const double span = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = span > 0.0 ? (values[i] - lo) / span : 0.0;
    pixels[i] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
  }
  out.write(reinterpret_cast<const char *>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_pgm(const std::filesystem::path &path, const std::vector<double> &values, std::size_t height,
               std::size_t width)
{
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  write_pgm(path, values, height, width, values.empty() ? 0.0 : *lo, values.empty() ? 1.0 : *hi);
}

void write_magnitude_pgm(const std::filesystem::path &path, const ComplexImage &img)
{
  write_pgm(path, magnitude(img), img.height(), img.width());
}

void write_error_pgm(const std::filesystem::path &path, const ComplexImage &xhat, const ComplexImage &xtrue)
{
  require_same_shape(xhat, xtrue, "error map");
  const auto ref = magnitude(xtrue);
  const auto [lo, hi] = std::minmax_element(ref.begin(), ref.end());
  std::vector<double> err(ref.size());
  for (std::size_t i = 0; i < err.size(); ++i) {
    err[i] = 5.0 * std::abs(xhat[i] - xtrue[i]);
  }
  write_pgm(path, err, xtrue.height(), xtrue.width(), *lo, *hi);
}

void write_pbm(const std::filesystem::path &path, const SamplingMask &mask)
{
  auto out = open_out(path);
  out << "P1\n" << mask.width() << ' ' << mask.height() << '\n';
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      out << (mask(r, c) ? '1' : '0') << (c + 1 < mask.width() ? ' ' : '\n');
    }
  }
}

} // namespace blips::ctz
