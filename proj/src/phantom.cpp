#include "blips/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "blips/errors.hpp"
#include "blips/fft.hpp"
#include "blips/random.hpp"

namespace blips {
namespace {

const std::vector<Ellipse> kDefaultEllipses = {
  {0.0, 0.0, 0.72, 0.95, 0.0, 0.95},
  {0.0, -0.02, 0.66, 0.87, 0.0, 0.35},
  {0.22, 0.0, 0.11, 0.31, -18.0, 0.55},
  {-0.22, 0.0, 0.16, 0.41, 18.0, 0.5},
  {0.0, 0.35, 0.21, 0.25, 0.0, 0.7},
  {0.0, 0.1, 0.046, 0.046, 0.0, 0.85},
  {0.0, -0.1, 0.046, 0.046, 0.0, 0.8},
  {-0.08, -0.605, 0.046, 0.023, 0.0, 0.9},
  {0.0, -0.605, 0.023, 0.023, 0.0, 0.75},
  {0.06, -0.605, 0.046, 0.023, 0.0, 0.65},
};

// Real field with spectral support inside `radius` (in k-space samples),
// scaled to max |value| = 1.
std::vector<double> smooth_field(std::size_t h, std::size_t w, double radius, Rng &rng)
{
  ComplexImage noise(h, w);
  for (auto &v : noise.data()) {
    v = rng.complex_normal();
  }
  ComplexImage k = fft2c(noise);
  const double ch = static_cast<double>(h / 2);
  const double cw = static_cast<double>(w / 2);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double dr = static_cast<double>(r) - ch;
      const double dc = static_cast<double>(c) - cw;
      if (dr * dr + dc * dc > radius * radius) {
        k(r, c) = 0.0;
      }
    }
  }
  const ComplexImage field = ifft2c(k);
  std::vector<double> out(h * w);
  double peak = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = field[i].real();
    peak = std::max(peak, std::abs(out[i]));
  }
  if (peak > 0.0) {
    for (auto &v : out) {
      v /= peak;
    }
  }
  return out;
}

// 5x7 glyphs, one string per row, '#' = set.
const std::array<std::string, 7> *glyph_rows(char glyph)
{
  static const std::array<std::string, 7> a = {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"};
  static const std::array<std::string, 7> e = {"#####", "#....", "#....", "####.", "#....", "#....", "#####"};
  static const std::array<std::string, 7> h = {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"};
  static const std::array<std::string, 7> l = {"#....", "#....", "#....", "#....", "#....", "#....", "#####"};
  static const std::array<std::string, 7> t = {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."};
  static const std::array<std::string, 7> x = {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"};
  switch (glyph) {
  case 'A':
    return &a;
  case 'E':
    return &e;
  case 'H':
    return &h;
  case 'L':
    return &l;
  case 'T':
    return &t;
  case 'X':
    return &x;
  default:
    return nullptr;
  }
}

} // namespace

PhantomSpec PhantomSpec::make_default(std::size_t height, std::size_t width, std::uint64_t seed)
{
  PhantomSpec spec;
  spec.height = height;
  spec.width = width;
  spec.ellipses = kDefaultEllipses;
  spec.seed = seed;
  return spec;
}

void PhantomSpec::validate() const
{
  require(height >= 32 && width >= 32, "phantom: dimensions must be at least 32");
  require(texture_amplitude >= 0.0 && texture_amplitude < 1.0, "phantom: texture amplitude must be in [0, 1)");
  require(phase_amplitude >= 0.0, "phantom: phase amplitude must be non-negative");
  for (const auto &e : ellipses) {
    require(e.intensity >= 0.0 && e.intensity <= 1.0, "phantom: ellipse intensity outside [0, 1]");
    require(e.ax > 0.0 && e.ay > 0.0, "phantom: ellipse axes must be positive");
  }
}

PhantomSpec randomized_spec(std::size_t height, std::size_t width, std::uint64_t seed)
{
  PhantomSpec spec = PhantomSpec::make_default(height, width, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const double scale = rng.uniform(0.85, 1.05);
  const double shift_x = rng.uniform(-0.05, 0.05);
  const double shift_y = rng.uniform(-0.05, 0.05);
  for (std::size_t i = 0; i < spec.ellipses.size(); ++i) {
    auto &e = spec.ellipses[i];
    e.cx = e.cx * scale + shift_x;
    e.cy = e.cy * scale + shift_y;
    e.ax *= scale * (i < 2 ? 1.0 : rng.uniform(0.8, 1.25));
    e.ay *= scale * (i < 2 ? 1.0 : rng.uniform(0.8, 1.25));
    e.angle_deg += rng.uniform(-15.0, 15.0);
    if (i >= 2) {
      e.cx += rng.uniform(-0.06, 0.06);
      e.cy += rng.uniform(-0.06, 0.06);
      e.intensity = std::clamp(e.intensity + rng.uniform(-0.15, 0.15), 0.0, 1.0);
    }
  }
  return spec;
}

ComplexImage make_phantom(const PhantomSpec &spec)
{
  spec.validate();
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  std::vector<double> paint(h * w, 0.0);
  for (const auto &e : spec.ellipses) {
    const double theta = e.angle_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    for (std::size_t r = 0; r < h; ++r) {
      const double y = (2.0 * static_cast<double>(r) + 1.0) / static_cast<double>(h) - 1.0 - e.cy;
      for (std::size_t c = 0; c < w; ++c) {
        const double x = (2.0 * static_cast<double>(c) + 1.0) / static_cast<double>(w) - 1.0 - e.cx;
        const double u = (x * ct + y * st) / e.ax;
        const double v = (-x * st + y * ct) / e.ay;
        if (u * u + v * v <= 1.0) {
          paint[r * w + c] = e.intensity;
        }
      }
    }
  }
  Rng rng(spec.seed);
  const double extent = static_cast<double>(std::min(h, w));
  const auto texture = smooth_field(h, w, extent / 8.0, rng);
  const auto phase = smooth_field(h, w, 3.0, rng);
  ComplexImage img(h, w);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double mag = std::clamp(paint[i] * (1.0 + spec.texture_amplitude * texture[i]), 0.0, 1.0);
    img[i] = std::polar(mag, std::numbers::pi * spec.phase_amplitude * phase[i]);
  }
  return img;
}

CoilSet make_coils(std::size_t height, std::size_t width, std::size_t n_coils, std::uint64_t seed)
{
  require(n_coils >= 1, "make_coils: need at least one coil");
  require(height > 0 && width > 0, "make_coils: empty grid");
  Rng rng(seed);
  const double offset = rng.uniform();
  const double h2 = static_cast<double>(height) / 2.0;
  const double w2 = static_cast<double>(width) / 2.0;
  std::vector<ComplexImage> maps;
  for (std::size_t c = 0; c < n_coils; ++c) {
    const double angle = 2.0 * std::numbers::pi * (static_cast<double>(c) + offset) / static_cast<double>(n_coils);
    const double dy = std::sin(angle);
    const double dx = std::cos(angle);
    // Walk from the centre along (dy, dx) until the bounding box.
    const double t = 1.0 / std::max(std::abs(dy) / h2, std::abs(dx) / w2);
    const double r0 = h2 + t * dy;
    const double c0 = w2 + t * dx;
    const double width_px = 0.5 * std::max(h2, w2) * 2.0 * rng.uniform(0.8, 1.2);
    const double phase0 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double ramp_r = rng.uniform(-1.0, 1.0) * std::numbers::pi / static_cast<double>(height);
    const double ramp_c = rng.uniform(-1.0, 1.0) * std::numbers::pi / static_cast<double>(width);
    ComplexImage map(height, width);
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t col = 0; col < width; ++col) {
        const double rr = static_cast<double>(r) - r0;
        const double cc = static_cast<double>(col) - c0;
        const double mag = std::exp(-(rr * rr + cc * cc) / (2.0 * width_px * width_px));
        const double ph = phase0 + ramp_r * static_cast<double>(r) + ramp_c * static_cast<double>(col);
        map(r, col) = std::polar(mag, ph);
      }
    }
    maps.push_back(std::move(map));
  }
  return CoilSet(std::move(maps), SosPolicy::normalize);
}

KSpace simulate_kspace(const ComplexImage &x, const MultiCoilSystem &sys, double noise_sigma, std::uint64_t seed)
{
  require(noise_sigma >= 0.0, "simulate_kspace: noise sigma must be non-negative");
  KSpace y = apply_forward(sys, x);
  if (noise_sigma == 0.0) {
    return y;
  }
  Rng rng(seed);
  const auto &mask = sys.mask();
  for (auto &coil : y) {
    for (std::size_t i = 0; i < coil.size(); ++i) {
      if (mask[i]) {
        coil[i] += noise_sigma * rng.complex_normal();
      }
    }
  }
  return y;
}

std::vector<std::pair<std::size_t, std::size_t>> Feature::pixels(std::size_t height, std::size_t width) const
{
  std::vector<std::pair<std::size_t, std::size_t>> out;
  auto inside = [&](long r, long c) {
    return r >= 0 && c >= 0 && static_cast<std::size_t>(r) < height && static_cast<std::size_t>(c) < width;
  };
  const long r0 = static_cast<long>(row);
  const long c0 = static_cast<long>(col);
  switch (kind) {
  case FeatureKind::disc: {
    const long rad = static_cast<long>(size);
    require(inside(r0 - rad, c0 - rad) && inside(r0 + rad, c0 + rad), "plant_features: disc outside image");
    for (long dr = -rad; dr <= rad; ++dr) {
      for (long dc = -rad; dc <= rad; ++dc) {
        if (dr * dr + dc * dc <= rad * rad) {
          out.emplace_back(static_cast<std::size_t>(r0 + dr), static_cast<std::size_t>(c0 + dc));
        }
      }
    }
    break;
  }
  case FeatureKind::bar: {
    require(size >= 1 && thickness >= 1, "plant_features: empty bar");
    const long rows = static_cast<long>(vertical ? size : thickness);
    const long cols = static_cast<long>(vertical ? thickness : size);
    require(inside(r0 + rows - 1, c0 + cols - 1), "plant_features: bar outside image");
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) {
        out.emplace_back(static_cast<std::size_t>(r0 + r), static_cast<std::size_t>(c0 + c));
      }
    }
    break;
  }
  case FeatureKind::letter: {
    const auto *rows = glyph_rows(glyph);
    require(rows != nullptr, std::string("plant_features: no bitmap for glyph ") + glyph);
    require(size >= 1, "plant_features: letter scale must be positive");
    const long s = static_cast<long>(size);
    require(inside(r0 + 7 * s - 1, c0 + 5 * s - 1), "plant_features: letter outside image");
    for (long gr = 0; gr < 7; ++gr) {
      for (long sr = 0; sr < s; ++sr) {
        for (long gc = 0; gc < 5; ++gc) {
          if ((*rows)[static_cast<std::size_t>(gr)][static_cast<std::size_t>(gc)] != '#') {
            continue;
          }
          for (long sc = 0; sc < s; ++sc) {
            out.emplace_back(static_cast<std::size_t>(r0 + gr * s + sr), static_cast<std::size_t>(c0 + gc * s + sc));
          }
        }
      }
    }
    break;
  }
  }
  return out;
}

std::pair<std::size_t, std::size_t> Feature::centre() const
{
  switch (kind) {
  case FeatureKind::disc:
    return {row, col};
  case FeatureKind::bar:
    return vertical ? std::pair{row + size / 2, col + thickness / 2} : std::pair{row + thickness / 2, col + size / 2};
  case FeatureKind::letter:
    return {row + 7 * size / 2, col + 5 * size / 2};
  }
  return {row, col};
}

ComplexImage plant_features(const ComplexImage &x, const std::vector<Feature> &features)
{
  ComplexImage out = x;
  for (const auto &f : features) {
    require(f.intensity >= 0.0, "plant_features: negative intensity");
    for (const auto &[r, c] : f.pixels(x.height(), x.width())) {
      const cplx v = out(r, c);
      const double mag = std::abs(v);
      out(r, c) = mag > 0.0 ? v * (f.intensity / mag) : cplx{f.intensity, 0.0};
    }
  }
  return out;
}

std::vector<Feature> default_features(std::size_t height, std::size_t width)
{
  require(height >= 32 && width >= 32, "default_features: image too small");
  Feature disc;
  disc.kind = FeatureKind::disc;
  disc.row = height * 5 / 16;
  disc.col = width * 5 / 16;
  disc.size = 2;
  disc.intensity = 0.9;
  Feature bar;
  bar.kind = FeatureKind::bar;
  bar.row = height / 2 + 4;
  bar.col = width / 2 - 6;
  bar.size = 12;
  bar.thickness = 1;
  bar.intensity = 0.85;
  Feature letter;
  letter.kind = FeatureKind::letter;
  letter.row = height / 2 - 3;
  letter.col = width * 5 / 8;
  letter.size = 1;
  letter.glyph = 'A';
  letter.intensity = 0.9;
  return {disc, bar, letter};
}

FeatureKind parse_feature_kind(const std::string &name)
{
  if (name == "disc") {
    return FeatureKind::disc;
  }
  if (name == "bar") {
    return FeatureKind::bar;
  }
  if (name == "letter") {
    return FeatureKind::letter;
  }
  throw InvalidArgument("unknown feature kind: " + name);
}

std::string to_string(FeatureKind kind)
{
  switch (kind) {
  case FeatureKind::disc:
    return "disc";
  case FeatureKind::bar:
    return "bar";
  case FeatureKind::letter:
    return "letter";
  }
  return "?";
}

} // namespace blips
